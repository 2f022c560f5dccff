#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "segfuse/types.hpp"

namespace segfuse {

/// Conflict-resolution window used by the toolkit unless overridden.
inline constexpr std::size_t kDefaultKappa = 13;

/// Per-pixel majority vote over unified teacher maps; ties go to the smallest class id.
LabelMap pixel_fuse(std::span<const LabelMap> unified);

/// Per-class pixel sets A_c (pixels teacher pi(c) labels as c) and the overlap
/// set A_o of pixels claimed by more than one class channel.
class ChannelSets {
 public:
  /// membership is class-major: membership[c * pixels + p] != 0 iff p is in A_c.
  ChannelSets(Extent extent, std::size_t classes, std::vector<std::uint8_t> membership);

  Extent extent() const noexcept { return extent_; }
  std::size_t pixels() const noexcept { return extent_.pixels(); }
  std::size_t classes() const noexcept { return classes_; }

  bool contains(std::size_t c, std::size_t p) const noexcept {
    return membership_[c * pixels() + p] != 0;
  }
  std::span<const std::uint8_t> channel(std::size_t c) const noexcept {
    return std::span<const std::uint8_t>(membership_).subspan(c * pixels(), pixels());
  }
  /// Number of class channels claiming p.
  std::uint16_t claims(std::size_t p) const noexcept { return claims_[p]; }
  bool in_overlap(std::size_t p) const noexcept { return claims_[p] > 1; }
  /// A_o in increasing pixel order.
  const std::vector<std::size_t>& overlap() const noexcept { return overlap_; }

 private:
  Extent extent_;
  std::size_t classes_;
  std::vector<std::uint8_t> membership_;
  std::vector<std::uint16_t> claims_;
  std::vector<std::size_t> overlap_;
};

ChannelSets build_channel_sets(std::span<const LabelMap> unified, const FusionPolicy& policy);

/// For each pixel of sets.overlap() (same order), the claiming class with the most
/// members of its own A_c inside the kappa x kappa window clipped at the borders.
/// Counts include contested pixels; ties go to the smallest claiming class.
std::vector<std::uint16_t> resolve_conflicts(const ChannelSets& sets, std::size_t kappa);

/// Channel-wise recombination: overlap pixels resolved by window vote, singly
/// claimed pixels keep their class, unclaimed pixels become kUnlabeled.
LabelMap channel_fuse(std::span<const LabelMap> unified, const FusionPolicy& policy,
                      std::size_t kappa = kDefaultKappa);

/// Validates kappa (odd, >= 1); throws ValidationError otherwise.
void require_valid_kappa(std::size_t kappa);

}  // namespace segfuse
