#include "segfuse/fusion.hpp"

#include <algorithm>
#include <string>

#include "segfuse/error.hpp"

namespace segfuse {

namespace {

void require_consistent(std::span<const LabelMap> unified, const char* what) {
  if (unified.empty()) throw ValidationError(std::string(what) + ": empty ensemble");
  for (const auto& m : unified) {
    if (m.extent() != unified.front().extent() || m.classes() != unified.front().classes()) {
      throw ValidationError(std::string(what) + ": dimension mismatch between teachers");
    }
  }
}

}  // namespace

void require_valid_kappa(std::size_t kappa) {
  if (kappa == 0 || kappa % 2 == 0) {
    throw ValidationError("kappa must be odd and >= 1, got " + std::to_string(kappa));
  }
}

LabelMap pixel_fuse(std::span<const LabelMap> unified) {
  require_consistent(unified, "pixel_fuse");
  for (const auto& m : unified) {
    if (m.has_unlabeled()) throw ValidationError("pixel_fuse: input contains unlabeled pixels");
  }
  const std::size_t n = unified.front().pixels();
  const std::size_t classes = unified.front().classes();
  std::vector<std::uint16_t> out(n);

#pragma omp parallel
  {
    std::vector<std::uint32_t> votes(classes);
#pragma omp for schedule(static)
    for (std::size_t p = 0; p < n; ++p) {
      std::fill(votes.begin(), votes.end(), 0u);
      for (const auto& m : unified) ++votes[m[p]];
      std::size_t best = 0;
      for (std::size_t c = 1; c < classes; ++c) {
        if (votes[c] > votes[best]) best = c;
      }
      out[p] = static_cast<std::uint16_t>(best);
    }
  }
  return LabelMap(unified.front().extent(), classes, std::move(out));
}

ChannelSets::ChannelSets(Extent extent, std::size_t classes, std::vector<std::uint8_t> membership)
    : extent_(extent), classes_(classes), membership_(std::move(membership)) {
  if (membership_.size() != classes_ * extent_.pixels()) {
    throw ValidationError("channel sets: membership size does not match |C|*H*W");
  }
  const std::size_t n = extent_.pixels();
  claims_.assign(n, 0);
#pragma omp parallel for schedule(static)
  for (std::size_t p = 0; p < n; ++p) {
    std::uint16_t k = 0;
    for (std::size_t c = 0; c < classes_; ++c) k += membership_[c * n + p] != 0;
    claims_[p] = k;
  }
  for (std::size_t p = 0; p < n; ++p) {
    if (claims_[p] > 1) overlap_.push_back(p);
  }
}

ChannelSets build_channel_sets(std::span<const LabelMap> unified, const FusionPolicy& policy) {
  require_consistent(unified, "build_channel_sets");
  const std::size_t classes = unified.front().classes();
  if (policy.classes() != classes) {
    throw ValidationError("build_channel_sets: policy covers " + std::to_string(policy.classes()) +
                          " classes, maps have " + std::to_string(classes));
  }
  for (std::size_t c = 0; c < classes; ++c) {
    if (policy[c] >= unified.size()) {
      throw ValidationError("build_channel_sets: policy references missing teacher " +
                            std::to_string(policy[c]));
    }
  }
  const std::size_t n = unified.front().pixels();
  std::vector<std::uint8_t> membership(classes * n, 0);
#pragma omp parallel for schedule(static)
  for (std::size_t c = 0; c < classes; ++c) {
    const auto labels = unified[policy[c]].values();
    std::uint8_t* row = membership.data() + c * n;
    for (std::size_t p = 0; p < n; ++p) row[p] = labels[p] == c;
  }
  return ChannelSets(unified.front().extent(), classes, std::move(membership));
}

std::vector<std::uint16_t> resolve_conflicts(const ChannelSets& sets, std::size_t kappa) {
  require_valid_kappa(kappa);
  const auto& overlap = sets.overlap();
  std::vector<std::uint16_t> out(overlap.size());
  if (overlap.empty()) return out;

  const std::size_t h = sets.extent().height;
  const std::size_t w = sets.extent().width;
  const std::size_t classes = sets.classes();
  const std::size_t stride = w + 1;
  const std::size_t plane = (h + 1) * stride;

  // Summed-area table per class channel.
  std::vector<std::uint32_t> integral(classes * plane, 0);
#pragma omp parallel for schedule(static)
  for (std::size_t c = 0; c < classes; ++c) {
    const auto ch = sets.channel(c);
    std::uint32_t* s = integral.data() + c * plane;
    for (std::size_t y = 0; y < h; ++y) {
      std::uint32_t row = 0;
      for (std::size_t x = 0; x < w; ++x) {
        row += ch[y * w + x];
        s[(y + 1) * stride + x + 1] = s[y * stride + x + 1] + row;
      }
    }
  }

  const std::size_t half = kappa / 2;
  const auto n_overlap = overlap.size();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n_overlap; ++i) {
    const std::size_t p = overlap[i];
    const std::size_t y = p / w, x = p % w;
    const std::size_t y0 = y > half ? y - half : 0, y1 = std::min(h - 1, y + half);
    const std::size_t x0 = x > half ? x - half : 0, x1 = std::min(w - 1, x + half);
    std::size_t best = 0;
    std::uint32_t best_count = 0;
    bool found = false;
    for (std::size_t c = 0; c < classes; ++c) {
      if (!sets.contains(c, p)) continue;
      const std::uint32_t* s = integral.data() + c * plane;
      const std::uint32_t count = s[(y1 + 1) * stride + x1 + 1] - s[y0 * stride + x1 + 1] -
                                  s[(y1 + 1) * stride + x0] + s[y0 * stride + x0];
      if (!found || count > best_count) {
        best = c;
        best_count = count;
        found = true;
      }
    }
    out[i] = static_cast<std::uint16_t>(best);
  }
  return out;
}

LabelMap channel_fuse(std::span<const LabelMap> unified, const FusionPolicy& policy,
                      std::size_t kappa) {
  require_valid_kappa(kappa);
  const ChannelSets sets = build_channel_sets(unified, policy);
  const auto resolved = resolve_conflicts(sets, kappa);

  const std::size_t n = sets.pixels();
  const std::size_t classes = sets.classes();
  std::vector<std::uint16_t> out(n, kUnlabeled);
#pragma omp parallel for schedule(static)
  for (std::size_t p = 0; p < n; ++p) {
    if (sets.claims(p) != 1) continue;
    for (std::size_t c = 0; c < classes; ++c) {
      if (sets.contains(c, p)) {
        out[p] = static_cast<std::uint16_t>(c);
        break;
      }
    }
  }
  const auto& overlap = sets.overlap();
  for (std::size_t i = 0; i < overlap.size(); ++i) out[overlap[i]] = resolved[i];
  return LabelMap(sets.extent(), classes, std::move(out));
}

}  // namespace segfuse
