#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "segfuse/types.hpp"

namespace segfuse {

/// Each class independently assigned a uniformly random teacher.
FusionPolicy select_random(std::size_t classes, std::size_t teachers, std::uint64_t seed);

/// pi(c) = argmax_t Phi(c, t) over per-teacher IoU reports (ground-truth oracle).
/// Classes undefined for every teacher fall back to teacher 0 and are appended to
/// `fallback_classes` when given.
FusionPolicy select_oracle(std::span<const IoUReport> phis,
                           std::vector<std::size_t>* fallback_classes = nullptr);

/// pi(c) = argmax_t rho(c, t). Undefined cells rank below every defined value.
FusionPolicy select_certainty(const CertaintyTable& rho,
                              std::vector<std::size_t>* fallback_classes = nullptr);

}  // namespace segfuse
