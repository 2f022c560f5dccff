#pragma once

// Serial, straightforward versions of the per-pixel kernels. They are kept for
// parity tests and benchmarks against the OpenMP implementations and are not
// used on any production path.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "segfuse/distill.hpp"
#include "segfuse/fusion.hpp"
#include "segfuse/types.hpp"

namespace segfuse::reference {

LabelMap unify(const ProbMap& prob);
LabelMap pixel_fuse(std::span<const LabelMap> unified);
ChannelSets build_channel_sets(std::span<const LabelMap> unified, const FusionPolicy& policy);
/// Brute-force window scan per overlap pixel.
std::vector<std::uint16_t> resolve_conflicts(const ChannelSets& sets, std::size_t kappa);
LabelMap channel_fuse(std::span<const LabelMap> unified, const FusionPolicy& policy,
                      std::size_t kappa);
IoUReport per_class_iou(const LabelMap& pred, const LabelMap& gt);
ProbMap average_fuse(std::span<const ProbMap> teachers);
ProbMap student_forward(const ToyStudent& model, const FeatureMap& features);
/// Single running sum over pixels; agrees with the blocked version to rounding.
LossAndGradient ce_objective(const ToyStudent& model, const PixelBatch& batch);

}  // namespace segfuse::reference
