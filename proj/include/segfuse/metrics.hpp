#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "segfuse/types.hpp"

namespace segfuse {

/// Per-class IoU of pred against gt. Unlabeled prediction pixels belong to no class;
/// classes with an empty union are undefined. gt must be fully labeled.
IoUReport per_class_iou(const LabelMap& pred, const LabelMap& gt);

/// Fraction of gt pixels whose prediction matches.
double pixel_accuracy(const LabelMap& pred, const LabelMap& gt);

/// rho(c, t): mean of student t's probability for class c over measurement pixels
/// where that student predicts c. An empty mask selects every pixel.
CertaintyTable certainty_table(std::span<const ProbMap> students,
                               std::span<const std::uint8_t> measurement_mask = {});

/// Per-class cosine similarity between rho(c, .) and Phi(c, .); undefined cells count
/// as 0, and a zero-norm vector leaves that class undefined.
std::vector<std::optional<double>> certainty_iou_cosine(const CertaintyTable& rho,
                                                        std::span<const IoUReport> phis);

/// Histogram of per-pixel max probability over [0, 1] in uniform bins; the last bin
/// is closed on the right.
std::vector<std::uint64_t> certainty_histogram(const ProbMap& prob, std::size_t bins);

/// CSV "bin_low,bin_high,count".
std::string histogram_to_csv(std::span<const std::uint64_t> counts);

}  // namespace segfuse
