#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "segfuse/random.hpp"
#include "segfuse/types.hpp"

namespace segfuse::synth {

struct FeatureParams {
  /// Feature dimension; 0 means one dimension per class.
  std::size_t dims = 0;
  /// Standard deviation of the isotropic Gaussian around each class mean.
  double noise = 0.5;
  /// Length of each class mean vector.
  double separation = 2.0;
  /// Seeds the class means when dims < classes (otherwise means are scaled unit
  /// vectors). Kept apart from the image seed so every image shares one feature space.
  std::uint64_t means_seed = 0;
};

struct GroundTruth {
  LabelMap labels;
  FeatureMap features;
};

/// Voronoi-blob label map with roughly region_scale x region_scale cells; every
/// class owns at least one seed so every class is present.
LabelMap voronoi_labels(Extent extent, std::size_t classes, double region_scale, Rng& rng);

/// Class-conditional Gaussian feature vectors for a label map.
FeatureMap class_features(const LabelMap& labels, const FeatureParams& params, Rng& rng);

GroundTruth gen_ground_truth(std::size_t height, std::size_t width, std::size_t classes,
                             double region_scale, std::uint64_t seed, const FeatureParams& params = {});

struct Corruption {
  /// Probability that a ground-truth pixel of class c is relabeled.
  std::vector<double> per_class_error;
  /// Softmax temperature over one-hot logits: small is confident, large is diffuse.
  double temperature = 1.0;
  std::uint64_t seed = 0;
  /// Optional fixed target class per source class; empty means uniform over the others.
  std::vector<std::uint16_t> confusion;
  /// When > 0, flips are decided per Voronoi blob of this scale instead of per pixel.
  double blob_scale = 0.0;
};

/// Hard labels after applying the corruption.
LabelMap corrupt_labels(const LabelMap& gt, const Corruption& corruption);

/// Softmax of one-hot logits scaled by 1/temperature; argmax equals the hard label.
ProbMap labels_to_probs(const LabelMap& hard, double temperature);

ProbMap corrupt_teacher(const LabelMap& gt, const Corruption& corruption);

/// Cyclic permutation of class ids without fixed points, seeded.
std::vector<std::uint16_t> shared_confusion(std::size_t classes, std::uint64_t shift_seed);

struct UnderperformerParams {
  double error = 0.6;
  double temperature = 0.05;
  /// Under-performers generated with the same shift seed share one confusion map,
  /// modelling the common domain-shift bias of source-only models.
  std::uint64_t shift_seed = 0x5eed;
  double blob_scale = 0.0;
};

/// Confidently wrong teacher: high uniform error, low temperature.
ProbMap gen_underperformer(const LabelMap& gt, std::uint64_t seed,
                           const UnderperformerParams& params = {});

}  // namespace segfuse::synth
