#include "segfuse/synth.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "segfuse/error.hpp"

namespace segfuse::synth {

namespace {

/// Nearest-site owner per pixel; ties go to the lower site index.
std::vector<std::size_t> voronoi_owner(Extent extent, std::size_t sites, Rng& rng) {
  const std::size_t n = extent.pixels();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < sites; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.uniform_index(n - i));
    std::swap(order[i], order[j]);
  }
  std::vector<long> sy(sites), sx(sites);
  for (std::size_t s = 0; s < sites; ++s) {
    sy[s] = static_cast<long>(order[s] / extent.width);
    sx[s] = static_cast<long>(order[s] % extent.width);
  }
  std::vector<std::size_t> owner(n);
#pragma omp parallel for schedule(static)
  for (std::size_t p = 0; p < n; ++p) {
    const long y = static_cast<long>(p / extent.width), x = static_cast<long>(p % extent.width);
    long best = std::numeric_limits<long>::max();
    std::size_t arg = 0;
    for (std::size_t s = 0; s < sites; ++s) {
      const long d = (y - sy[s]) * (y - sy[s]) + (x - sx[s]) * (x - sx[s]);
      if (d < best) {
        best = d;
        arg = s;
      }
    }
    owner[p] = arg;
  }
  return owner;
}

std::size_t site_count(Extent extent, std::size_t minimum, double region_scale) {
  const double want = std::ceil(static_cast<double>(extent.pixels()) / (region_scale * region_scale));
  return std::min(extent.pixels(), std::max(minimum, static_cast<std::size_t>(want)));
}

std::uint16_t flip_target(std::uint16_t c, std::size_t classes, const Corruption& corruption, Rng& rng) {
  if (!corruption.confusion.empty()) return corruption.confusion[c];
  auto t = static_cast<std::uint16_t>(rng.uniform_index(classes - 1));
  return t >= c ? static_cast<std::uint16_t>(t + 1) : t;
}

}  // namespace

LabelMap voronoi_labels(Extent extent, std::size_t classes, double region_scale, Rng& rng) {
  (void)ClassSet{classes};
  if (!(region_scale >= 1.0)) throw ValidationError("voronoi_labels: region_scale must be >= 1");
  if (extent.pixels() < classes) {
    throw ValidationError("voronoi_labels: more classes than pixels");
  }
  const std::size_t sites = site_count(extent, classes, region_scale);
  const auto owner = voronoi_owner(extent, sites, rng);
  std::vector<std::uint16_t> site_class(sites);
  for (std::size_t s = 0; s < sites; ++s) {
    site_class[s] = static_cast<std::uint16_t>(s < classes ? s : rng.uniform_index(classes));
  }
  std::vector<std::uint16_t> out(extent.pixels());
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = site_class[owner[p]];
  return LabelMap(extent, classes, std::move(out));
}

FeatureMap class_features(const LabelMap& labels, const FeatureParams& params, Rng& rng) {
  if (labels.has_unlabeled()) throw ValidationError("class_features: labels must be complete");
  if (!(params.noise >= 0.0) || !(params.separation > 0.0)) {
    throw ValidationError("class_features: noise must be >= 0 and separation > 0");
  }
  const std::size_t classes = labels.classes();
  const std::size_t dims = params.dims == 0 ? classes : params.dims;
  std::vector<double> means(classes * dims, 0.0);
  if (dims >= classes) {
    for (std::size_t c = 0; c < classes; ++c) means[c * dims + c] = params.separation;
  } else {
    Rng mean_rng(params.means_seed);
    for (std::size_t c = 0; c < classes; ++c) {
      double norm = 0.0;
      for (std::size_t k = 0; k < dims; ++k) {
        means[c * dims + k] = mean_rng.normal();
        norm += means[c * dims + k] * means[c * dims + k];
      }
      norm = std::sqrt(norm);
      for (std::size_t k = 0; k < dims; ++k) {
        means[c * dims + k] *= params.separation / (norm > 0.0 ? norm : 1.0);
      }
    }
  }
  std::vector<double> values(labels.pixels() * dims);
  for (std::size_t p = 0; p < labels.pixels(); ++p) {
    const double* mu = means.data() + labels[p] * dims;
    for (std::size_t k = 0; k < dims; ++k) values[p * dims + k] = mu[k] + params.noise * rng.normal();
  }
  return FeatureMap(labels.extent(), dims, std::move(values));
}

GroundTruth gen_ground_truth(std::size_t height, std::size_t width, std::size_t classes,
                             double region_scale, std::uint64_t seed, const FeatureParams& params) {
  Rng rng(seed);
  Rng label_rng = rng.fork(1);
  Rng feature_rng = rng.fork(2);
  LabelMap labels = voronoi_labels(Extent{height, width}, classes, region_scale, label_rng);
  FeatureMap features = class_features(labels, params, feature_rng);
  return GroundTruth{std::move(labels), std::move(features)};
}

LabelMap corrupt_labels(const LabelMap& gt, const Corruption& corruption) {
  const std::size_t classes = gt.classes();
  if (gt.has_unlabeled()) throw ValidationError("corrupt_teacher: ground truth must be complete");
  if (corruption.per_class_error.size() != classes) {
    throw ValidationError("corrupt_teacher: need one error rate per class");
  }
  for (double e : corruption.per_class_error) {
    if (!(e >= 0.0 && e <= 1.0)) throw ValidationError("corrupt_teacher: error rate outside [0,1]");
  }
  if (!corruption.confusion.empty()) {
    if (corruption.confusion.size() != classes) {
      throw ValidationError("corrupt_teacher: confusion map must cover every class");
    }
    for (std::size_t c = 0; c < classes; ++c) {
      if (corruption.confusion[c] >= classes || corruption.confusion[c] == c) {
        throw ValidationError("corrupt_teacher: confusion must map each class to another class");
      }
    }
  }
  if (!(corruption.blob_scale == 0.0 || corruption.blob_scale >= 1.0)) {
    throw ValidationError("corrupt_teacher: blob_scale must be 0 or >= 1");
  }

  Rng rng(corruption.seed);
  std::vector<std::uint16_t> out(gt.values().begin(), gt.values().end());
  if (corruption.blob_scale == 0.0) {
    for (std::size_t p = 0; p < out.size(); ++p) {
      const auto c = gt[p];
      if (rng.bernoulli(corruption.per_class_error[c])) out[p] = flip_target(c, classes, corruption, rng);
    }
  } else {
    Rng blob_rng = rng.fork(1);
    const std::size_t sites = site_count(gt.extent(), 1, corruption.blob_scale);
    const auto owner = voronoi_owner(gt.extent(), sites, blob_rng);
    // One decision per (blob, class) pair, drawn in a fixed order.
    std::vector<std::uint16_t> decision(sites * classes);
    for (std::size_t s = 0; s < sites; ++s) {
      for (std::size_t c = 0; c < classes; ++c) {
        const auto cc = static_cast<std::uint16_t>(c);
        decision[s * classes + c] =
            rng.bernoulli(corruption.per_class_error[c]) ? flip_target(cc, classes, corruption, rng) : cc;
      }
    }
    for (std::size_t p = 0; p < out.size(); ++p) out[p] = decision[owner[p] * classes + gt[p]];
  }
  return LabelMap(gt.extent(), classes, std::move(out));
}

ProbMap labels_to_probs(const LabelMap& hard, double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ValidationError("temperature must be positive and finite");
  }
  if (hard.has_unlabeled()) throw ValidationError("labels_to_probs: unlabeled pixels");
  const std::size_t classes = hard.classes();
  const double other = std::exp(-1.0 / temperature);
  const double z = 1.0 + static_cast<double>(classes - 1) * other;
  const auto hi = static_cast<float>(1.0 / z);
  const auto lo = static_cast<float>(other / z);
  if (!(hi > lo)) {
    throw ValidationError("temperature " + std::to_string(temperature) +
                          " too high to keep the argmax distinct in float32");
  }
  std::vector<float> values(hard.pixels() * classes, lo);
  for (std::size_t p = 0; p < hard.pixels(); ++p) values[p * classes + hard[p]] = hi;
  return ProbMap(hard.extent(), classes, std::move(values));
}

ProbMap corrupt_teacher(const LabelMap& gt, const Corruption& corruption) {
  if (!(corruption.temperature > 0.0)) throw ValidationError("corrupt_teacher: temperature must be > 0");
  return labels_to_probs(corrupt_labels(gt, corruption), corruption.temperature);
}

std::vector<std::uint16_t> shared_confusion(std::size_t classes, std::uint64_t shift_seed) {
  (void)ClassSet{classes};
  std::vector<std::uint16_t> perm(classes);
  std::iota(perm.begin(), perm.end(), std::uint16_t{0});
  Rng rng(shift_seed);
  // Sattolo's algorithm: a single cycle, hence no fixed points.
  for (std::size_t i = classes - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_index(i));
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

ProbMap gen_underperformer(const LabelMap& gt, std::uint64_t seed, const UnderperformerParams& params) {
  Corruption corruption;
  corruption.per_class_error.assign(gt.classes(), params.error);
  corruption.temperature = params.temperature;
  corruption.seed = seed;
  corruption.confusion = shared_confusion(gt.classes(), params.shift_seed);
  corruption.blob_scale = params.blob_scale;
  return corrupt_teacher(gt, corruption);
}

}  // namespace segfuse::synth
