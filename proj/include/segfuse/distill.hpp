#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "segfuse/types.hpp"

namespace segfuse {

/// Lower clamp applied to probabilities before taking logs.
inline constexpr double kLogClamp = 1e-12;

/// Mean of the teachers' probability maps.
ProbMap average_fuse(std::span<const ProbMap> teachers);

/// -sum_p sum_c target(p,c) log student(p,c).
double loss_kl(const ProbMap& target, const ProbMap& student);

/// -sum_p log student(p, fused(p)); unlabeled pixels contribute exactly 0.
double loss_ce(const LabelMap& fused, const ProbMap& student);

/// Per-pixel multinomial logistic classifier: softmax(W x + b).
///
/// Parameters are stored flat: W row-major (|C| x d) followed by b (|C|).
class ToyStudent {
 public:
  ToyStudent(std::size_t classes, std::size_t dims);
  ToyStudent(std::size_t classes, std::size_t dims, std::vector<double> parameters);

  /// Gaussian-initialised weights with standard deviation `scale`; zero bias.
  static ToyStudent random(std::size_t classes, std::size_t dims, double scale, std::uint64_t seed);

  std::size_t classes() const noexcept { return classes_; }
  std::size_t dims() const noexcept { return dims_; }
  std::size_t parameter_count() const noexcept { return params_.size(); }

  std::span<const double> parameters() const noexcept { return params_; }
  std::span<double> mutable_parameters() noexcept { return params_; }
  double weight(std::size_t c, std::size_t k) const noexcept { return params_[c * dims_ + k]; }
  double bias(std::size_t c) const noexcept { return params_[classes_ * dims_ + c]; }

  /// Logits for one feature vector into `out` (size |C|).
  void logits(std::span<const double> x, std::span<double> out) const noexcept;

  friend bool operator==(const ToyStudent&, const ToyStudent&) = default;

 private:
  std::size_t classes_;
  std::size_t dims_;
  std::vector<double> params_;
};

ProbMap student_forward(const ToyStudent& model, const FeatureMap& features);

/// Labeled pixels gathered into a dense design matrix. Unlabeled pixels are dropped.
struct PixelBatch {
  std::size_t dims = 0;
  std::size_t classes = 0;
  std::vector<double> features;
  std::vector<std::uint16_t> labels;

  std::size_t size() const noexcept { return labels.size(); }
};

/// Pixels selected by `mask` (empty = all) whose label is not kUnlabeled.
PixelBatch gather_labeled(const FeatureMap& features, const LabelMap& labels,
                          std::span<const std::uint8_t> mask = {});

/// Soft-target counterpart of PixelBatch for the KL objective.
struct SoftBatch {
  std::size_t dims = 0;
  std::size_t classes = 0;
  std::vector<double> features;
  std::vector<double> targets;

  std::size_t size() const noexcept { return dims == 0 ? 0 : features.size() / dims; }
};

SoftBatch gather_soft(const FeatureMap& features, const ProbMap& targets,
                      std::span<const std::uint8_t> mask = {});

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> gradient;
};

/// Mean per-pixel cross-entropy and its gradient w.r.t. the flat parameters.
LossAndGradient ce_objective(const ToyStudent& model, const PixelBatch& batch);

/// Mean per-pixel soft-target cross-entropy (the KL-path loss) and its gradient.
LossAndGradient kl_objective(const ToyStudent& model, const SoftBatch& batch);

struct TrainConfig {
  double lr = 0.5;
  double lr_decay_power = 0.9;
  double weight_decay = 5e-4;
  double momentum = 0.9;
  std::size_t iterations = 300;
  std::uint64_t seed = 0;
  double init_scale = 0.01;
  /// Weight of the optional source-domain stream; used only when one is supplied.
  double source_mix = 0.5;
};

nlohmann::json config_to_json(const TrainConfig& config);
TrainConfig config_from_json(const nlohmann::json& j);

struct TrainResult {
  ToyStudent model;
  /// Objective before each update.
  std::vector<double> loss_trace;
};

/// SGD with momentum and polynomial learning-rate decay on the mean labeled-pixel
/// cross-entropy, optionally mixed with a labeled source stream.
TrainResult train_student(const PixelBatch& target, const TrainConfig& config,
                          const PixelBatch* source = nullptr);

TrainResult train_student(const FeatureMap& features, const LabelMap& labels,
                          const TrainConfig& config, std::span<const std::uint8_t> mask = {});

/// CSV "iter,loss".
std::string loss_trace_to_csv(std::span<const double> trace);

/// Measurement share of the training pixels: 500 of 2975 images.
inline constexpr double kDefaultMeasurementFraction = 500.0 / 2975.0;

/// Seeded pixel mask: 1 marks measurement pixels. Keeps at least one pixel on each side.
std::vector<std::uint8_t> measurement_split(std::size_t pixels, double fraction, std::uint64_t seed);

struct SelectionResult {
  CertaintyTable rho;
  FusionPolicy policy;
  /// Every student's output over all pixels, in teacher order.
  std::vector<ProbMap> students;
  std::vector<std::uint8_t> measurement_mask;
  std::vector<std::size_t> fallback_classes;
};

/// For each teacher: unify, train a fresh identically-seeded student on the training
/// split, measure rho on the held-out split. Then pick pi by maximum certainty.
SelectionResult certainty_selection_protocol(const Ensemble& ensemble, const FeatureMap& features,
                                             double measurement_fraction, const TrainConfig& config);

}  // namespace segfuse
