#include "segfuse/distill.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "segfuse/error.hpp"
#include "segfuse/io.hpp"
#include "segfuse/metrics.hpp"
#include "segfuse/parallel.hpp"
#include "segfuse/policy.hpp"
#include "segfuse/random.hpp"
#include "segfuse/unification.hpp"

namespace segfuse {

namespace {

void require_same_shape(const ProbMap& a, const ProbMap& b, const char* what) {
  if (a.extent() != b.extent() || a.classes() != b.classes()) {
    throw ValidationError(std::string(what) + ": dimension mismatch");
  }
}

/// Softmax of logits in place; returns log-sum-exp.
double softmax_inplace(std::span<double> z) {
  const double hi = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - hi);
    sum += v;
  }
  for (double& v : z) v /= sum;
  return hi + std::log(sum);
}

// Blocked objective evaluation. Each block of kReductionBlock pixels owns a private
// partial (loss, gradient); partials are summed in block order afterwards, so the
// result is independent of how blocks were scheduled across threads.
template <typename PixelTerm>
LossAndGradient blocked_objective(const ToyStudent& model, std::size_t n, const double* features,
                                  PixelTerm term) {
  const std::size_t classes = model.classes();
  const std::size_t dims = model.dims();
  const std::size_t np = model.parameter_count();
  const std::size_t block = parallel::kReductionBlock;
  const std::size_t blocks = (n + block - 1) / block;
  std::vector<double> partial_loss(blocks, 0.0);
  std::vector<double> partial_grad(blocks * np, 0.0);

#pragma omp parallel
  {
    std::vector<double> z(classes), dz(classes);
#pragma omp for schedule(static)
    for (std::size_t b = 0; b < blocks; ++b) {
      double* g = partial_grad.data() + b * np;
      double loss = 0.0;
      const std::size_t end = std::min(n, (b + 1) * block);
      for (std::size_t i = b * block; i < end; ++i) {
        const std::span<const double> x(features + i * dims, dims);
        model.logits(x, z);
        const double lse = softmax_inplace(z);
        loss += term(i, z, lse, dz);
        for (std::size_t c = 0; c < classes; ++c) {
          double* gw = g + c * dims;
          for (std::size_t k = 0; k < dims; ++k) gw[k] += dz[c] * x[k];
          g[classes * dims + c] += dz[c];
        }
      }
      partial_loss[b] = loss;
    }
  }

  LossAndGradient out;
  out.gradient.assign(np, 0.0);
  for (std::size_t b = 0; b < blocks; ++b) {
    out.loss += partial_loss[b];
    const double* g = partial_grad.data() + b * np;
    for (std::size_t j = 0; j < np; ++j) out.gradient[j] += g[j];
  }
  const double inv = 1.0 / static_cast<double>(n);
  out.loss *= inv;
  for (double& g : out.gradient) g *= inv;
  return out;
}

void require_batch(const ToyStudent& model, std::size_t dims, std::size_t classes, std::size_t n,
                   const char* what) {
  if (dims != model.dims() || classes != model.classes()) {
    throw ValidationError(std::string(what) + ": batch does not match model dimensions");
  }
  if (n == 0) throw ValidationError(std::string(what) + ": empty batch");
}

}  // namespace

ProbMap average_fuse(std::span<const ProbMap> teachers) {
  if (teachers.empty()) throw ValidationError("average_fuse: empty ensemble");
  for (const auto& t : teachers) require_same_shape(t, teachers.front(), "average_fuse");
  const std::size_t size = teachers.front().values().size();
  const double inv = 1.0 / static_cast<double>(teachers.size());
  std::vector<float> out(size);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < size; ++i) {
    double s = 0.0;
    for (const auto& t : teachers) s += t.values()[i];
    out[i] = static_cast<float>(s * inv);
  }
  return ProbMap(teachers.front().extent(), teachers.front().classes(), std::move(out));
}

double loss_kl(const ProbMap& target, const ProbMap& student) {
  require_same_shape(target, student, "loss_kl");
  double total = 0.0;
  const auto t = target.values();
  const auto r = student.values();
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] == 0.0f) continue;
    total -= static_cast<double>(t[i]) * std::log(std::max<double>(r[i], kLogClamp));
  }
  return total;
}

double loss_ce(const LabelMap& fused, const ProbMap& student) {
  if (fused.extent() != student.extent() || fused.classes() != student.classes()) {
    throw ValidationError("loss_ce: dimension mismatch");
  }
  double total = 0.0;
  for (std::size_t p = 0; p < fused.pixels(); ++p) {
    if (fused[p] == kUnlabeled) continue;
    total -= std::log(std::max<double>(student.at(p, fused[p]), kLogClamp));
  }
  return total;
}

ToyStudent::ToyStudent(std::size_t classes, std::size_t dims)
    : ToyStudent(classes, dims, std::vector<double>(classes * dims + classes, 0.0)) {}

ToyStudent::ToyStudent(std::size_t classes, std::size_t dims, std::vector<double> parameters)
    : classes_(classes), dims_(dims), params_(std::move(parameters)) {
  (void)ClassSet{classes_};
  if (dims_ == 0) throw ValidationError("student: feature dimension must be positive");
  if (params_.size() != classes_ * dims_ + classes_) {
    throw ValidationError("student: parameter count does not match |C|*d + |C|");
  }
  for (double v : params_) {
    if (!std::isfinite(v)) throw ValidationError("student: non-finite parameter");
  }
}

ToyStudent ToyStudent::random(std::size_t classes, std::size_t dims, double scale,
                              std::uint64_t seed) {
  ToyStudent s(classes, dims);
  Rng rng(seed);
  for (std::size_t i = 0; i < classes * dims; ++i) s.params_[i] = scale * rng.normal();
  return s;
}

void ToyStudent::logits(std::span<const double> x, std::span<double> out) const noexcept {
  const double* w = params_.data();
  const double* b = params_.data() + classes_ * dims_;
  for (std::size_t c = 0; c < classes_; ++c) {
    double z = b[c];
    const double* row = w + c * dims_;
    for (std::size_t k = 0; k < dims_; ++k) z += row[k] * x[k];
    out[c] = z;
  }
}

ProbMap student_forward(const ToyStudent& model, const FeatureMap& features) {
  if (features.dims() != model.dims()) {
    throw ValidationError("student_forward: feature dimension does not match model");
  }
  const std::size_t classes = model.classes();
  const std::size_t n = features.pixels();
  std::vector<float> out(n * classes);
#pragma omp parallel
  {
    std::vector<double> z(classes);
#pragma omp for schedule(static)
    for (std::size_t p = 0; p < n; ++p) {
      model.logits(features.pixel(p), z);
      softmax_inplace(z);
      for (std::size_t c = 0; c < classes; ++c) out[p * classes + c] = static_cast<float>(z[c]);
    }
  }
  return ProbMap(features.extent(), classes, std::move(out));
}

PixelBatch gather_labeled(const FeatureMap& features, const LabelMap& labels,
                          std::span<const std::uint8_t> mask) {
  if (features.extent() != labels.extent()) {
    throw ValidationError("gather_labeled: features and labels differ in extent");
  }
  if (!mask.empty() && mask.size() != labels.pixels()) {
    throw ValidationError("gather_labeled: mask size mismatch");
  }
  PixelBatch batch;
  batch.dims = features.dims();
  batch.classes = labels.classes();
  for (std::size_t p = 0; p < labels.pixels(); ++p) {
    if ((!mask.empty() && !mask[p]) || labels[p] == kUnlabeled) continue;
    const auto x = features.pixel(p);
    batch.features.insert(batch.features.end(), x.begin(), x.end());
    batch.labels.push_back(labels[p]);
  }
  return batch;
}

SoftBatch gather_soft(const FeatureMap& features, const ProbMap& targets,
                      std::span<const std::uint8_t> mask) {
  if (features.extent() != targets.extent()) {
    throw ValidationError("gather_soft: features and targets differ in extent");
  }
  if (!mask.empty() && mask.size() != targets.pixels()) {
    throw ValidationError("gather_soft: mask size mismatch");
  }
  SoftBatch batch;
  batch.dims = features.dims();
  batch.classes = targets.classes();
  for (std::size_t p = 0; p < targets.pixels(); ++p) {
    if (!mask.empty() && !mask[p]) continue;
    const auto x = features.pixel(p);
    batch.features.insert(batch.features.end(), x.begin(), x.end());
    for (float v : targets.pixel(p)) batch.targets.push_back(v);
  }
  return batch;
}

LossAndGradient ce_objective(const ToyStudent& model, const PixelBatch& batch) {
  require_batch(model, batch.dims, batch.classes, batch.size(), "ce_objective");
  const auto* labels = batch.labels.data();
  return blocked_objective(model, batch.size(), batch.features.data(),
                           [labels](std::size_t i, std::span<const double> r, double,
                                    std::span<double> dz) {
                             const std::size_t y = labels[i];
                             for (std::size_t c = 0; c < r.size(); ++c) dz[c] = r[c];
                             dz[y] -= 1.0;
                             return -std::log(std::max(r[y], kLogClamp));
                           });
}

LossAndGradient kl_objective(const ToyStudent& model, const SoftBatch& batch) {
  require_batch(model, batch.dims, batch.classes, batch.size(), "kl_objective");
  if (batch.targets.size() != batch.size() * batch.classes) {
    throw ValidationError("kl_objective: target size mismatch");
  }
  const double* targets = batch.targets.data();
  const std::size_t classes = batch.classes;
  return blocked_objective(model, batch.size(), batch.features.data(),
                           [targets, classes](std::size_t i, std::span<const double> r, double,
                                              std::span<double> dz) {
                             const double* s = targets + i * classes;
                             double mass = 0.0, loss = 0.0;
                             for (std::size_t c = 0; c < classes; ++c) mass += s[c];
                             for (std::size_t c = 0; c < classes; ++c) {
                               dz[c] = mass * r[c] - s[c];
                               if (s[c] != 0.0) loss -= s[c] * std::log(std::max(r[c], kLogClamp));
                             }
                             return loss;
                           });
}

nlohmann::json config_to_json(const TrainConfig& config) {
  return {{"lr", config.lr},
          {"lr_decay_power", config.lr_decay_power},
          {"weight_decay", config.weight_decay},
          {"momentum", config.momentum},
          {"iterations", config.iterations},
          {"seed", config.seed},
          {"init_scale", config.init_scale},
          {"source_mix", config.source_mix}};
}

TrainConfig config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  try {
    c.lr = j.value("lr", c.lr);
    c.lr_decay_power = j.value("lr_decay_power", c.lr_decay_power);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.momentum = j.value("momentum", c.momentum);
    c.iterations = j.value("iterations", c.iterations);
    c.seed = j.value("seed", c.seed);
    c.init_scale = j.value("init_scale", c.init_scale);
    c.source_mix = j.value("source_mix", c.source_mix);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("train config json: ") + e.what());
  }
  if (!(c.lr >= 0.0) || !(c.momentum >= 0.0 && c.momentum < 1.0) || !(c.weight_decay >= 0.0) ||
      !(c.lr_decay_power >= 0.0) || !(c.init_scale >= 0.0) || !(c.source_mix >= 0.0)) {
    throw ValidationError("train config: hyperparameter out of range");
  }
  return c;
}

TrainResult train_student(const PixelBatch& target, const TrainConfig& config,
                          const PixelBatch* source) {
  if (target.size() == 0) throw ValidationError("train_student: no labeled pixels");
  if (source && (source->dims != target.dims || source->classes != target.classes)) {
    throw ValidationError("train_student: source stream dimensions differ from target");
  }
  if (source && source->size() == 0) source = nullptr;

  TrainResult result{ToyStudent::random(target.classes, target.dims, config.init_scale, config.seed),
                     {}};
  ToyStudent& model = result.model;
  result.loss_trace.reserve(config.iterations);
  std::vector<double> velocity(model.parameter_count(), 0.0);
  const auto iters = static_cast<double>(config.iterations);

  for (std::size_t it = 0; it < config.iterations; ++it) {
    LossAndGradient lg = ce_objective(model, target);
    if (source) {
      const LossAndGradient src = ce_objective(model, *source);
      lg.loss += config.source_mix * src.loss;
      for (std::size_t j = 0; j < lg.gradient.size(); ++j) {
        lg.gradient[j] += config.source_mix * src.gradient[j];
      }
    }
    result.loss_trace.push_back(lg.loss);
    const double lr =
        config.lr * std::pow(1.0 - static_cast<double>(it) / iters, config.lr_decay_power);
    auto params = model.mutable_parameters();
    for (std::size_t j = 0; j < params.size(); ++j) {
      velocity[j] = config.momentum * velocity[j] + lg.gradient[j] + config.weight_decay * params[j];
      params[j] -= lr * velocity[j];
    }
  }
  for (double v : model.parameters()) {
    if (!std::isfinite(v)) throw Error("train_student: diverged (non-finite parameters)");
  }
  return result;
}

TrainResult train_student(const FeatureMap& features, const LabelMap& labels,
                          const TrainConfig& config, std::span<const std::uint8_t> mask) {
  return train_student(gather_labeled(features, labels, mask), config);
}

std::string loss_trace_to_csv(std::span<const double> trace) {
  std::string out = "iter,loss\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out += std::to_string(i) + "," + io::format_double(trace[i]) + "\n";
  }
  return out;
}

std::vector<std::uint8_t> measurement_split(std::size_t pixels, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ValidationError("measurement split fraction must lie in (0, 1)");
  }
  if (pixels < 2) throw ValidationError("measurement split needs at least 2 pixels");
  auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(pixels)));
  take = std::clamp<std::size_t>(take, 1, pixels - 1);
  std::vector<std::size_t> order(pixels);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed ^ 0x6d656173ULL);
  for (std::size_t i = 0; i < take; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.uniform_index(pixels - i));
    std::swap(order[i], order[j]);
  }
  std::vector<std::uint8_t> mask(pixels, 0);
  for (std::size_t i = 0; i < take; ++i) mask[order[i]] = 1;
  return mask;
}

SelectionResult certainty_selection_protocol(const Ensemble& ensemble, const FeatureMap& features,
                                             double measurement_fraction, const TrainConfig& config) {
  if (features.extent() != ensemble.extent()) {
    throw ValidationError("selection protocol: features and ensemble differ in extent");
  }
  auto mask = measurement_split(features.pixels(), measurement_fraction, config.seed);
  std::vector<std::uint8_t> train_mask(mask.size());
  for (std::size_t p = 0; p < mask.size(); ++p) train_mask[p] = !mask[p];

  std::vector<ProbMap> students;
  students.reserve(ensemble.size());
  for (const auto& teacher : ensemble.teachers()) {
    const LabelMap pseudo = unify(teacher);
    const TrainResult trained = train_student(features, pseudo, config, train_mask);
    students.push_back(student_forward(trained.model, features));
  }
  CertaintyTable rho = certainty_table(students, mask);
  std::vector<std::size_t> fallback;
  FusionPolicy policy = select_certainty(rho, &fallback);
  return SelectionResult{std::move(rho), std::move(policy), std::move(students), std::move(mask),
                         std::move(fallback)};
}

}  // namespace segfuse
