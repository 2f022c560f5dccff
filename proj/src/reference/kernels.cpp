#include "segfuse/reference.hpp"

#include <algorithm>
#include <cmath>

#include "segfuse/error.hpp"

namespace segfuse::reference {

LabelMap unify(const ProbMap& prob) {
  std::vector<std::uint16_t> out(prob.pixels());
  for (std::size_t p = 0; p < prob.pixels(); ++p) {
    const auto row = prob.pixel(p);
    out[p] = static_cast<std::uint16_t>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return LabelMap(prob.extent(), prob.classes(), std::move(out));
}

LabelMap pixel_fuse(std::span<const LabelMap> unified) {
  if (unified.empty()) throw ValidationError("pixel_fuse: empty ensemble");
  const std::size_t classes = unified.front().classes();
  std::vector<std::uint16_t> out(unified.front().pixels());
  for (std::size_t p = 0; p < out.size(); ++p) {
    std::vector<std::uint32_t> votes(classes, 0);
    for (const auto& m : unified) {
      if (m.extent() != unified.front().extent()) throw ValidationError("pixel_fuse: mismatch");
      if (m[p] == kUnlabeled) throw ValidationError("pixel_fuse: unlabeled input");
      ++votes[m[p]];
    }
    out[p] = static_cast<std::uint16_t>(std::max_element(votes.begin(), votes.end()) - votes.begin());
  }
  return LabelMap(unified.front().extent(), classes, std::move(out));
}

ChannelSets build_channel_sets(std::span<const LabelMap> unified, const FusionPolicy& policy) {
  if (unified.empty()) throw ValidationError("build_channel_sets: empty ensemble");
  const std::size_t classes = unified.front().classes();
  const std::size_t n = unified.front().pixels();
  std::vector<std::uint8_t> membership(classes * n, 0);
  for (std::size_t c = 0; c < classes; ++c) {
    if (policy[c] >= unified.size()) throw ValidationError("build_channel_sets: missing teacher");
    for (std::size_t p = 0; p < n; ++p) membership[c * n + p] = unified[policy[c]][p] == c;
  }
  return ChannelSets(unified.front().extent(), classes, std::move(membership));
}

std::vector<std::uint16_t> resolve_conflicts(const ChannelSets& sets, std::size_t kappa) {
  require_valid_kappa(kappa);
  const long h = static_cast<long>(sets.extent().height);
  const long w = static_cast<long>(sets.extent().width);
  const long half = static_cast<long>(kappa / 2);
  std::vector<std::uint16_t> out;
  for (std::size_t p : sets.overlap()) {
    const long y = static_cast<long>(p) / w, x = static_cast<long>(p) % w;
    std::size_t best = 0;
    long best_count = -1;
    for (std::size_t c = 0; c < sets.classes(); ++c) {
      if (!sets.contains(c, p)) continue;
      long count = 0;
      for (long yy = std::max(0L, y - half); yy <= std::min(h - 1, y + half); ++yy) {
        for (long xx = std::max(0L, x - half); xx <= std::min(w - 1, x + half); ++xx) {
          count += sets.contains(c, static_cast<std::size_t>(yy * w + xx));
        }
      }
      if (count > best_count) {
        best = c;
        best_count = count;
      }
    }
    out.push_back(static_cast<std::uint16_t>(best));
  }
  return out;
}

LabelMap channel_fuse(std::span<const LabelMap> unified, const FusionPolicy& policy,
                      std::size_t kappa) {
  const ChannelSets sets = reference::build_channel_sets(unified, policy);
  const auto resolved = reference::resolve_conflicts(sets, kappa);
  std::vector<std::uint16_t> out(sets.pixels(), kUnlabeled);
  for (std::size_t p = 0; p < sets.pixels(); ++p) {
    for (std::size_t c = 0; c < sets.classes() && sets.claims(p) == 1; ++c) {
      if (sets.contains(c, p)) out[p] = static_cast<std::uint16_t>(c);
    }
  }
  for (std::size_t i = 0; i < sets.overlap().size(); ++i) out[sets.overlap()[i]] = resolved[i];
  return LabelMap(sets.extent(), sets.classes(), std::move(out));
}

IoUReport per_class_iou(const LabelMap& pred, const LabelMap& gt) {
  const std::size_t classes = gt.classes();
  std::vector<std::uint64_t> inter(classes, 0), uni(classes, 0);
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t p = 0; p < gt.pixels(); ++p) {
      const bool a = pred[p] == c, b = gt[p] == c;
      inter[c] += a && b;
      uni[c] += a || b;
    }
  }
  std::vector<std::optional<double>> out(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    if (uni[c]) out[c] = static_cast<double>(inter[c]) / static_cast<double>(uni[c]);
  }
  return IoUReport(std::move(out));
}

ProbMap average_fuse(std::span<const ProbMap> teachers) {
  if (teachers.empty()) throw ValidationError("average_fuse: empty ensemble");
  std::vector<float> out(teachers.front().values().size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double s = 0.0;
    for (const auto& t : teachers) s += t.values()[i];
    out[i] = static_cast<float>(s * (1.0 / static_cast<double>(teachers.size())));
  }
  return ProbMap(teachers.front().extent(), teachers.front().classes(), std::move(out));
}

ProbMap student_forward(const ToyStudent& model, const FeatureMap& features) {
  const std::size_t classes = model.classes();
  std::vector<float> out(features.pixels() * classes);
  std::vector<double> z(classes);
  for (std::size_t p = 0; p < features.pixels(); ++p) {
    model.logits(features.pixel(p), z);
    const double hi = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double& v : z) {
      v = std::exp(v - hi);
      sum += v;
    }
    for (std::size_t c = 0; c < classes; ++c) out[p * classes + c] = static_cast<float>(z[c] / sum);
  }
  return ProbMap(features.extent(), classes, std::move(out));
}

LossAndGradient ce_objective(const ToyStudent& model, const PixelBatch& batch) {
  const std::size_t classes = model.classes(), dims = model.dims();
  LossAndGradient out;
  out.gradient.assign(model.parameter_count(), 0.0);
  std::vector<double> z(classes);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const std::span<const double> x(batch.features.data() + i * dims, dims);
    model.logits(x, z);
    const double hi = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - hi);
    const double lse = hi + std::log(sum);
    const std::size_t y = batch.labels[i];
    out.loss += std::min(lse - z[y], -std::log(kLogClamp));
    for (std::size_t c = 0; c < classes; ++c) {
      const double d = std::exp(z[c] - lse) - (c == y ? 1.0 : 0.0);
      for (std::size_t k = 0; k < dims; ++k) out.gradient[c * dims + k] += d * x[k];
      out.gradient[classes * dims + c] += d;
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  out.loss *= inv;
  for (double& g : out.gradient) g *= inv;
  return out;
}

}  // namespace segfuse::reference
