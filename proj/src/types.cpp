#include "segfuse/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "segfuse/error.hpp"

namespace segfuse {

namespace {

void require_extent(Extent extent, const char* what) {
  if (extent.height == 0 || extent.width == 0) {
    throw ValidationError(std::string(what) + ": height and width must be positive");
  }
  if (extent.height > std::numeric_limits<std::size_t>::max() / extent.width) {
    throw ValidationError(std::string(what) + ": dimension overflow");
  }
}

std::size_t checked_volume(Extent extent, std::size_t inner, const char* what) {
  const std::size_t px = extent.pixels();
  if (inner != 0 && px > std::numeric_limits<std::size_t>::max() / inner) {
    throw ValidationError(std::string(what) + ": dimension overflow");
  }
  return px * inner;
}

}  // namespace

ClassSet::ClassSet(std::size_t count) : count_(count) {
  if (count < 2) throw ValidationError("class set needs at least 2 classes");
  if (count > kUnlabeled) throw ValidationError("class count collides with the unlabeled id");
}

ProbMap::ProbMap(Extent extent, std::size_t classes, std::vector<float> values)
    : extent_(extent), classes_(classes), values_(std::move(values)) {
  require_extent(extent_, "probmap");
  (void)ClassSet{classes_};
  if (values_.size() != checked_volume(extent_, classes_, "probmap")) {
    throw ValidationError("probmap: value count does not match H*W*|C|");
  }
  for (std::size_t p = 0; p < extent_.pixels(); ++p) {
    double sum = 0.0;
    for (float v : pixel(p)) {
      if (!(v >= 0.0f && v <= 1.0f)) {
        throw ValidationError("probmap: value outside [0,1] at pixel " + std::to_string(p));
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kProbabilityTolerance) {
      throw ValidationError("probmap: pixel " + std::to_string(p) + " sums to " +
                            std::to_string(sum));
    }
  }
}

ProbMap ProbMap::from_logits(Extent extent, std::size_t classes, std::span<const float> logits,
                             double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ValidationError("softmax temperature must be positive and finite");
  }
  require_extent(extent, "logits");
  if (logits.size() != checked_volume(extent, classes, "logits")) {
    throw ValidationError("logits: value count does not match H*W*|C|");
  }
  std::vector<float> out(logits.size());
  std::vector<double> scratch(classes);
  for (std::size_t p = 0; p < extent.pixels(); ++p) {
    const auto row = logits.subspan(p * classes, classes);
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < classes; ++c) {
      if (!std::isfinite(row[c])) throw ValidationError("logits: non-finite value");
      scratch[c] = static_cast<double>(row[c]) / temperature;
      hi = std::max(hi, scratch[c]);
    }
    double z = 0.0;
    for (double& s : scratch) {
      s = std::exp(s - hi);
      z += s;
    }
    for (std::size_t c = 0; c < classes; ++c) {
      out[p * classes + c] = static_cast<float>(scratch[c] / z);
    }
  }
  return ProbMap(extent, classes, std::move(out));
}

LabelMap::LabelMap(Extent extent, std::size_t classes, std::vector<std::uint16_t> values)
    : extent_(extent), classes_(classes), values_(std::move(values)) {
  require_extent(extent_, "labelmap");
  const ClassSet set{classes_};
  if (values_.size() != extent_.pixels()) {
    throw ValidationError("labelmap: value count does not match H*W");
  }
  for (std::size_t p = 0; p < values_.size(); ++p) {
    if (!set.is_label(values_[p])) {
      throw ValidationError("labelmap: invalid class id " + std::to_string(values_[p]) +
                            " at pixel " + std::to_string(p));
    }
  }
}

bool LabelMap::has_unlabeled() const noexcept {
  for (auto v : values_) {
    if (v == kUnlabeled) return true;
  }
  return false;
}

FusionPolicy::FusionPolicy(std::size_t teachers, std::vector<std::size_t> assignment)
    : teachers_(teachers), assignment_(std::move(assignment)) {
  if (teachers_ == 0) throw ValidationError("policy: ensemble must be nonempty");
  (void)ClassSet{assignment_.size()};
  for (std::size_t c = 0; c < assignment_.size(); ++c) {
    if (assignment_[c] >= teachers_) {
      throw ValidationError("policy: class " + std::to_string(c) + " references teacher " +
                            std::to_string(assignment_[c]) + " outside the ensemble");
    }
  }
}

IoUReport::IoUReport(std::vector<std::optional<double>> per_class)
    : per_class_(std::move(per_class)) {
  double sum = 0.0;
  std::size_t defined = 0;
  for (const auto& v : per_class_) {
    if (!v) continue;
    if (!(*v >= 0.0 && *v <= 1.0)) throw ValidationError("iou report: value outside [0,1]");
    sum += *v;
    ++defined;
  }
  if (defined > 0) miou_ = sum / static_cast<double>(defined);
}

CertaintyTable::CertaintyTable(std::size_t classes, std::size_t teachers,
                               std::vector<std::optional<double>> rho)
    : classes_(classes), teachers_(teachers), rho_(std::move(rho)) {
  if (classes_ == 0 || teachers_ == 0) throw ValidationError("certainty table: empty");
  if (rho_.size() != classes_ * teachers_) {
    throw ValidationError("certainty table: cell count does not match |C|*|T|");
  }
  for (const auto& v : rho_) {
    if (v && !(*v >= 0.0 && *v <= 1.0)) {
      throw ValidationError("certainty table: value outside [0,1]");
    }
  }
}

CertaintyTable CertaintyTable::select_teachers(std::span<const std::size_t> columns) const {
  std::vector<std::optional<double>> out;
  out.reserve(classes_ * columns.size());
  for (std::size_t c = 0; c < classes_; ++c) {
    for (std::size_t t : columns) {
      if (t >= teachers_) throw ValidationError("certainty table: teacher column out of range");
      out.push_back(at(c, t));
    }
  }
  return CertaintyTable(classes_, columns.size(), std::move(out));
}

Ensemble::Ensemble(std::vector<ProbMap> teachers) : teachers_(std::move(teachers)) {
  if (teachers_.empty()) throw ValidationError("ensemble: no teachers");
  for (const auto& t : teachers_) {
    if (t.extent() != teachers_.front().extent() || t.classes() != teachers_.front().classes()) {
      throw ValidationError("ensemble: teachers disagree on (H, W, |C|)");
    }
  }
}

void Ensemble::append(ProbMap teacher) {
  if (teacher.extent() != extent() || teacher.classes() != classes()) {
    throw ValidationError("ensemble: appended teacher disagrees on (H, W, |C|)");
  }
  teachers_.push_back(std::move(teacher));
}

FeatureMap::FeatureMap(Extent extent, std::size_t dims, std::vector<double> values)
    : extent_(extent), dims_(dims), values_(std::move(values)) {
  require_extent(extent_, "featuremap");
  if (dims_ == 0) throw ValidationError("featuremap: feature dimension must be positive");
  if (values_.size() != checked_volume(extent_, dims_, "featuremap")) {
    throw ValidationError("featuremap: value count does not match H*W*d");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw ValidationError("featuremap: non-finite value");
  }
}

}  // namespace segfuse
