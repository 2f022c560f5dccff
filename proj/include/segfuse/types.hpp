#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace segfuse {

/// Reserved id for the unlabeled symbol. Fixed in serialized form.
inline constexpr std::uint16_t kUnlabeled = 65535;

/// Absolute tolerance on per-pixel probability sums.
inline constexpr double kProbabilityTolerance = 1e-4;

class ClassSet {
 public:
  explicit ClassSet(std::size_t count);

  std::size_t count() const noexcept { return count_; }
  static constexpr std::uint16_t unlabeled_id = kUnlabeled;

  bool is_class(std::uint16_t id) const noexcept { return id < count_; }
  bool is_label(std::uint16_t id) const noexcept { return id < count_ || id == kUnlabeled; }

 private:
  std::size_t count_;
};

/// Spatial extent shared by every per-pixel container.
struct Extent {
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t pixels() const noexcept { return height * width; }
  friend bool operator==(const Extent&, const Extent&) = default;
};

/// H x W x |C| probability tensor, pixel-major with class fastest.
class ProbMap {
 public:
  /// Validates the probability invariant; throws ValidationError.
  ProbMap(Extent extent, std::size_t classes, std::vector<float> values);

  /// Per-pixel softmax of raw logits divided by temperature.
  static ProbMap from_logits(Extent extent, std::size_t classes, std::span<const float> logits,
                             double temperature = 1.0);

  Extent extent() const noexcept { return extent_; }
  std::size_t height() const noexcept { return extent_.height; }
  std::size_t width() const noexcept { return extent_.width; }
  std::size_t pixels() const noexcept { return extent_.pixels(); }
  std::size_t classes() const noexcept { return classes_; }

  std::span<const float> values() const noexcept { return values_; }
  std::span<const float> pixel(std::size_t p) const noexcept {
    return std::span<const float>(values_).subspan(p * classes_, classes_);
  }
  float at(std::size_t p, std::size_t c) const noexcept { return values_[p * classes_ + c]; }

  friend bool operator==(const ProbMap&, const ProbMap&) = default;

 private:
  Extent extent_;
  std::size_t classes_;
  std::vector<float> values_;
};

/// H x W map of class ids; kUnlabeled marks the unlabeled symbol.
class LabelMap {
 public:
  LabelMap(Extent extent, std::size_t classes, std::vector<std::uint16_t> values);

  Extent extent() const noexcept { return extent_; }
  std::size_t height() const noexcept { return extent_.height; }
  std::size_t width() const noexcept { return extent_.width; }
  std::size_t pixels() const noexcept { return extent_.pixels(); }
  std::size_t classes() const noexcept { return classes_; }

  std::span<const std::uint16_t> values() const noexcept { return values_; }
  std::uint16_t operator[](std::size_t p) const noexcept { return values_[p]; }
  std::uint16_t at(std::size_t y, std::size_t x) const noexcept {
    return values_[y * extent_.width + x];
  }
  bool has_unlabeled() const noexcept;

  friend bool operator==(const LabelMap&, const LabelMap&) = default;

 private:
  Extent extent_;
  std::size_t classes_;
  std::vector<std::uint16_t> values_;
};

/// Total mapping from class id to the teacher supplying that channel.
class FusionPolicy {
 public:
  FusionPolicy(std::size_t teachers, std::vector<std::size_t> assignment);

  static FusionPolicy identity_for_single_teacher(std::size_t classes) {
    return FusionPolicy(1, std::vector<std::size_t>(classes, 0));
  }

  std::size_t classes() const noexcept { return assignment_.size(); }
  std::size_t teachers() const noexcept { return teachers_; }
  std::size_t operator[](std::size_t c) const noexcept { return assignment_[c]; }
  std::span<const std::size_t> assignment() const noexcept { return assignment_; }

  friend bool operator==(const FusionPolicy&, const FusionPolicy&) = default;

 private:
  std::size_t teachers_;
  std::vector<std::size_t> assignment_;
};

/// Per-class IoU; classes with empty union are undefined and excluded from mIoU.
class IoUReport {
 public:
  explicit IoUReport(std::vector<std::optional<double>> per_class);

  std::size_t classes() const noexcept { return per_class_.size(); }
  const std::vector<std::optional<double>>& per_class() const noexcept { return per_class_; }
  const std::optional<double>& operator[](std::size_t c) const noexcept { return per_class_[c]; }
  std::optional<double> miou() const noexcept { return miou_; }

  friend bool operator==(const IoUReport&, const IoUReport&) = default;

 private:
  std::vector<std::optional<double>> per_class_;
  std::optional<double> miou_;
};

/// rho(c, t): mean student certainty per class and teacher.
class CertaintyTable {
 public:
  CertaintyTable(std::size_t classes, std::size_t teachers, std::vector<std::optional<double>> rho);

  std::size_t classes() const noexcept { return classes_; }
  std::size_t teachers() const noexcept { return teachers_; }
  const std::optional<double>& at(std::size_t c, std::size_t t) const noexcept {
    return rho_[c * teachers_ + t];
  }
  const std::vector<std::optional<double>>& cells() const noexcept { return rho_; }

  /// Keep only the listed teacher columns, in the given order.
  CertaintyTable select_teachers(std::span<const std::size_t> columns) const;

  friend bool operator==(const CertaintyTable&, const CertaintyTable&) = default;

 private:
  std::size_t classes_;
  std::size_t teachers_;
  std::vector<std::optional<double>> rho_;
};

/// Ordered teacher outputs sharing identical (H, W, |C|).
class Ensemble {
 public:
  explicit Ensemble(std::vector<ProbMap> teachers);

  std::size_t size() const noexcept { return teachers_.size(); }
  const ProbMap& operator[](std::size_t t) const noexcept { return teachers_[t]; }
  const std::vector<ProbMap>& teachers() const noexcept { return teachers_; }
  Extent extent() const noexcept { return teachers_.front().extent(); }
  std::size_t classes() const noexcept { return teachers_.front().classes(); }

  void append(ProbMap teacher);

 private:
  std::vector<ProbMap> teachers_;
};

/// Per-pixel real-valued feature vectors, pixel-major.
class FeatureMap {
 public:
  FeatureMap(Extent extent, std::size_t dims, std::vector<double> values);

  Extent extent() const noexcept { return extent_; }
  std::size_t pixels() const noexcept { return extent_.pixels(); }
  std::size_t dims() const noexcept { return dims_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> pixel(std::size_t p) const noexcept {
    return std::span<const double>(values_).subspan(p * dims_, dims_);
  }

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

 private:
  Extent extent_;
  std::size_t dims_;
  std::vector<double> values_;
};

}  // namespace segfuse
