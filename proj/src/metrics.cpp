#include "segfuse/metrics.hpp"

#include <cmath>

#include "segfuse/error.hpp"
#include "segfuse/io.hpp"

namespace segfuse {

namespace {

void require_same_extent(const LabelMap& pred, const LabelMap& gt) {
  if (pred.extent() != gt.extent()) throw ValidationError("metrics: dimension mismatch");
  if (pred.classes() != gt.classes()) throw ValidationError("metrics: class count mismatch");
}

}  // namespace

IoUReport per_class_iou(const LabelMap& pred, const LabelMap& gt) {
  require_same_extent(pred, gt);
  if (gt.has_unlabeled()) throw ValidationError("per_class_iou: ground truth contains unlabeled");
  const std::size_t classes = gt.classes();
  const std::size_t n = gt.pixels();
  std::vector<std::uint64_t> inter(classes, 0), pred_n(classes, 0), gt_n(classes, 0);
  std::uint64_t* ip = inter.data();
  std::uint64_t* pp = pred_n.data();
  std::uint64_t* gp = gt_n.data();
  const auto pv = pred.values();
  const auto gv = gt.values();

#pragma omp parallel for schedule(static) reduction(+ : ip[:classes], pp[:classes], gp[:classes])
  for (std::size_t p = 0; p < n; ++p) {
    const auto g = gv[p];
    const auto r = pv[p];
    ++gp[g];
    if (r == kUnlabeled) continue;
    ++pp[r];
    if (r == g) ++ip[g];
  }

  std::vector<std::optional<double>> per_class(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    const std::uint64_t uni = pred_n[c] + gt_n[c] - inter[c];
    if (uni > 0) per_class[c] = static_cast<double>(inter[c]) / static_cast<double>(uni);
  }
  return IoUReport(std::move(per_class));
}

double pixel_accuracy(const LabelMap& pred, const LabelMap& gt) {
  require_same_extent(pred, gt);
  std::size_t hits = 0;
  for (std::size_t p = 0; p < gt.pixels(); ++p) hits += pred[p] == gt[p];
  return static_cast<double>(hits) / static_cast<double>(gt.pixels());
}

CertaintyTable certainty_table(std::span<const ProbMap> students,
                               std::span<const std::uint8_t> measurement_mask) {
  if (students.empty()) throw ValidationError("certainty_table: no students");
  const auto extent = students.front().extent();
  const std::size_t classes = students.front().classes();
  for (const auto& s : students) {
    if (s.extent() != extent || s.classes() != classes) {
      throw ValidationError("certainty_table: inconsistent student dimensions");
    }
  }
  const std::size_t n = extent.pixels();
  if (!measurement_mask.empty() && measurement_mask.size() != n) {
    throw ValidationError("certainty_table: measurement mask size mismatch");
  }
  std::size_t measured = 0;
  for (std::size_t p = 0; p < n; ++p) measured += measurement_mask.empty() || measurement_mask[p];
  if (measured == 0) throw ValidationError("certainty_table: empty measurement set");

  const std::size_t teachers = students.size();
  std::vector<std::optional<double>> rho(classes * teachers);
  // One student per iteration; each sums in pixel order so results are bitwise stable.
#pragma omp parallel for schedule(static)
  for (std::size_t t = 0; t < teachers; ++t) {
    std::vector<double> sum(classes, 0.0);
    std::vector<std::size_t> count(classes, 0);
    const ProbMap& s = students[t];
    for (std::size_t p = 0; p < n; ++p) {
      if (!measurement_mask.empty() && !measurement_mask[p]) continue;
      const auto row = s.pixel(p);
      std::size_t best = 0;
      for (std::size_t c = 1; c < classes; ++c) {
        if (row[c] > row[best]) best = c;
      }
      sum[best] += row[best];
      ++count[best];
    }
    for (std::size_t c = 0; c < classes; ++c) {
      if (count[c] > 0) {
        rho[c * teachers + t] = std::min(1.0, sum[c] / static_cast<double>(count[c]));
      }
    }
  }
  return CertaintyTable(classes, teachers, std::move(rho));
}

std::vector<std::optional<double>> certainty_iou_cosine(const CertaintyTable& rho,
                                                        std::span<const IoUReport> phis) {
  if (phis.size() != rho.teachers()) {
    throw ValidationError("certainty_iou_cosine: need one IoU report per teacher");
  }
  for (const auto& r : phis) {
    if (r.classes() != rho.classes()) {
      throw ValidationError("certainty_iou_cosine: class count mismatch");
    }
  }
  std::vector<std::optional<double>> out(rho.classes());
  for (std::size_t c = 0; c < rho.classes(); ++c) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t t = 0; t < rho.teachers(); ++t) {
      const double a = rho.at(c, t).value_or(0.0);
      const double b = phis[t][c].value_or(0.0);
      dot += a * b;
      na += a * a;
      nb += b * b;
    }
    if (na > 0.0 && nb > 0.0) out[c] = dot / (std::sqrt(na) * std::sqrt(nb));
  }
  return out;
}

std::vector<std::uint64_t> certainty_histogram(const ProbMap& prob, std::size_t bins) {
  if (bins == 0) throw ValidationError("certainty_histogram: bins must be >= 1");
  std::vector<std::uint64_t> counts(bins, 0);
  for (std::size_t p = 0; p < prob.pixels(); ++p) {
    float hi = 0.0f;
    for (float v : prob.pixel(p)) hi = std::max(hi, v);
    auto b = static_cast<std::size_t>(static_cast<double>(hi) * static_cast<double>(bins));
    ++counts[std::min(b, bins - 1)];
  }
  return counts;
}

std::string histogram_to_csv(std::span<const std::uint64_t> counts) {
  std::string out = "bin_low,bin_high,count\n";
  const double width = 1.0 / static_cast<double>(counts.size());
  for (std::size_t b = 0; b < counts.size(); ++b) {
    out += io::format_double(static_cast<double>(b) * width) + "," +
           io::format_double(b + 1 == counts.size() ? 1.0 : static_cast<double>(b + 1) * width) +
           "," + std::to_string(counts[b]) + "\n";
  }
  return out;
}

}  // namespace segfuse
