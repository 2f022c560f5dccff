#include "segfuse/unification.hpp"

#include <cstdint>

#include "segfuse/error.hpp"

namespace segfuse {

LabelMap unify(const ProbMap& prob) {
  const std::size_t classes = prob.classes();
  const std::size_t n = prob.pixels();
  const float* v = prob.values().data();
  std::vector<std::uint16_t> out(n);

#pragma omp parallel for schedule(static)
  for (std::size_t p = 0; p < n; ++p) {
    const float* row = v + p * classes;
    std::size_t best = 0;
    for (std::size_t c = 1; c < classes; ++c) {
      if (row[c] > row[best]) best = c;
    }
    out[p] = static_cast<std::uint16_t>(best);
  }
  return LabelMap(prob.extent(), classes, std::move(out));
}

ProbMap one_hot(const LabelMap& labels) {
  if (labels.has_unlabeled()) throw ValidationError("one_hot: map contains unlabeled pixels");
  const std::size_t classes = labels.classes();
  std::vector<float> out(labels.pixels() * classes, 0.0f);
  for (std::size_t p = 0; p < labels.pixels(); ++p) out[p * classes + labels[p]] = 1.0f;
  return ProbMap(labels.extent(), classes, std::move(out));
}

}  // namespace segfuse
