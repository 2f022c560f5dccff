#include "segfuse/policy.hpp"

#include "segfuse/error.hpp"
#include "segfuse/random.hpp"

namespace segfuse {

FusionPolicy select_random(std::size_t classes, std::size_t teachers, std::uint64_t seed) {
  if (classes == 0 || teachers == 0) throw ValidationError("select_random: counts must be >= 1");
  Rng rng(seed);
  std::vector<std::size_t> assignment(classes);
  for (auto& t : assignment) t = static_cast<std::size_t>(rng.uniform_index(teachers));
  return FusionPolicy(teachers, std::move(assignment));
}

FusionPolicy select_certainty(const CertaintyTable& rho, std::vector<std::size_t>* fallback_classes) {
  std::vector<std::size_t> assignment(rho.classes(), 0);
  for (std::size_t c = 0; c < rho.classes(); ++c) {
    bool found = false;
    double best = 0.0;
    for (std::size_t t = 0; t < rho.teachers(); ++t) {
      const auto& v = rho.at(c, t);
      if (v && (!found || *v > best)) {
        best = *v;
        assignment[c] = t;
        found = true;
      }
    }
    if (!found && fallback_classes) fallback_classes->push_back(c);
  }
  return FusionPolicy(rho.teachers(), std::move(assignment));
}

FusionPolicy select_oracle(std::span<const IoUReport> phis, std::vector<std::size_t>* fallback_classes) {
  if (phis.empty()) throw ValidationError("select_oracle: no teachers");
  const std::size_t classes = phis.front().classes();
  std::vector<std::optional<double>> cells(classes * phis.size());
  for (std::size_t t = 0; t < phis.size(); ++t) {
    if (phis[t].classes() != classes) throw ValidationError("select_oracle: class count mismatch");
    for (std::size_t c = 0; c < classes; ++c) cells[c * phis.size() + t] = phis[t][c];
  }
  return select_certainty(CertaintyTable(classes, phis.size(), std::move(cells)), fallback_classes);
}

}  // namespace segfuse
