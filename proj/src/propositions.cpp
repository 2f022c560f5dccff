#include "segfuse/propositions.hpp"

#include <algorithm>

#include "segfuse/error.hpp"
#include "segfuse/metrics.hpp"
#include "segfuse/policy.hpp"
#include "segfuse/synth.hpp"

namespace segfuse::props {

namespace {

struct ZeroOverlapEnsemble {
  LabelMap gt;
  FusionPolicy policy;
  std::vector<LabelMap> unified;
};

// Teacher t agrees with a shared base map B wherever B names a class that t supplies
// under the policy, and never emits such a class anywhere else. Hence A_c equals
// B's class-c region for every c and the channels partition the image.
ZeroOverlapEnsemble zero_overlap_ensemble(Rng& rng, const InstanceParams& params) {
  const auto side = [&] {
    return params.min_side + static_cast<std::size_t>(
                                 rng.uniform_index(params.max_side - params.min_side + 1));
  };
  const Extent extent{side(), side()};
  const std::size_t classes = 2 + static_cast<std::size_t>(rng.uniform_index(params.max_classes - 1));
  const std::size_t teachers = 1 + static_cast<std::size_t>(rng.uniform_index(params.max_teachers));
  LabelMap gt = synth::voronoi_labels(extent, classes, 1.0 + rng.uniform(1.0, 4.0), rng);

  std::vector<std::size_t> assignment(classes);
  for (auto& t : assignment) t = static_cast<std::size_t>(rng.uniform_index(teachers));
  FusionPolicy policy(teachers, assignment);

  const double base_error = rng.uniform(0.0, params.max_base_error);
  std::vector<std::uint16_t> base(gt.values().begin(), gt.values().end());
  for (auto& b : base) {
    if (rng.bernoulli(base_error)) b = static_cast<std::uint16_t>(rng.uniform_index(classes));
  }

  std::vector<LabelMap> unified;
  for (std::size_t t = 0; t < teachers; ++t) {
    std::vector<std::size_t> foreign;
    for (std::size_t c = 0; c < classes; ++c) {
      if (assignment[c] != t) foreign.push_back(c);
    }
    const double foreign_error = rng.uniform(0.0, params.max_foreign_error);
    std::vector<std::uint16_t> out(base);
    for (auto& v : out) {
      if (assignment[v] == t || foreign.empty()) continue;
      if (rng.bernoulli(foreign_error)) {
        v = static_cast<std::uint16_t>(foreign[rng.uniform_index(foreign.size())]);
      }
    }
    unified.emplace_back(extent, classes, std::move(out));
  }
  return ZeroOverlapEnsemble{std::move(gt), std::move(policy), std::move(unified)};
}

}  // namespace

Prop1Result check_prop1(const Prop1Instance& instance, std::size_t kappa) {
  const std::size_t classes = instance.gt.classes();
  for (auto c : instance.listed_classes) {
    if (c >= classes) throw ValidationError("prop1: listed class out of range");
  }
  Prop1Result r;
  r.overlap = build_channel_sets(instance.unified, instance.policy).overlap().size();

  bool above_alpha = true;
  for (const auto& teacher : instance.unified) {
    const IoUReport rep = per_class_iou(teacher, instance.gt);
    for (auto c : instance.listed_classes) {
      if (!rep[c] || *rep[c] < instance.alpha) above_alpha = false;
    }
  }
  r.precondition_met = above_alpha && r.overlap == 0;
  r.bound = static_cast<double>(instance.listed_classes.size()) * instance.alpha /
            static_cast<double>(classes);
  const LabelMap fused = channel_fuse(instance.unified, instance.policy, kappa);
  r.miou = per_class_iou(fused, instance.gt).miou().value_or(0.0);
  if (r.precondition_met) r.holds = r.miou >= r.bound;
  return r;
}

Prop2Result check_prop2(const Prop2Instance& instance, std::size_t kappa) {
  std::vector<IoUReport> phis;
  for (const auto& teacher : instance.unified) phis.push_back(per_class_iou(teacher, instance.gt));
  const FusionPolicy oracle = select_oracle(phis);

  Prop2Result r;
  r.overlap = build_channel_sets(instance.unified, oracle).overlap().size();
  r.precondition_met = r.overlap == 0;
  r.fused_miou = per_class_iou(channel_fuse(instance.unified, oracle, kappa), instance.gt)
                     .miou()
                     .value_or(0.0);
  r.max_teacher_miou = 0.0;
  for (const auto& rep : phis) r.max_teacher_miou = std::max(r.max_teacher_miou, rep.miou().value_or(0.0));
  r.holds = r.fused_miou >= r.max_teacher_miou;
  return r;
}

Prop1Instance generate_prop1_instance(Rng& rng, const InstanceParams& params) {
  ZeroOverlapEnsemble e = zero_overlap_ensemble(rng, params);
  const std::size_t classes = e.gt.classes();

  std::vector<std::size_t> listed;
  while (listed.empty()) {
    for (std::size_t c = 0; c < classes; ++c) {
      if (rng.bernoulli(0.6)) listed.push_back(c);
    }
  }
  double min_iou = 1.0;
  for (const auto& teacher : e.unified) {
    const IoUReport rep = per_class_iou(teacher, e.gt);
    for (auto c : listed) min_iou = std::min(min_iou, rep[c].value_or(0.0));
  }
  const double alpha = min_iou * rng.uniform(0.5, 1.0);
  return Prop1Instance{std::move(e.unified), std::move(e.gt), std::move(e.policy), alpha,
                       std::move(listed)};
}

Prop2Instance generate_prop2_instance(Rng& rng, const InstanceParams& params) {
  ZeroOverlapEnsemble e = zero_overlap_ensemble(rng, params);
  return Prop2Instance{std::move(e.unified), std::move(e.gt)};
}

nlohmann::json to_json(const Prop1Result& r) {
  return {{"proposition", 1},
          {"precondition_met", r.precondition_met},
          {"overlap", r.overlap},
          {"bound", r.bound},
          {"miou", r.miou},
          {"holds", r.holds ? nlohmann::json(*r.holds) : nlohmann::json(nullptr)}};
}

nlohmann::json to_json(const Prop2Result& r) {
  return {{"proposition", 2},
          {"precondition_met", r.precondition_met},
          {"overlap", r.overlap},
          {"fused_miou", r.fused_miou},
          {"max_teacher_miou", r.max_teacher_miou},
          {"holds", r.holds}};
}

}  // namespace segfuse::props
