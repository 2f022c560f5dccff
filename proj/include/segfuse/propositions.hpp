#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "json.hpp"

#include "segfuse/fusion.hpp"
#include "segfuse/random.hpp"
#include "segfuse/types.hpp"

namespace segfuse::props {

/// Lower-bound check: if every listed class has IoU >= alpha for every teacher and
/// the policy yields no overlap, the fused mIoU is at least n * alpha / |C|.
struct Prop1Instance {
  std::vector<LabelMap> unified;
  LabelMap gt;
  FusionPolicy policy;
  double alpha = 0.0;
  std::vector<std::size_t> listed_classes;
};

struct Prop1Result {
  bool precondition_met = false;
  std::size_t overlap = 0;
  double bound = 0.0;
  double miou = 0.0;
  /// Set only when the precondition holds.
  std::optional<bool> holds;
};

Prop1Result check_prop1(const Prop1Instance& instance, std::size_t kappa = kDefaultKappa);

/// Optimality check: under the oracle policy with no overlap, the fused mIoU is at
/// least every single teacher's mIoU.
struct Prop2Instance {
  std::vector<LabelMap> unified;
  LabelMap gt;
};

struct Prop2Result {
  bool precondition_met = false;
  std::size_t overlap = 0;
  double fused_miou = 0.0;
  double max_teacher_miou = 0.0;
  bool holds = false;
};

Prop2Result check_prop2(const Prop2Instance& instance, std::size_t kappa = kDefaultKappa);

struct InstanceParams {
  std::size_t min_side = 4;
  std::size_t max_side = 16;
  std::size_t max_classes = 6;
  std::size_t max_teachers = 4;
  /// Upper bound on the shared base map's error rate.
  double max_base_error = 0.25;
  /// Upper bound on how often a teacher relabels pixels outside its own channels.
  double max_foreign_error = 0.4;
};

/// Random instance whose construction guarantees zero overlap under its policy and
/// whose alpha is drawn at or below the smallest listed-class IoU.
Prop1Instance generate_prop1_instance(Rng& rng, const InstanceParams& params = {});

/// Random instance built zero-overlap for a hidden policy; the oracle policy usually
/// coincides, and check_prop2 reports when it does not.
Prop2Instance generate_prop2_instance(Rng& rng, const InstanceParams& params = {});

nlohmann::json to_json(const Prop1Result& r);
nlohmann::json to_json(const Prop2Result& r);

}  // namespace segfuse::props
