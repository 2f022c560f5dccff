#include <gtest/gtest.h>

#include "oracles.hpp"
#include "segfuse/experiments.hpp"
#include "segfuse/fusion.hpp"
#include "segfuse/metrics.hpp"
#include "segfuse/propositions.hpp"

using namespace segfuse;

namespace {

// 3 classes on a 2x4 image. Teacher 0 supplies classes 0 and 1, teacher 1 class 2.
// Teacher 1 misses the last pixel, which stays unlabeled after fusion.
props::Prop1Instance small_instance(double alpha) {
  const Extent e{2, 4};
  LabelMap gt(e, 3, {0, 0, 1, 1, 2, 2, 2, 2});
  LabelMap t0(e, 3, {0, 0, 1, 1, 2, 2, 2, 2});
  LabelMap t1(e, 3, {0, 0, 1, 1, 2, 2, 2, 1});
  return props::Prop1Instance{{t0, t1}, gt, FusionPolicy(2, {0, 0, 1}), alpha, {0, 2}};
}

}  // namespace

TEST(ZeroOverlapBound, ConstructedBoundExample) {
  // |C| = 3, n = 2, alpha = 0.6 so the bound is 0.4.
  const auto inst = small_instance(0.6);
  const auto r = props::check_prop1(inst);
  EXPECT_TRUE(r.precondition_met);
  EXPECT_EQ(r.overlap, 0u);
  EXPECT_DOUBLE_EQ(r.bound, 0.4);
  ASSERT_TRUE(r.holds);
  EXPECT_TRUE(*r.holds);
  const auto expect = oracle::miou(oracle::iou(channel_fuse(inst.unified, inst.policy), inst.gt));
  EXPECT_DOUBLE_EQ(r.miou, *expect);
}

TEST(ZeroOverlapBound, ZeroAlphaIsVacuous) {
  const auto r = props::check_prop1(small_instance(0.0));
  EXPECT_DOUBLE_EQ(r.bound, 0.0);
  EXPECT_TRUE(r.holds.value_or(false));
}

TEST(ZeroOverlapBound, OverlapBreaksPrecondition) {
  auto inst = small_instance(0.1);
  inst.policy = FusionPolicy(2, {0, 1, 0});  // the last pixel is claimed by classes 1 and 2
  const auto r = props::check_prop1(inst);
  EXPECT_GT(r.overlap, 0u);
  EXPECT_FALSE(r.precondition_met);
  EXPECT_FALSE(r.holds.has_value());
}

TEST(ZeroOverlapBound, AlphaAboveSomeTeacherBreaksPrecondition) {
  const auto r = props::check_prop1(small_instance(0.99));
  EXPECT_FALSE(r.precondition_met);
}

TEST(OraclePolicyOptimality, SingleTeacher) {
  Rng rng(51);
  const LabelMap gt = oracle::random_labels(rng, {5, 5}, 3);
  const LabelMap t = oracle::random_labels(rng, {5, 5}, 3);
  const auto r = props::check_prop2({{t}, gt});
  EXPECT_TRUE(r.precondition_met);
  EXPECT_DOUBLE_EQ(r.fused_miou, r.max_teacher_miou);
  EXPECT_TRUE(r.holds);
}

TEST(OraclePolicyOptimality, ComplementarySpecialists) {
  // Teacher 0 is exact on class 0 and paints the rest as 2; teacher 1 exact on
  // class 1 and paints the rest as 2; teacher 2 is exact on class 2.
  const Extent e{1, 6};
  const LabelMap gt(e, 3, {0, 0, 1, 1, 2, 2});
  const LabelMap t0(e, 3, {0, 0, 2, 2, 2, 2});
  const LabelMap t1(e, 3, {2, 2, 1, 1, 2, 2});
  const LabelMap t2(e, 3, {1, 1, 0, 0, 2, 2});
  const auto r = props::check_prop2({{t0, t1, t2}, gt});
  EXPECT_TRUE(r.precondition_met);
  EXPECT_DOUBLE_EQ(r.fused_miou, 1.0);
  EXPECT_TRUE(r.holds);
}

TEST(OraclePolicyOptimality, OverlapReportedNotRaised) {
  const Extent e{1, 4};
  const LabelMap gt(e, 2, {0, 0, 1, 1});
  const LabelMap t0(e, 2, {0, 0, 0, 1});  // best on class 0 via recall
  const LabelMap t1(e, 2, {1, 0, 1, 1});  // best on class 1; claims pixel 0 as 1
  const auto r = props::check_prop2({{t0, t1}, gt});
  EXPECT_FALSE(r.precondition_met);
  EXPECT_GT(r.overlap, 0u);
  EXPECT_GT(r.fused_miou, 0.0);
}

TEST(PropGenerators, HitTheHypothesis) {
  Rng rng(52);
  for (int i = 0; i < 100; ++i) {
    const auto inst = props::generate_prop1_instance(rng);
    const auto r = props::check_prop1(inst);
    EXPECT_TRUE(r.precondition_met);
    EXPECT_TRUE(r.holds.value_or(false));
    EXPECT_EQ(oracle::overlap_count(inst.unified, {inst.policy.assignment().begin(), inst.policy.assignment().end()}), 0u);
  }
}

TEST(PropCheck, ZeroViolationsAndJsonLines) {
  for (std::size_t prop : {1, 2}) {
    const auto check = experiments::prop_check(prop, 100, 5);
    EXPECT_EQ(check.precondition_met, 100u);
    EXPECT_EQ(check.violations, 0u);
    EXPECT_EQ(check.lines.size(), 100u);
    const std::string jl = experiments::to_jsonl(check);
    EXPECT_EQ(std::count(jl.begin(), jl.end(), '\n'), 100);
    EXPECT_EQ(jl, experiments::to_jsonl(experiments::prop_check(prop, 100, 5)));
  }
  EXPECT_THROW(experiments::prop_check(3, 1, 0), std::exception);
}
