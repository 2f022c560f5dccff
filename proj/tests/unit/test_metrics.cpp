#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "segfuse/error.hpp"
#include "segfuse/metrics.hpp"

using namespace segfuse;

TEST(PerClassIou, IdentityIsPerfect) {
  Rng rng(31);
  const LabelMap gt = oracle::random_labels(rng, {6, 6}, 4);
  const IoUReport r = per_class_iou(gt, gt);
  for (std::size_t c = 0; c < 4; ++c) {
    if (r[c]) EXPECT_EQ(*r[c], 1.0);
  }
  EXPECT_EQ(r.miou(), 1.0);
}

TEST(PerClassIou, HandCountedExample) {
  const LabelMap pred({2, 2}, 2, {0, 0, 1, 1});
  const LabelMap gt({2, 2}, 2, {0, 1, 1, 1});
  const IoUReport r = per_class_iou(pred, gt);
  EXPECT_DOUBLE_EQ(*r[0], 0.5);
  EXPECT_DOUBLE_EQ(*r[1], 2.0 / 3.0);
  EXPECT_NEAR(*r.miou(), 0.5833, 1e-4);
}

TEST(PerClassIou, AllUnlabeledPredictionScoresZero) {
  const LabelMap pred({1, 3}, 3, {kUnlabeled, kUnlabeled, kUnlabeled});
  const LabelMap gt({1, 3}, 3, {0, 2, 2});
  const IoUReport r = per_class_iou(pred, gt);
  EXPECT_EQ(r[0], 0.0);
  EXPECT_FALSE(r[1]);
  EXPECT_EQ(r[2], 0.0);
  EXPECT_EQ(r.miou(), 0.0);
}

TEST(PerClassIou, ClassAbsentFromGtButPredictedIsZero) {
  const LabelMap pred({1, 2}, 3, {0, 2});
  const LabelMap gt({1, 2}, 3, {0, 0});
  const IoUReport r = per_class_iou(pred, gt);
  EXPECT_EQ(r[2], 0.0);
  EXPECT_FALSE(r[1]);
}

TEST(PerClassIou, Errors) {
  const LabelMap a({1, 2}, 2, {0, 1});
  EXPECT_THROW(per_class_iou(a, LabelMap({2, 1}, 2, {0, 1})), ValidationError);
  EXPECT_THROW(per_class_iou(a, LabelMap({1, 2}, 3, {0, 1})), ValidationError);
  EXPECT_THROW(per_class_iou(a, LabelMap({1, 2}, 2, {0, kUnlabeled})), ValidationError);
}

TEST(PerClassIou, MatchesConfusionMatrixOracle) {
  Rng rng(32);
  for (int i = 0; i < 200; ++i) {
    const Extent e{1 + rng.uniform_index(16), 1 + rng.uniform_index(16)};
    const std::size_t classes = 2 + rng.uniform_index(8);
    const LabelMap gt = oracle::random_labels(rng, e, classes);
    const LabelMap pred = oracle::random_labels(rng, e, classes, 0.15);
    const IoUReport r = per_class_iou(pred, gt);
    const auto expect = oracle::iou(pred, gt);
    EXPECT_EQ(r.per_class(), expect);
    EXPECT_EQ(r.miou(), oracle::miou(expect));
    for (const auto& v : r.per_class()) {
      if (v) EXPECT_TRUE(*v >= 0.0 && *v <= 1.0);
    }
  }
}

TEST(PerClassIou, SymmetricUnderRelabeling) {
  Rng rng(33);
  for (int i = 0; i < 50; ++i) {
    const std::size_t classes = 5;
    const LabelMap gt = oracle::random_labels(rng, {7, 7}, classes);
    const LabelMap pred = oracle::random_labels(rng, {7, 7}, classes, 0.1);
    std::vector<std::uint16_t> perm{0, 1, 2, 3, 4};
    for (std::size_t k = classes - 1; k > 0; --k) std::swap(perm[k], perm[rng.uniform_index(k + 1)]);
    auto relabel = [&](const LabelMap& m) {
      std::vector<std::uint16_t> v(m.values().begin(), m.values().end());
      for (auto& x : v) x = x == kUnlabeled ? x : perm[x];
      return LabelMap(m.extent(), classes, std::move(v));
    };
    const IoUReport a = per_class_iou(pred, gt), b = per_class_iou(relabel(pred), relabel(gt));
    for (std::size_t c = 0; c < classes; ++c) EXPECT_EQ(a[c], b[perm[c]]);
  }
}

TEST(PixelAccuracy, CountsMatches) {
  const LabelMap pred({1, 4}, 2, {0, 1, kUnlabeled, 1});
  const LabelMap gt({1, 4}, 2, {0, 0, 1, 1});
  EXPECT_DOUBLE_EQ(pixel_accuracy(pred, gt), 0.5);
}

TEST(CertaintyTable, SingleClassPredictor) {
  std::vector<float> v;
  for (int p = 0; p < 6; ++p) v.insert(v.end(), {0.8f, 0.1f, 0.1f});
  const std::vector<ProbMap> students{ProbMap({2, 3}, 3, v)};
  const CertaintyTable t = certainty_table(students);
  EXPECT_NEAR(*t.at(0, 0), 0.8, 1e-7);
  EXPECT_FALSE(t.at(1, 0));
  EXPECT_FALSE(t.at(2, 0));
}

TEST(CertaintyTable, UniformStudentTiesToClassZero) {
  const std::vector<ProbMap> students{ProbMap({1, 2}, 4, std::vector<float>(8, 0.25f))};
  const CertaintyTable t = certainty_table(students);
  EXPECT_DOUBLE_EQ(*t.at(0, 0), 0.25);
  for (std::size_t c = 1; c < 4; ++c) EXPECT_FALSE(t.at(c, 0));
}

TEST(CertaintyTable, MatchesAccumulationOracle) {
  Rng rng(34);
  for (int i = 0; i < 30; ++i) {
    std::vector<ProbMap> students;
    for (int t = 0; t < 3; ++t) students.push_back(oracle::random_probs(rng, {8, 8}, 4));
    std::vector<std::uint8_t> mask(64);
    for (auto& m : mask) m = rng.bernoulli(0.4);
    mask[0] = 1;
    const CertaintyTable table = certainty_table(students, mask);
    for (std::size_t t = 0; t < 3; ++t) {
      const auto expect = oracle::certainty(students[t], mask);
      for (std::size_t c = 0; c < 4; ++c) {
        ASSERT_EQ(table.at(c, t).has_value(), expect[c].has_value());
        if (expect[c]) EXPECT_NEAR(*table.at(c, t), *expect[c], 1e-12);
      }
    }
  }
}

TEST(CertaintyTable, EmptyMeasurementSetRejected) {
  Rng rng(35);
  const std::vector<ProbMap> students{oracle::random_probs(rng, {2, 2}, 3)};
  const std::vector<std::uint8_t> none(4, 0);
  EXPECT_THROW(certainty_table(students, none), ValidationError);
  EXPECT_THROW(certainty_table(std::vector<ProbMap>{}), ValidationError);
}

TEST(CertaintyIouCosine, ColinearAndOrthogonal) {
  const CertaintyTable rho(2, 2, {0.2, 0.4, 0.5, std::nullopt});
  const std::vector<IoUReport> phis{IoUReport({0.1, 0.0}), IoUReport({0.2, 0.7})};
  const auto cos = certainty_iou_cosine(rho, phis);
  EXPECT_NEAR(*cos[0], 1.0, 1e-12);
  EXPECT_NEAR(*cos[1], 0.0, 1e-12);
}

TEST(CertaintyIouCosine, ZeroNormIsUndefined) {
  const CertaintyTable rho(2, 2, {std::nullopt, std::nullopt, 0.5, 0.5});
  const std::vector<IoUReport> phis{IoUReport({0.3, 0.2}), IoUReport({0.4, 0.1})};
  const auto cos = certainty_iou_cosine(rho, phis);
  EXPECT_FALSE(cos[0]);
  ASSERT_TRUE(cos[1]);
}

TEST(CertaintyIouCosine, MatchesDotProductOracle) {
  Rng rng(36);
  for (int i = 0; i < 30; ++i) {
    const std::size_t classes = 4, teachers = 3;
    std::vector<std::optional<double>> cells(classes * teachers);
    for (auto& c : cells) c = rng.uniform01();
    std::vector<IoUReport> phis;
    for (std::size_t t = 0; t < teachers; ++t) {
      std::vector<std::optional<double>> v(classes);
      for (auto& x : v) x = rng.uniform01();
      phis.emplace_back(v);
    }
    const CertaintyTable rho(classes, teachers, cells);
    const auto cos = certainty_iou_cosine(rho, phis);
    for (std::size_t c = 0; c < classes; ++c) {
      double dot = 0, na = 0, nb = 0;
      for (std::size_t t = 0; t < teachers; ++t) {
        const double a = *rho.at(c, t), b = *phis[t][c];
        dot += a * b;
        na += a * a;
        nb += b * b;
      }
      EXPECT_NEAR(*cos[c], dot / std::sqrt(na * nb), 1e-12);
    }
  }
}

TEST(CertaintyHistogram, Examples) {
  const ProbMap sure({1, 3}, 2, {1.0f, 0.0f, 0.0f, 1.0f, 1.0f, 0.0f});
  const auto h = certainty_histogram(sure, 10);
  EXPECT_EQ(h.back(), 3u);
  const ProbMap uniform({2, 2}, 4, std::vector<float>(16, 0.25f));
  const auto u = certainty_histogram(uniform, 10);
  EXPECT_EQ(u[2], 4u);
  EXPECT_THROW(certainty_histogram(uniform, 0), ValidationError);
}

TEST(CertaintyHistogram, MatchesCountingOracle) {
  Rng rng(37);
  const ProbMap m = oracle::random_probs(rng, {10, 10}, 3);
  const std::size_t bins = 7;
  const auto h = certainty_histogram(m, bins);
  std::vector<std::uint64_t> expect(bins, 0);
  std::uint64_t total = 0;
  for (std::size_t p = 0; p < m.pixels(); ++p) {
    float mx = 0;
    for (std::size_t c = 0; c < 3; ++c) mx = std::max(mx, m.at(p, c));
    std::size_t b = 0;
    while (b + 1 < bins && static_cast<double>(mx) >= static_cast<double>(b + 1) / bins) ++b;
    ++expect[b];
  }
  EXPECT_EQ(h, expect);
  for (auto v : h) total += v;
  EXPECT_EQ(total, 100u);
  const std::string csv = histogram_to_csv(h);
  EXPECT_EQ(csv.rfind("bin_low,bin_high,count\n", 0), 0u);
}
