#include <gtest/gtest.h>

#include "oracles.hpp"
#include "segfuse/error.hpp"
#include "segfuse/unification.hpp"

using namespace segfuse;

TEST(Unify, UniqueArgmax) {
  const ProbMap m({1, 1}, 3, {0.2f, 0.5f, 0.3f});
  EXPECT_EQ(unify(m)[0], 1);
}

TEST(Unify, TieGoesToSmallestClass) {
  const ProbMap m({1, 2}, 3, {0.5f, 0.5f, 0.0f, 0.0f, 0.5f, 0.5f});
  const LabelMap u = unify(m);
  EXPECT_EQ(u[0], 0);
  EXPECT_EQ(u[1], 1);
  const ProbMap uniform({1, 1}, 4, {0.25f, 0.25f, 0.25f, 0.25f});
  EXPECT_EQ(unify(uniform)[0], 0);
}

TEST(Unify, MatchesMaxScanOracle) {
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const ProbMap m = oracle::random_probs(rng, {4, 4}, 5);
    const LabelMap u = unify(m);
    EXPECT_EQ(u, oracle::argmax(m));
    EXPECT_FALSE(u.has_unlabeled());
  }
}

TEST(Unify, TemperatureInvariance) {
  Rng rng(6);
  for (int i = 0; i < 50; ++i) {
    const Extent e{1 + rng.uniform_index(8), 1 + rng.uniform_index(8)};
    const std::size_t classes = 2 + rng.uniform_index(6);
    const auto logits = oracle::random_logits(rng, e, classes);
    const LabelMap base = unify(ProbMap::from_logits(e, classes, logits, 1.0));
    for (double t : {0.1, 0.5, 2.0, 10.0}) {
      EXPECT_EQ(unify(ProbMap::from_logits(e, classes, logits, t)), base) << "temperature " << t;
    }
  }
}

TEST(Unify, IdempotentThroughOneHot) {
  Rng rng(8);
  for (int i = 0; i < 30; ++i) {
    const LabelMap u = unify(oracle::random_probs(rng, {5, 3}, 4));
    const ProbMap oh = one_hot(u);
    for (std::size_t p = 0; p < u.pixels(); ++p) {
      for (std::size_t c = 0; c < u.classes(); ++c) EXPECT_EQ(oh.at(p, c), c == u[p] ? 1.0f : 0.0f);
    }
    EXPECT_EQ(unify(oh), u);
  }
}

TEST(OneHot, RejectsUnlabeled) {
  const LabelMap m({1, 2}, 2, {0, kUnlabeled});
  EXPECT_THROW(one_hot(m), ValidationError);
}
