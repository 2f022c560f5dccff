#include <gtest/gtest.h>

#include <cstring>

#include "oracles.hpp"
#include "segfuse/error.hpp"
#include "segfuse/io.hpp"
#include "segfuse/types.hpp"

using namespace segfuse;

namespace {

io::Bytes header(std::string_view magic, std::uint32_t version, std::uint32_t h, std::uint32_t w,
                 std::uint16_t inner) {
  io::Bytes b(magic.begin(), magic.end());
  auto u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  u32(version);
  u32(h);
  u32(w);
  b.push_back(static_cast<std::uint8_t>(inner & 0xff));
  b.push_back(static_cast<std::uint8_t>(inner >> 8));
  return b;
}

void push_f32(io::Bytes& b, float v) {
  std::uint32_t u;
  std::memcpy(&u, &v, 4);
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
}

void push_u16(io::Bytes& b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v & 0xff));
  b.push_back(static_cast<std::uint8_t>(v >> 8));
}

}  // namespace

TEST(ClassSet, RejectsFewerThanTwoClasses) {
  EXPECT_THROW(ClassSet(1), ValidationError);
  EXPECT_THROW(ClassSet(0), ValidationError);
  const ClassSet s(3);
  EXPECT_TRUE(s.is_class(2));
  EXPECT_FALSE(s.is_class(3));
  EXPECT_TRUE(s.is_label(kUnlabeled));
  EXPECT_FALSE(s.is_class(ClassSet::unlabeled_id));
}

TEST(ProbMap, ValidatesSumsAndRange) {
  EXPECT_NO_THROW(ProbMap({1, 1}, 2, {0.6f, 0.4f}));
  EXPECT_THROW(ProbMap({1, 1}, 2, {0.5f, 0.4f}), ValidationError);
  EXPECT_THROW(ProbMap({1, 1}, 2, {1.2f, -0.2f}), ValidationError);
  EXPECT_THROW(ProbMap({1, 2}, 2, {0.5f, 0.5f}), ValidationError);
  EXPECT_NO_THROW(ProbMap({1, 1}, 2, {0.50004f, 0.5f}));
}

TEST(ProbMap, FromLogitsIsSoftmax) {
  const std::vector<float> logits{0.0f, std::log(3.0f)};
  const ProbMap m = ProbMap::from_logits({1, 1}, 2, logits);
  EXPECT_NEAR(m.at(0, 0), 0.25, 1e-6);
  EXPECT_NEAR(m.at(0, 1), 0.75, 1e-6);
}

TEST(LabelMap, RejectsOutOfRangeIds) {
  EXPECT_THROW(LabelMap({1, 2}, 3, {0, 3}), ValidationError);
  EXPECT_NO_THROW(LabelMap({1, 2}, 3, {2, kUnlabeled}));
}

TEST(FusionPolicy, MustBeInBounds) {
  EXPECT_THROW(FusionPolicy(2, {0, 2}), ValidationError);
  EXPECT_THROW(FusionPolicy(0, {}), ValidationError);
  const FusionPolicy p(2, {1, 0, 1});
  EXPECT_EQ(p.classes(), 3u);
  EXPECT_EQ(p[0], 1u);
}

TEST(IoUReport, MiouIsMeanOfDefinedEntries) {
  const IoUReport r({0.5, std::nullopt, 1.0});
  ASSERT_TRUE(r.miou());
  EXPECT_DOUBLE_EQ(*r.miou(), 0.75);
  EXPECT_THROW(IoUReport({1.5}), ValidationError);
}

TEST(CertaintyTable, SelectTeachersTakesColumns) {
  const CertaintyTable t(2, 3, {0.1, 0.2, 0.3, 0.4, std::nullopt, 0.6});
  const std::vector<std::size_t> cols{2, 0};
  const CertaintyTable s = t.select_teachers(cols);
  EXPECT_EQ(s.teachers(), 2u);
  EXPECT_EQ(s.at(0, 0), 0.3);
  EXPECT_EQ(s.at(1, 1), 0.4);
  EXPECT_THROW(CertaintyTable(1, 1, {1.5}), ValidationError);
}

TEST(Ensemble, RequiresConsistentMembers) {
  Rng rng(1);
  std::vector<ProbMap> a{oracle::random_probs(rng, {3, 3}, 3), oracle::random_probs(rng, {3, 4}, 3)};
  EXPECT_THROW(Ensemble(std::move(a)), ValidationError);
  EXPECT_THROW(Ensemble(std::vector<ProbMap>{}), ValidationError);
}

TEST(ProbMapCodec, SinglePixelFile) {
  io::Bytes b = header("PMAP", 1, 1, 1, 2);
  push_f32(b, 0.6f);
  push_f32(b, 0.4f);
  const ProbMap m = io::read_probmap(b);
  EXPECT_EQ(m.at(0, 0), 0.6f);
  EXPECT_EQ(m.at(0, 1), 0.4f);
  EXPECT_EQ(io::write_probmap(m), b);
}

TEST(ProbMapCodec, RejectsBadSumUnlessRenormalized) {
  io::Bytes b = header("PMAP", 1, 1, 1, 2);
  push_f32(b, 0.5f);
  push_f32(b, 0.4f);
  EXPECT_THROW(io::read_probmap(b), Error);
  const ProbMap m = io::read_probmap(b, {true});
  EXPECT_NEAR(m.at(0, 0) + m.at(0, 1), 1.0, 1e-6);
  EXPECT_GT(m.at(0, 0), m.at(0, 1));
}

TEST(ProbMapCodec, RoundTripIsBitExact) {
  Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    const Extent e{1 + rng.uniform_index(9), 1 + rng.uniform_index(9)};
    const ProbMap m = oracle::random_probs(rng, e, 2 + rng.uniform_index(6));
    const io::Bytes b = io::write_probmap(m);
    EXPECT_EQ(b.size(), io::kHeaderSize + 4 * e.pixels() * m.classes());
    const ProbMap back = io::read_probmap(b);
    EXPECT_EQ(back, m);
    EXPECT_EQ(io::write_probmap(back), b);
  }
}

TEST(LabelMapCodec, ByteLevelLayout) {
  const LabelMap m({2, 2}, 3, {0, 1, 2, kUnlabeled});
  io::Bytes expect = header("LMAP", 1, 2, 2, 3);
  for (std::uint16_t v : {0, 1, 2, 65535}) push_u16(expect, v);
  EXPECT_EQ(io::write_labelmap(m), expect);
  EXPECT_EQ(io::read_labelmap(expect), m);
}

TEST(LabelMapCodec, RejectsIdEqualToClassCount) {
  io::Bytes b = header("LMAP", 1, 1, 2, 3);
  push_u16(b, 0);
  push_u16(b, 3);
  EXPECT_THROW(io::read_labelmap(b), Error);
}

TEST(LabelMapCodec, RoundTripRandom) {
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    const LabelMap m = oracle::random_labels(rng, {1 + rng.uniform_index(12), 1 + rng.uniform_index(12)},
                                             2 + rng.uniform_index(10), 0.2);
    EXPECT_EQ(io::read_labelmap(io::write_labelmap(m)), m);
  }
}

TEST(FeatureMapCodec, RoundTrip) {
  Rng rng(3);
  std::vector<double> v(4 * 5 * 3);
  for (auto& x : v) x = rng.normal();
  const FeatureMap f({4, 5}, 3, v);
  EXPECT_EQ(io::read_featuremap(io::write_featuremap(f)), f);
  EXPECT_THROW(FeatureMap({1, 1}, 1, {std::nan("")}), ValidationError);
}

TEST(Codec, HeaderErrors) {
  const LabelMap m({2, 3}, 4, {0, 1, 2, 3, 0, 1});
  const io::Bytes good = io::write_labelmap(m);

  io::Bytes bad_magic = good;
  bad_magic[0] = 'X';
  EXPECT_THROW(io::read_labelmap(bad_magic), FormatError);
  EXPECT_THROW(io::read_probmap(good), FormatError);  // LMAP is not PMAP

  io::Bytes bad_version = good;
  bad_version[4] = 2;
  EXPECT_THROW(io::read_labelmap(bad_version), FormatError);

  io::Bytes truncated(good.begin(), good.end() - 1);
  EXPECT_THROW(io::read_labelmap(truncated), FormatError);
  io::Bytes extended = good;
  extended.push_back(0);
  EXPECT_THROW(io::read_labelmap(extended), FormatError);

  io::Bytes short_header(good.begin(), good.begin() + 10);
  EXPECT_THROW(io::read_labelmap(short_header), FormatError);

  EXPECT_THROW(io::read_probmap(header("PMAP", 1, 0xffffffffu, 0xffffffffu, 0xffff)), FormatError);
  EXPECT_THROW(io::read_labelmap(header("LMAP", 1, 0, 3, 2)), FormatError);
}

// Every single-byte corruption either decodes to a valid map or raises a toolkit
// error; nothing else escapes.
TEST(Codec, SingleByteFuzz) {
  Rng rng(99);
  const ProbMap pm = oracle::random_probs(rng, {3, 4}, 3);
  const LabelMap lm = oracle::random_labels(rng, {3, 4}, 5, 0.1);
  const io::Bytes pbytes = io::write_probmap(pm), lbytes = io::write_labelmap(lm);
  int rejected = 0;
  for (std::size_t i = 0; i < pbytes.size(); ++i) {
    for (std::uint8_t flip : {0x01, 0x80, 0xff}) {
      io::Bytes b = pbytes;
      b[i] ^= flip;
      try {
        const ProbMap m = io::read_probmap(b);
        for (std::size_t p = 0; p < m.pixels(); ++p) {
          double s = 0.0;
          for (std::size_t c = 0; c < m.classes(); ++c) s += m.at(p, c);
          EXPECT_NEAR(s, 1.0, kProbabilityTolerance * 1.01);
        }
      } catch (const Error&) {
        ++rejected;
      }
    }
  }
  for (std::size_t i = 0; i < lbytes.size(); ++i) {
    io::Bytes b = lbytes;
    b[i] ^= 0x40;
    try {
      const LabelMap m = io::read_labelmap(b);
      for (auto v : m.values()) EXPECT_TRUE(v < m.classes() || v == kUnlabeled);
    } catch (const Error&) {
      ++rejected;
    }
  }
  EXPECT_GT(rejected, 0);
}

TEST(PolicyJson, RoundTripAndValidation) {
  const FusionPolicy p(3, {2, 0, 1, 1});
  const auto j = io::policy_to_json(p);
  EXPECT_EQ(j["classes"], 4);
  EXPECT_EQ(j["teachers"], 3);
  EXPECT_EQ(io::policy_from_json(j), p);
  auto bad = j;
  bad["assignment"][0] = 3;
  EXPECT_THROW(io::policy_from_json(bad), Error);
  bad = j;
  bad["classes"] = 5;
  EXPECT_THROW(io::policy_from_json(bad), Error);
  EXPECT_THROW(io::policy_from_json(nlohmann::json::parse("{\"teachers\": 2}")), Error);
}

TEST(ReportJson, RoundTripWithUndefined) {
  const IoUReport r({0.25, std::nullopt, 0.5});
  const auto j = io::report_to_json(r);
  EXPECT_TRUE(j["per_class"][1].is_null());
  EXPECT_EQ(io::report_from_json(j), r);
  auto bad = j;
  bad["miou"] = 0.9;
  EXPECT_THROW(io::report_from_json(bad), Error);
}

TEST(CertaintyCsv, RoundTripAndErrors) {
  const CertaintyTable t(2, 2, {0.1, std::nullopt, 0.30000000000000004, 1.0});
  const std::string csv = io::certainty_to_csv(t);
  EXPECT_EQ(csv.rfind("class,teacher,rho\n", 0), 0u);
  EXPECT_EQ(io::certainty_from_csv(csv), t);
  EXPECT_THROW(io::certainty_from_csv("class,teacher,rho\n0,0,0.5\n1,1,0.2\n"), Error);
  EXPECT_THROW(io::certainty_from_csv("class,teacher,rho\n0,0,0.5\n1,0,0.2\n1,0,0.3\n"), Error);
  EXPECT_THROW(io::certainty_from_csv("cls,t,r\n0,0,0.5\n1,0,0.2\n"), Error);
  const CertaintyTable nan = io::certainty_from_csv("class,teacher,rho\n0,0,nan\n1,0,0.2\n");
  EXPECT_FALSE(nan.at(0, 0));
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(io::format_double(0.5), "0.5");
  EXPECT_EQ(io::format_double(0.1 + 0.2), "0.30000000000000004");
  EXPECT_EQ(std::stod(io::format_double(1.0 / 3.0)), 1.0 / 3.0);
}
