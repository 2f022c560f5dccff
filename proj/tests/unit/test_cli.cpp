#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "cli.hpp"
#include "segfuse/experiments.hpp"
#include "segfuse/fusion.hpp"
#include "segfuse/io.hpp"
#include "segfuse/metrics.hpp"
#include "segfuse/policy.hpp"
#include "segfuse/unification.hpp"

using namespace segfuse;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("segfuse_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    bench_ = {"--height", "16", "--width", "20", "--classes", "4", "--region-scale", "5", "--good", "3",
              "--underperformers", "1"};
    std::vector<std::string> args{"synth", "--seed", "7", "--out-dir", dir_.string()};
    args.insert(args.end(), bench_.begin(), bench_.end());
    const auto r = run_cli(args);
    ASSERT_EQ(r.code, 0) << r.err;
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  experiments::BenchmarkConfig config() const {
    experiments::BenchmarkConfig c;
    c.height = 16;
    c.width = 20;
    c.classes = 4;
    c.region_scale = 5;
    c.good_teachers = 3;
    c.underperformers = 1;
    return c;
  }

  std::vector<LabelMap> teachers() const {
    std::vector<LabelMap> v;
    for (int t = 0; t < 3; ++t) v.push_back(unify(io::load_probmap(path("teacher_" + std::to_string(t) + ".pmap"))));
    return v;
  }

  fs::path dir_;
  std::vector<std::string> bench_;
};

}  // namespace

TEST_F(CliTest, SynthMatchesLibrary) {
  const auto b = experiments::make_benchmark(config(), 7);
  EXPECT_EQ(io::load_labelmap(path("gt.lmap")), b.gt);
  EXPECT_EQ(io::load_featuremap(path("features.fmap")), b.features);
  EXPECT_EQ(io::read_file(path("teacher_1.pmap")), io::write_probmap(b.good[1]));
  EXPECT_EQ(io::read_file(path("underperformer_0.pmap")), io::write_probmap(b.bad[0]));
  const json manifest = json::parse(io::read_text(path("manifest.json")));
  EXPECT_EQ(manifest["seed"], 7);
  EXPECT_EQ(manifest["files"]["teachers"].size(), 3u);
}

TEST_F(CliTest, UnifyAndFusionMatchLibrary) {
  ASSERT_EQ(run_cli({"unify", path("teacher_0.pmap"), "-o", path("t0.lmap")}).code, 0);
  EXPECT_EQ(io::load_labelmap(path("t0.lmap")), teachers()[0]);

  const auto printed = run_cli({"unify", path("teacher_0.pmap")});
  ASSERT_EQ(printed.code, 0);
  const json j = json::parse(printed.out);
  EXPECT_EQ(j["height"], 16);
  EXPECT_EQ(j["labels"].size(), 320u);

  ASSERT_EQ(run_cli({"fuse-pixel", path("teacher_0.pmap"), path("teacher_1.pmap"), path("teacher_2.pmap"),
                     "-o", path("pixel.lmap")}).code, 0);
  EXPECT_EQ(io::load_labelmap(path("pixel.lmap")), pixel_fuse(teachers()));

  ASSERT_EQ(run_cli({"select-policy", "random", "--classes", "4", "--teachers", "3", "--seed", "5", "-o",
                     path("policy.json")}).code, 0);
  const FusionPolicy pi = io::policy_from_json(json::parse(io::read_text(path("policy.json"))));
  EXPECT_EQ(pi, select_random(4, 3, 5));
  // Mixed inputs: one already-unified label map.
  ASSERT_EQ(run_cli({"fuse-channel", path("t0.lmap"), path("teacher_1.pmap"), path("teacher_2.pmap"),
                     "--policy", path("policy.json"), "--kappa", "5", "-o", path("channel.lmap")}).code, 0);
  EXPECT_EQ(io::load_labelmap(path("channel.lmap")), channel_fuse(teachers(), pi, 5));

  const auto ev = run_cli({"eval", "--pred", path("channel.lmap"), "--gt", path("gt.lmap")});
  ASSERT_EQ(ev.code, 0);
  EXPECT_EQ(json::parse(ev.out),
            io::report_to_json(per_class_iou(channel_fuse(teachers(), pi, 5), io::load_labelmap(path("gt.lmap")))));
}

TEST_F(CliTest, OracleAndCertaintySelection) {
  const auto orc = run_cli({"select-policy", "oracle", path("teacher_0.pmap"), path("teacher_1.pmap"),
                            path("teacher_2.pmap"), "--gt", path("gt.lmap")});
  ASSERT_EQ(orc.code, 0) << orc.err;
  std::vector<IoUReport> phis;
  const LabelMap gt = io::load_labelmap(path("gt.lmap"));
  for (const auto& t : teachers()) phis.push_back(per_class_iou(t, gt));
  EXPECT_EQ(io::policy_from_json(json::parse(orc.out)), select_oracle(phis));

  std::vector<std::string> cert{"select-policy", "certainty", path("teacher_0.pmap"), path("teacher_1.pmap"),
                                path("teacher_2.pmap"), "--features", path("features.fmap"), "--seed", "3",
                                "--iterations", "40", "--rho-out", path("rho.csv"), "-o", path("cert.json")};
  ASSERT_EQ(run_cli(cert).code, 0);
  const std::string first = io::read_text(path("cert.json"));
  const CertaintyTable rho = io::certainty_from_csv(io::read_text(path("rho.csv")));
  EXPECT_EQ(io::policy_from_json(json::parse(first)), select_certainty(rho));
  ASSERT_EQ(run_cli(cert).code, 0);
  EXPECT_EQ(io::read_text(path("cert.json")), first);

  const auto from_table = run_cli({"select-policy", "certainty", "--table", path("rho.csv")});
  ASSERT_EQ(from_table.code, 0);
  EXPECT_EQ(json::parse(from_table.out), json::parse(first));
}

TEST_F(CliTest, DistillPrintsModel) {
  ASSERT_EQ(run_cli({"fuse-pixel", path("teacher_0.pmap"), path("teacher_1.pmap"), path("teacher_2.pmap"),
                     "-o", path("pixel.lmap")}).code, 0);
  const auto r = run_cli({"distill", "--features", path("features.fmap"), "--labels", path("pixel.lmap"),
                          "--seed", "1", "--iterations", "30", "--trace", path("trace.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["classes"], 4);
  EXPECT_TRUE(j["final_loss"].is_number());
  const auto trace = cli::csv_to_json(io::read_text(path("trace.csv")));
  EXPECT_EQ(trace.size(), 30u);
  EXPECT_EQ(trace[0]["iter"], 0);
}

TEST_F(CliTest, ExperimentsAreByteIdenticalOnRerun) {
  std::vector<std::string> args{"experiment", "kernel-sweep", "--seed", "2", "--seeds", "2", "--kappas", "1,3",
                                "-o", path("ks.csv")};
  args.insert(args.end(), bench_.begin(), bench_.end() - 2);
  ASSERT_EQ(run_cli(args).code, 0);
  const std::string first = io::read_text(path("ks.csv"));
  EXPECT_EQ(first.rfind("seed,kappa,miou,gain\n", 0), 0u);
  ASSERT_EQ(run_cli(args).code, 0);
  EXPECT_EQ(io::read_text(path("ks.csv")), first);

  const auto prop = run_cli({"experiment", "prop-check", "--proposition", "2", "--instances", "20", "--seed", "4"});
  ASSERT_EQ(prop.code, 0) << prop.err;
  const json summary = json::parse(prop.out);
  EXPECT_EQ(summary["violations"], 0);
  EXPECT_EQ(summary["results"].size(), 20u);
}

TEST_F(CliTest, ErrorsAreJsonWithExitCodes) {
  const auto missing = run_cli({"unify", path("nope.pmap")});
  EXPECT_EQ(missing.code, cli::kExitIo);
  EXPECT_EQ(json::parse(missing.err)["error"]["kind"], "io");

  const auto kappa = run_cli({"fuse-channel", path("teacher_0.pmap"), "--policy", path("p.json"), "--kappa", "4"});
  EXPECT_NE(kappa.code, cli::kExitOk);

  ASSERT_EQ(run_cli({"select-policy", "random", "--classes", "4", "--teachers", "1", "--seed", "5", "-o",
                     path("p.json")}).code, 0);
  const auto even = run_cli({"fuse-channel", path("teacher_0.pmap"), "--policy", path("p.json"), "--kappa", "4"});
  EXPECT_EQ(even.code, cli::kExitValidation);
  EXPECT_EQ(json::parse(even.err)["error"]["kind"], "validation");

  io::write_text_atomic(path("junk.pmap"), "PMAPxx");
  const auto junk = run_cli({"unify", path("junk.pmap")});
  EXPECT_EQ(junk.code, cli::kExitValidation);
  EXPECT_EQ(json::parse(junk.err)["error"]["kind"], "format");

  const auto usage = run_cli({"unify"});
  EXPECT_EQ(usage.code, cli::kExitUsage);
  EXPECT_EQ(json::parse(usage.err)["error"]["kind"], "usage");
  EXPECT_EQ(run_cli({"bogus"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"--help"}).code, cli::kExitOk);
}

TEST(CsvToJson, TypesFields) {
  const json j = cli::csv_to_json("seed,k,value\nmean,2,0.5\n3,,x\n");
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[0]["seed"], "mean");
  EXPECT_EQ(j[0]["k"], 2);
  EXPECT_EQ(j[0]["value"], 0.5);
  EXPECT_TRUE(j[1]["k"].is_null());
  EXPECT_EQ(cli::csv_to_json("").size(), 0u);
}
