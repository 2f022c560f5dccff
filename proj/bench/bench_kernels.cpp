// Reference (serial) kernels against the OpenMP ones. Thread count follows
// SEGFUSE_THREADS when set.

#include <benchmark/benchmark.h>

#include <map>

#include "segfuse/distill.hpp"
#include "segfuse/fusion.hpp"
#include "segfuse/metrics.hpp"
#include "segfuse/parallel.hpp"
#include "segfuse/policy.hpp"
#include "segfuse/reference.hpp"
#include "segfuse/synth.hpp"
#include "segfuse/unification.hpp"

using namespace segfuse;

namespace {

constexpr std::size_t kClasses = 19;
constexpr std::size_t kTeachers = 4;

struct Fixture {
  synth::GroundTruth gt;
  std::vector<ProbMap> probs;
  std::vector<LabelMap> unified;
  FusionPolicy policy;
  ToyStudent student;
  PixelBatch batch;

  explicit Fixture(std::size_t side)
      : gt(synth::gen_ground_truth(side, side, kClasses, 16.0, 5)),
        policy(select_random(kClasses, kTeachers, 9)),
        student(ToyStudent::random(kClasses, gt.features.dims(), 0.3, 2)) {
    for (std::size_t t = 0; t < kTeachers; ++t) {
      synth::Corruption corruption;
      corruption.per_class_error.assign(kClasses, 0.1 + 0.05 * static_cast<double>(t));
      corruption.seed = t;
      probs.push_back(synth::corrupt_teacher(gt.labels, corruption));
      unified.push_back(unify(probs.back()));
    }
    batch = gather_labeled(gt.features, gt.labels);
  }
};

const Fixture& fixture(std::size_t side) {
  static std::map<std::size_t, Fixture> cache;
  auto it = cache.find(side);
  if (it == cache.end()) it = cache.emplace(side, Fixture(side)).first;
  return it->second;
}

#define SIZES ->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond)

void BM_unify(benchmark::State& s) {
  const auto& f = fixture(s.range(0));
  for (auto _ : s) benchmark::DoNotOptimize(unify(f.probs[0]));
}
void BM_unify_reference(benchmark::State& s) {
  const auto& f = fixture(s.range(0));
  for (auto _ : s) benchmark::DoNotOptimize(reference::unify(f.probs[0]));
}

void BM_pixel_fuse(benchmark::State& s) {
  const auto& f = fixture(s.range(0));
  for (auto _ : s) benchmark::DoNotOptimize(pixel_fuse(f.unified));
}
void BM_pixel_fuse_reference(benchmark::State& s) {
  const auto& f = fixture(s.range(0));
  for (auto _ : s) benchmark::DoNotOptimize(reference::pixel_fuse(f.unified));
}

void BM_channel_fuse(benchmark::State& s) {
  const auto& f = fixture(s.range(0));
  for (auto _ : s) benchmark::DoNotOptimize(channel_fuse(f.unified, f.policy, 13));
}
void BM_channel_fuse_reference(benchmark::State& s) {
  const auto& f = fixture(s.range(0));
  for (auto _ : s) benchmark::DoNotOptimize(reference::channel_fuse(f.unified, f.policy, 13));
}

void BM_per_class_iou(benchmark::State& s) {
  const auto& f = fixture(s.range(0));
  for (auto _ : s) benchmark::DoNotOptimize(per_class_iou(f.unified[0], f.gt.labels));
}
void BM_per_class_iou_reference(benchmark::State& s) {
  const auto& f = fixture(s.range(0));
  for (auto _ : s) benchmark::DoNotOptimize(reference::per_class_iou(f.unified[0], f.gt.labels));
}

void BM_average_fuse(benchmark::State& s) {
  const auto& f = fixture(s.range(0));
  for (auto _ : s) benchmark::DoNotOptimize(average_fuse(f.probs));
}
void BM_average_fuse_reference(benchmark::State& s) {
  const auto& f = fixture(s.range(0));
  for (auto _ : s) benchmark::DoNotOptimize(reference::average_fuse(f.probs));
}

void BM_student_forward(benchmark::State& s) {
  const auto& f = fixture(s.range(0));
  for (auto _ : s) benchmark::DoNotOptimize(student_forward(f.student, f.gt.features));
}
void BM_student_forward_reference(benchmark::State& s) {
  const auto& f = fixture(s.range(0));
  for (auto _ : s) benchmark::DoNotOptimize(reference::student_forward(f.student, f.gt.features));
}

void BM_ce_objective(benchmark::State& s) {
  const auto& f = fixture(s.range(0));
  for (auto _ : s) benchmark::DoNotOptimize(ce_objective(f.student, f.batch));
}
void BM_ce_objective_reference(benchmark::State& s) {
  const auto& f = fixture(s.range(0));
  for (auto _ : s) benchmark::DoNotOptimize(reference::ce_objective(f.student, f.batch));
}

BENCHMARK(BM_unify) SIZES;
BENCHMARK(BM_unify_reference) SIZES;
BENCHMARK(BM_pixel_fuse) SIZES;
BENCHMARK(BM_pixel_fuse_reference) SIZES;
BENCHMARK(BM_channel_fuse) SIZES;
BENCHMARK(BM_channel_fuse_reference) SIZES;
BENCHMARK(BM_per_class_iou) SIZES;
BENCHMARK(BM_per_class_iou_reference) SIZES;
BENCHMARK(BM_average_fuse) SIZES;
BENCHMARK(BM_average_fuse_reference) SIZES;
BENCHMARK(BM_student_forward) SIZES;
BENCHMARK(BM_student_forward_reference) SIZES;
BENCHMARK(BM_ce_objective) SIZES;
BENCHMARK(BM_ce_objective_reference) SIZES;

}  // namespace

int main(int argc, char** argv) {
  parallel::configure_from_env();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
