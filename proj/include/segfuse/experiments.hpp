#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "segfuse/distill.hpp"
#include "segfuse/fusion.hpp"
#include "segfuse/synth.hpp"
#include "segfuse/types.hpp"

namespace segfuse::experiments {

/// The standard synthetic benchmark: Voronoi ground truth, class-conditional
/// features, a set of good teachers with per-class error rates drawn so their
/// per-class IoU lands around 0.6-0.9 at assorted certainty temperatures, and a
/// pool of confidently wrong under-performers sharing one confusion map.
struct BenchmarkConfig {
  std::size_t height = 64;
  std::size_t width = 64;
  std::size_t classes = 8;
  double region_scale = 12.0;
  std::size_t good_teachers = 4;
  double min_error = 0.05;
  double max_error = 0.25;
  double min_temperature = 0.25;
  double max_temperature = 4.0;
  std::size_t underperformers = 3;
  synth::UnderperformerParams underperformer{};
  synth::FeatureParams features{};
};

nlohmann::json to_json(const BenchmarkConfig& config);

struct Benchmark {
  LabelMap gt;
  FeatureMap features;
  std::vector<ProbMap> good;
  std::vector<ProbMap> bad;
  /// Per good teacher, the per-class flip rates used to corrupt it.
  std::vector<std::vector<double>> good_errors;
  std::vector<double> good_temperatures;
};

Benchmark make_benchmark(const BenchmarkConfig& config, std::uint64_t seed);

/// Seeds 0..n-1 offset by `base`.
std::vector<std::uint64_t> seed_range(std::uint64_t base, std::size_t n);

/// Settings shared by experiments that run the certainty-aware selection protocol.
struct ProtocolSettings {
  TrainConfig train{};
  double measurement_fraction = kDefaultMeasurementFraction;
  std::size_t kappa = kDefaultKappa;
};

nlohmann::json to_json(const ProtocolSettings& settings);

// ---------------------------------------------------------------- kernel sweep

struct KernelSweepRow {
  std::optional<std::uint64_t> seed;  ///< empty for the across-seed mean row
  std::size_t kappa = 1;
  double miou = 0.0;
  double gain = 0.0;  ///< miou(kappa) - miou(1), mIoU as a fraction
};

struct KernelSweep {
  std::vector<KernelSweepRow> per_seed;
  std::vector<KernelSweepRow> mean;
};

/// Channel fusion of the good teachers under a random policy for every kappa.
KernelSweep kernel_sweep(const BenchmarkConfig& config, std::span<const std::uint64_t> seeds,
                         std::span<const std::size_t> kappas);

/// CSV "seed,kappa,miou,gain"; mean rows carry seed "mean".
std::string to_csv(const KernelSweep& sweep);

// ------------------------------------------------------------------ robustness

struct RobustnessRow {
  std::optional<std::uint64_t> seed;
  std::size_t underperformers = 0;
  double pixel = 0.0;
  double channel = 0.0;
  double average = 0.0;
  /// True when the certainty policy hands some class to an under-performer.
  bool channel_uses_underperformer = false;
};

struct Robustness {
  std::vector<RobustnessRow> per_seed;
  std::vector<RobustnessRow> mean;
};

/// Pseudo-label mIoU of pixel fusion, channel fusion with the certainty policy, and
/// the averaging baseline as 0..max_k under-performers are appended.
Robustness robustness(const BenchmarkConfig& config, std::span<const std::uint64_t> seeds,
                      std::size_t max_k, const ProtocolSettings& settings);

/// CSV "seed,k,pixel,channel,average,channel_uses_underperformer".
std::string to_csv(const Robustness& result);

// ------------------------------------------------------------ policy comparison

struct PolicyRow {
  std::optional<std::uint64_t> seed;
  double random = 0.0;
  double certainty = 0.0;
  double oracle = 0.0;
  double random_overlap = 0.0;  ///< |A_o| / |I|
  double certainty_overlap = 0.0;
  double oracle_overlap = 0.0;
};

struct PolicyComparison {
  std::vector<PolicyRow> per_seed;
  PolicyRow mean;
};

/// Fused mIoU of the good teachers under random, certainty-aware and oracle policies.
PolicyComparison policy_comparison(const BenchmarkConfig& config,
                                   std::span<const std::uint64_t> seeds,
                                   const ProtocolSettings& settings);

std::string to_csv(const PolicyComparison& result);

// ----------------------------------------------------------------- correlation

struct CorrelationRow {
  std::uint64_t seed = 0;
  std::size_t cls = 0;
  std::optional<double> cosine;
};

/// Cosine similarity between rho(c, .) and Phi(c, .) over the good teachers.
std::vector<CorrelationRow> correlation(const BenchmarkConfig& config,
                                        std::span<const std::uint64_t> seeds,
                                        const ProtocolSettings& settings);

/// CSV "seed,class,cosine".
std::string to_csv(std::span<const CorrelationRow> rows);

// ----------------------------------------------------------------- flexibility

struct FlexibilityRow {
  std::size_t round = 0;
  std::size_t ensemble_size = 0;
  double fused_miou = 0.0;
  double student_miou = 0.0;
};

/// Each round runs selection, distils a student on the channel-fused labels,
/// scores it on a held-out image and appends its output to the ensemble.
std::vector<FlexibilityRow> flexibility(const BenchmarkConfig& config, std::uint64_t seed,
                                        std::size_t rounds, const ProtocolSettings& settings);

/// CSV "round,ensemble_size,fused_miou,student_miou".
std::string to_csv(std::span<const FlexibilityRow> rows);

// ------------------------------------------------------------------ prop check

struct PropCheck {
  std::size_t proposition = 1;
  std::size_t attempts = 0;
  std::size_t precondition_met = 0;
  std::size_t violations = 0;
  /// One JSON object per instance that met the precondition.
  std::vector<nlohmann::json> lines;
};

/// Generates instances until `instances` of them meet the proposition's hypothesis
/// (or attempts run out) and checks each.
PropCheck prop_check(std::size_t proposition, std::size_t instances, std::uint64_t seed);

/// JSON lines, one per checked instance.
std::string to_jsonl(const PropCheck& check);

}  // namespace segfuse::experiments
