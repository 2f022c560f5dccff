#include "segfuse/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "segfuse/error.hpp"
#include "segfuse/io.hpp"
#include "segfuse/metrics.hpp"
#include "segfuse/policy.hpp"
#include "segfuse/propositions.hpp"
#include "segfuse/random.hpp"
#include "segfuse/unification.hpp"

namespace segfuse::experiments {

namespace {

using io::format_double;

double miou_of(const LabelMap& pred, const LabelMap& gt) {
  return per_class_iou(pred, gt).miou().value_or(0.0);
}

std::vector<LabelMap> unify_all(std::span<const ProbMap> teachers) {
  std::vector<LabelMap> out;
  out.reserve(teachers.size());
  for (const auto& t : teachers) out.push_back(unify(t));
  return out;
}

std::vector<IoUReport> teacher_reports(std::span<const LabelMap> unified, const LabelMap& gt) {
  std::vector<IoUReport> out;
  for (const auto& u : unified) out.push_back(per_class_iou(u, gt));
  return out;
}

std::string seed_field(const std::optional<std::uint64_t>& seed) {
  return seed ? std::to_string(*seed) : std::string("mean");
}

double overlap_ratio(std::span<const LabelMap> unified, const FusionPolicy& policy) {
  const ChannelSets sets = build_channel_sets(unified, policy);
  return static_cast<double>(sets.overlap().size()) / static_cast<double>(sets.pixels());
}

// Salts separating the random streams a benchmark seed feeds.
constexpr std::uint64_t kPolicySalt = 0x706f6c6963790000ULL;
constexpr std::uint64_t kValidationSalt = 0x76616c0000000000ULL;

}  // namespace

nlohmann::json to_json(const BenchmarkConfig& c) {
  return {{"height", c.height},
          {"width", c.width},
          {"classes", c.classes},
          {"region_scale", c.region_scale},
          {"good_teachers", c.good_teachers},
          {"min_error", c.min_error},
          {"max_error", c.max_error},
          {"min_temperature", c.min_temperature},
          {"max_temperature", c.max_temperature},
          {"underperformers", c.underperformers},
          {"underperformer_error", c.underperformer.error},
          {"underperformer_temperature", c.underperformer.temperature},
          {"underperformer_shift_seed", c.underperformer.shift_seed},
          {"feature_dims", c.features.dims},
          {"feature_noise", c.features.noise},
          {"feature_separation", c.features.separation}};
}

nlohmann::json to_json(const ProtocolSettings& s) {
  return {{"train", config_to_json(s.train)},
          {"measurement_fraction", s.measurement_fraction},
          {"kappa", s.kappa}};
}

Benchmark make_benchmark(const BenchmarkConfig& config, std::uint64_t seed) {
  if (config.good_teachers == 0) throw ValidationError("benchmark: need at least one good teacher");
  if (!(config.min_error >= 0.0 && config.min_error <= config.max_error && config.max_error <= 1.0)) {
    throw ValidationError("benchmark: invalid error range");
  }
  if (!(config.min_temperature > 0.0 && config.min_temperature <= config.max_temperature)) {
    throw ValidationError("benchmark: invalid temperature range");
  }
  Rng rng(seed);
  auto gt = synth::gen_ground_truth(config.height, config.width, config.classes, config.region_scale,
                                    rng.next_u64(), config.features);

  Benchmark b{std::move(gt.labels), std::move(gt.features), {}, {}, {}, {}};
  const double log_lo = std::log(config.min_temperature);
  const double log_hi = std::log(config.max_temperature);
  for (std::size_t t = 0; t < config.good_teachers; ++t) {
    synth::Corruption corruption;
    corruption.per_class_error.resize(config.classes);
    for (double& e : corruption.per_class_error) e = rng.uniform(config.min_error, config.max_error);
    corruption.temperature = std::exp(rng.uniform(log_lo, log_hi));
    corruption.seed = rng.next_u64();
    b.good.push_back(synth::corrupt_teacher(b.gt, corruption));
    b.good_errors.push_back(corruption.per_class_error);
    b.good_temperatures.push_back(corruption.temperature);
  }
  synth::UnderperformerParams bad = config.underperformer;
  bad.shift_seed = config.underperformer.shift_seed ^ rng.next_u64();
  for (std::size_t j = 0; j < config.underperformers; ++j) {
    b.bad.push_back(synth::gen_underperformer(b.gt, rng.next_u64(), bad));
  }
  return b;
}

std::vector<std::uint64_t> seed_range(std::uint64_t base, std::size_t n) {
  std::vector<std::uint64_t> out(n);
  std::iota(out.begin(), out.end(), base);
  return out;
}

KernelSweep kernel_sweep(const BenchmarkConfig& config, std::span<const std::uint64_t> seeds,
                         std::span<const std::size_t> kappas) {
  if (std::find(kappas.begin(), kappas.end(), std::size_t{1}) == kappas.end()) {
    throw ValidationError("kernel sweep: kappa list must include 1");
  }
  for (auto k : kappas) require_valid_kappa(k);
  if (seeds.empty()) throw ValidationError("kernel sweep: no seeds");

  KernelSweep out;
  std::vector<double> sum_miou(kappas.size(), 0.0), sum_gain(kappas.size(), 0.0);
  for (auto seed : seeds) {
    BenchmarkConfig clean = config;
    clean.underperformers = 0;
    const Benchmark b = make_benchmark(clean, seed);
    const auto unified = unify_all(b.good);
    const FusionPolicy policy = select_random(config.classes, unified.size(), seed ^ kPolicySalt);
    const double base = miou_of(channel_fuse(unified, policy, 1), b.gt);
    for (std::size_t i = 0; i < kappas.size(); ++i) {
      const double m = kappas[i] == 1 ? base : miou_of(channel_fuse(unified, policy, kappas[i]), b.gt);
      out.per_seed.push_back({seed, kappas[i], m, m - base});
      sum_miou[i] += m;
      sum_gain[i] += m - base;
    }
  }
  const double n = static_cast<double>(seeds.size());
  for (std::size_t i = 0; i < kappas.size(); ++i) {
    out.mean.push_back({std::nullopt, kappas[i], sum_miou[i] / n, sum_gain[i] / n});
  }
  return out;
}

std::string to_csv(const KernelSweep& sweep) {
  std::string out = "seed,kappa,miou,gain\n";
  for (const auto* rows : {&sweep.per_seed, &sweep.mean}) {
    for (const auto& r : *rows) {
      out += seed_field(r.seed) + "," + std::to_string(r.kappa) + "," + format_double(r.miou) + "," +
             format_double(r.gain) + "\n";
    }
  }
  return out;
}

Robustness robustness(const BenchmarkConfig& config, std::span<const std::uint64_t> seeds,
                      std::size_t max_k, const ProtocolSettings& settings) {
  if (seeds.empty()) throw ValidationError("robustness: no seeds");
  BenchmarkConfig cfg = config;
  cfg.underperformers = max_k;

  Robustness out;
  std::vector<RobustnessRow> sums(max_k + 1);
  for (auto seed : seeds) {
    const Benchmark b = make_benchmark(cfg, seed);
    std::vector<ProbMap> all = b.good;
    all.insert(all.end(), b.bad.begin(), b.bad.end());
    const auto unified = unify_all(all);

    // Each teacher's student depends only on that teacher, the features and the
    // shared seed, so one protocol run over the largest ensemble yields every
    // smaller ensemble's certainty table as a column subset.
    const SelectionResult full =
        certainty_selection_protocol(Ensemble(all), b.features, settings.measurement_fraction,
                                     settings.train);

    for (std::size_t k = 0; k <= max_k; ++k) {
      const std::size_t m = b.good.size() + k;
      const std::span<const LabelMap> members(unified.data(), m);
      std::vector<std::size_t> columns(m);
      std::iota(columns.begin(), columns.end(), std::size_t{0});
      const FusionPolicy policy = select_certainty(full.rho.select_teachers(columns));

      RobustnessRow row;
      row.seed = seed;
      row.underperformers = k;
      row.pixel = miou_of(pixel_fuse(members), b.gt);
      row.channel = miou_of(channel_fuse(members, policy, settings.kappa), b.gt);
      row.average = miou_of(unify(average_fuse(std::span<const ProbMap>(all.data(), m))), b.gt);
      for (auto t : policy.assignment()) row.channel_uses_underperformer |= t >= b.good.size();
      out.per_seed.push_back(row);

      sums[k].pixel += row.pixel;
      sums[k].channel += row.channel;
      sums[k].average += row.average;
      sums[k].channel_uses_underperformer |= row.channel_uses_underperformer;
    }
  }
  const double n = static_cast<double>(seeds.size());
  for (std::size_t k = 0; k <= max_k; ++k) {
    RobustnessRow r = sums[k];
    r.underperformers = k;
    r.pixel /= n;
    r.channel /= n;
    r.average /= n;
    out.mean.push_back(r);
  }
  return out;
}

std::string to_csv(const Robustness& result) {
  std::string out = "seed,k,pixel,channel,average,channel_uses_underperformer\n";
  for (const auto* rows : {&result.per_seed, &result.mean}) {
    for (const auto& r : *rows) {
      out += seed_field(r.seed) + "," + std::to_string(r.underperformers) + "," +
             format_double(r.pixel) + "," + format_double(r.channel) + "," +
             format_double(r.average) + "," + (r.channel_uses_underperformer ? "1" : "0") + "\n";
    }
  }
  return out;
}

PolicyComparison policy_comparison(const BenchmarkConfig& config,
                                   std::span<const std::uint64_t> seeds,
                                   const ProtocolSettings& settings) {
  if (seeds.empty()) throw ValidationError("policy comparison: no seeds");
  BenchmarkConfig clean = config;
  clean.underperformers = 0;
  PolicyComparison out;
  for (auto seed : seeds) {
    const Benchmark b = make_benchmark(clean, seed);
    const auto unified = unify_all(b.good);
    const FusionPolicy rnd = select_random(config.classes, unified.size(), seed ^ kPolicySalt);
    const FusionPolicy tgt = select_oracle(teacher_reports(unified, b.gt));
    const FusionPolicy cert = certainty_selection_protocol(Ensemble(b.good), b.features,
                                                           settings.measurement_fraction,
                                                           settings.train)
                                  .policy;
    PolicyRow row;
    row.seed = seed;
    row.random = miou_of(channel_fuse(unified, rnd, settings.kappa), b.gt);
    row.certainty = miou_of(channel_fuse(unified, cert, settings.kappa), b.gt);
    row.oracle = miou_of(channel_fuse(unified, tgt, settings.kappa), b.gt);
    row.random_overlap = overlap_ratio(unified, rnd);
    row.certainty_overlap = overlap_ratio(unified, cert);
    row.oracle_overlap = overlap_ratio(unified, tgt);
    out.per_seed.push_back(row);
  }
  const double n = static_cast<double>(seeds.size());
  for (const auto& r : out.per_seed) {
    out.mean.random += r.random / n;
    out.mean.certainty += r.certainty / n;
    out.mean.oracle += r.oracle / n;
    out.mean.random_overlap += r.random_overlap / n;
    out.mean.certainty_overlap += r.certainty_overlap / n;
    out.mean.oracle_overlap += r.oracle_overlap / n;
  }
  return out;
}

std::string to_csv(const PolicyComparison& result) {
  std::string out =
      "seed,random,certainty,oracle,random_overlap,certainty_overlap,oracle_overlap\n";
  auto line = [&](const PolicyRow& r) {
    out += seed_field(r.seed) + "," + format_double(r.random) + "," + format_double(r.certainty) +
           "," + format_double(r.oracle) + "," + format_double(r.random_overlap) + "," +
           format_double(r.certainty_overlap) + "," + format_double(r.oracle_overlap) + "\n";
  };
  for (const auto& r : result.per_seed) line(r);
  line(result.mean);
  return out;
}

std::vector<CorrelationRow> correlation(const BenchmarkConfig& config,
                                        std::span<const std::uint64_t> seeds,
                                        const ProtocolSettings& settings) {
  BenchmarkConfig clean = config;
  clean.underperformers = 0;
  std::vector<CorrelationRow> out;
  for (auto seed : seeds) {
    const Benchmark b = make_benchmark(clean, seed);
    const auto reports = teacher_reports(unify_all(b.good), b.gt);
    const SelectionResult sel = certainty_selection_protocol(
        Ensemble(b.good), b.features, settings.measurement_fraction, settings.train);
    const auto cos = certainty_iou_cosine(sel.rho, reports);
    for (std::size_t c = 0; c < cos.size(); ++c) out.push_back({seed, c, cos[c]});
  }
  return out;
}

std::string to_csv(std::span<const CorrelationRow> rows) {
  std::string out = "seed,class,cosine\n";
  for (const auto& r : rows) {
    out += std::to_string(r.seed) + "," + std::to_string(r.cls) + "," +
           (r.cosine ? format_double(*r.cosine) : std::string()) + "\n";
  }
  return out;
}

std::vector<FlexibilityRow> flexibility(const BenchmarkConfig& config, std::uint64_t seed,
                                        std::size_t rounds, const ProtocolSettings& settings) {
  if (rounds == 0) throw ValidationError("flexibility: rounds must be >= 1");
  const Benchmark b = make_benchmark(config, seed);
  const auto validation = synth::gen_ground_truth(config.height, config.width, config.classes,
                                                  config.region_scale, seed ^ kValidationSalt,
                                                  config.features);
  std::vector<ProbMap> initial = b.good;
  initial.insert(initial.end(), b.bad.begin(), b.bad.end());
  Ensemble ensemble(std::move(initial));

  std::vector<FlexibilityRow> out;
  for (std::size_t round = 1; round <= rounds; ++round) {
    const SelectionResult sel = certainty_selection_protocol(
        ensemble, b.features, settings.measurement_fraction, settings.train);
    const LabelMap fused = channel_fuse(unify_all(ensemble.teachers()), sel.policy, settings.kappa);
    const TrainResult student = train_student(b.features, fused, settings.train);

    FlexibilityRow row;
    row.round = round;
    row.ensemble_size = ensemble.size();
    row.fused_miou = miou_of(fused, b.gt);
    row.student_miou =
        miou_of(unify(student_forward(student.model, validation.features)), validation.labels);
    out.push_back(row);
    ensemble.append(student_forward(student.model, b.features));
  }
  return out;
}

std::string to_csv(std::span<const FlexibilityRow> rows) {
  std::string out = "round,ensemble_size,fused_miou,student_miou\n";
  for (const auto& r : rows) {
    out += std::to_string(r.round) + "," + std::to_string(r.ensemble_size) + "," +
           format_double(r.fused_miou) + "," + format_double(r.student_miou) + "\n";
  }
  return out;
}

PropCheck prop_check(std::size_t proposition, std::size_t instances, std::uint64_t seed) {
  if (proposition != 1 && proposition != 2) {
    throw ValidationError("prop check: proposition must be 1 or 2");
  }
  PropCheck out;
  out.proposition = proposition;
  Rng rng(seed);
  const std::size_t max_attempts = std::max<std::size_t>(instances * 50, 100);
  while (out.precondition_met < instances && out.attempts < max_attempts) {
    ++out.attempts;
    nlohmann::json line;
    bool met = false;
    bool ok = true;
    if (proposition == 1) {
      const auto r = props::check_prop1(props::generate_prop1_instance(rng));
      met = r.precondition_met;
      ok = !met || r.holds.value_or(false);
      line = props::to_json(r);
    } else {
      const auto r = props::check_prop2(props::generate_prop2_instance(rng));
      met = r.precondition_met;
      ok = !met || r.holds;
      line = props::to_json(r);
    }
    if (!met) continue;
    line["instance"] = out.precondition_met;
    ++out.precondition_met;
    out.violations += !ok;
    out.lines.push_back(std::move(line));
  }
  return out;
}

std::string to_jsonl(const PropCheck& check) {
  std::string out;
  for (const auto& l : check.lines) out += l.dump() + "\n";
  return out;
}

}  // namespace segfuse::experiments
