#include "cli.hpp"

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "segfuse/distill.hpp"
#include "segfuse/error.hpp"
#include "segfuse/experiments.hpp"
#include "segfuse/fusion.hpp"
#include "segfuse/io.hpp"
#include "segfuse/metrics.hpp"
#include "segfuse/policy.hpp"
#include "segfuse/synth.hpp"
#include "segfuse/unification.hpp"

namespace segfuse::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

json scalar_field(std::string_view f) {
  if (f.empty()) return nullptr;
  std::int64_t i = 0;
  auto [pi, ei] = std::from_chars(f.data(), f.data() + f.size(), i);
  if (ei == std::errc() && pi == f.data() + f.size()) return i;
  double d = 0.0;
  auto [pd, ed] = std::from_chars(f.data(), f.data() + f.size(), d);
  if (ed == std::errc() && pd == f.data() + f.size()) return d;
  return std::string(f);
}

// ----------------------------------------------------------------- map helpers

struct MapInput {
  bool logits = false;
};

LabelMap load_unified(const fs::path& path, const MapInput& in) {
  const io::Bytes bytes = io::read_file(path);
  const auto magic = io::sniff_magic(bytes);
  if (magic == "LMAP") return io::read_labelmap(bytes);
  if (magic == "PMAP") return unify(io::read_probmap(bytes, {in.logits}));
  throw FormatError(path.string() + ": not a .pmap or .lmap file");
}

std::vector<LabelMap> load_unified_all(const std::vector<std::string>& paths, const MapInput& in) {
  std::vector<LabelMap> out;
  out.reserve(paths.size());
  for (const auto& p : paths) out.push_back(load_unified(p, in));
  return out;
}

std::vector<ProbMap> load_probmaps(const std::vector<std::string>& paths, const MapInput& in) {
  std::vector<ProbMap> out;
  out.reserve(paths.size());
  for (const auto& p : paths) out.push_back(io::load_probmap(p, {in.logits}));
  return out;
}

json labelmap_json(const LabelMap& m) {
  json labels = json::array();
  for (auto v : m.values()) labels.push_back(v);
  return {{"height", m.height()}, {"width", m.width()}, {"classes", m.classes()}, {"labels", labels}};
}

void emit_json(std::ostream& out, const json& j) { out << j.dump(2) << "\n"; }

void emit_labelmap(const LabelMap& m, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    emit_json(out, labelmap_json(m));
  } else {
    io::write_file_atomic(path, io::write_labelmap(m));
  }
}

void emit_text_report(const std::string& body, const json& as_json, const std::string& path,
                      std::ostream& out) {
  if (path.empty()) {
    emit_json(out, as_json);
  } else {
    io::write_text_atomic(path, body);
  }
}

void emit_csv(const std::string& csv, const std::string& path, std::ostream& out) {
  emit_text_report(csv, csv_to_json(csv), path, out);
}

void emit_json_report(const json& j, const std::string& path, std::ostream& out) {
  emit_text_report(j.dump(2) + "\n", j, path, out);
}

std::vector<std::size_t> parse_size_list(const std::string& text, const char* what) {
  std::vector<std::size_t> out;
  for (auto f : split(text, ',')) {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (f.empty() || ec != std::errc() || p != f.data() + f.size()) {
      throw ValidationError(std::string(what) + ": cannot parse '" + std::string(f) + "'");
    }
    out.push_back(v);
  }
  return out;
}

// ------------------------------------------------------------ training options

struct TrainOptions {
  std::string config_path;
  std::optional<std::size_t> iterations;
  std::optional<double> lr;
  std::optional<double> momentum;
  std::optional<double> weight_decay;
  std::optional<double> init_scale;

  void attach(CLI::App* app) {
    app->add_option("--train-config", config_path, "Training config JSON");
    app->add_option("--iterations", iterations, "SGD iterations");
    app->add_option("--lr", lr, "Base learning rate");
    app->add_option("--momentum", momentum, "Momentum");
    app->add_option("--weight-decay", weight_decay, "Weight decay");
    app->add_option("--init-scale", init_scale, "Std-dev of the initial weights");
  }

  TrainConfig resolve(std::uint64_t seed) const {
    TrainConfig c = config_path.empty() ? TrainConfig{}
                                        : config_from_json(json::parse(io::read_text(config_path)));
    if (iterations) c.iterations = *iterations;
    if (lr) c.lr = *lr;
    if (momentum) c.momentum = *momentum;
    if (weight_decay) c.weight_decay = *weight_decay;
    if (init_scale) c.init_scale = *init_scale;
    c.seed = seed;
    return config_from_json(config_to_json(c));
  }
};

struct BenchmarkOptions {
  experiments::BenchmarkConfig config{};

  void attach(CLI::App* app, bool with_underperformers) {
    app->add_option("--height", config.height, "Image height")->capture_default_str();
    app->add_option("--width", config.width, "Image width")->capture_default_str();
    app->add_option("--classes", config.classes, "Number of classes")->capture_default_str();
    app->add_option("--region-scale", config.region_scale, "Voronoi region size")
        ->capture_default_str();
    app->add_option("--good", config.good_teachers, "Good teachers")->capture_default_str();
    app->add_option("--min-error", config.min_error, "Lowest per-class flip rate")
        ->capture_default_str();
    app->add_option("--max-error", config.max_error, "Highest per-class flip rate")
        ->capture_default_str();
    app->add_option("--noise", config.features.noise, "Feature noise std-dev")
        ->capture_default_str();
    if (with_underperformers) {
      app->add_option("--underperformers", config.underperformers, "Confidently wrong teachers")
          ->capture_default_str();
    }
  }
};

// -------------------------------------------------------------------- commands

struct Context {
  std::ostream& out;
  std::ostream& err;
};

void add_output(CLI::App* app, std::string& path, const char* what) {
  app->add_option("-o,--output", path, what);
}

}  // namespace

json csv_to_json(std::string_view csv) {
  json rows = json::array();
  std::vector<std::string_view> lines = split(csv, '\n');
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) return rows;
  const auto header = split(lines.front(), ',');
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split(lines[i], ',');
    json row = json::object();
    for (std::size_t k = 0; k < header.size(); ++k) {
      row[std::string(header[k])] = k < fields.size() ? scalar_field(fields[k]) : json(nullptr);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Context ctx{out, err};
  CLI::App app{"Ensemble pseudo-label fusion toolkit", "segfuse"};
  app.require_subcommand(1);
  app.fallthrough(false);

  MapInput map_in;
  auto add_logits_flag = [&](CLI::App* sub) {
    sub->add_flag("--logits", map_in.logits, "Treat .pmap bodies as raw logits (softmax on read)");
  };

  std::vector<std::function<void()>> handlers;
  std::vector<CLI::App*> subs;
  auto command = [&](CLI::App* sub, std::function<void()> fn) {
    subs.push_back(sub);
    handlers.push_back(std::move(fn));
  };

  // unify
  std::string unify_in, unify_out;
  {
    auto* sub = app.add_subcommand("unify", "Argmax a probability map into pseudo labels");
    sub->add_option("input", unify_in, "Input .pmap")->required();
    add_output(sub, unify_out, "Output .lmap");
    add_logits_flag(sub);
    command(sub, [&] {
      emit_labelmap(unify(io::load_probmap(unify_in, {map_in.logits})), unify_out, ctx.out);
    });
  }

  // fuse-pixel
  std::vector<std::string> fp_teachers;
  std::string fp_out;
  {
    auto* sub = app.add_subcommand("fuse-pixel", "Per-pixel majority vote over unified teachers");
    sub->add_option("teachers", fp_teachers, "Teacher .pmap or .lmap files")->required();
    add_output(sub, fp_out, "Output .lmap");
    add_logits_flag(sub);
    command(sub, [&] { emit_labelmap(pixel_fuse(load_unified_all(fp_teachers, map_in)), fp_out, ctx.out); });
  }

  // fuse-channel
  std::vector<std::string> fc_teachers;
  std::string fc_policy, fc_out;
  std::size_t fc_kappa = kDefaultKappa;
  {
    auto* sub = app.add_subcommand("fuse-channel", "Recombine class channels chosen by a policy");
    sub->add_option("teachers", fc_teachers, "Teacher .pmap or .lmap files")->required();
    sub->add_option("--policy", fc_policy, "Policy JSON")->required();
    sub->add_option("--kappa", fc_kappa, "Conflict window side (odd)")->capture_default_str();
    add_output(sub, fc_out, "Output .lmap");
    add_logits_flag(sub);
    command(sub, [&] {
      const FusionPolicy policy = io::policy_from_json(json::parse(io::read_text(fc_policy)));
      emit_labelmap(channel_fuse(load_unified_all(fc_teachers, map_in), policy, fc_kappa), fc_out,
                    ctx.out);
    });
  }

  // eval
  std::string ev_pred, ev_gt, ev_out;
  {
    auto* sub = app.add_subcommand("eval", "Per-class IoU and mIoU against ground truth");
    sub->add_option("--pred", ev_pred, "Prediction .lmap or .pmap")->required();
    sub->add_option("--gt", ev_gt, "Ground-truth .lmap")->required();
    add_output(sub, ev_out, "Output report JSON");
    add_logits_flag(sub);
    command(sub, [&] {
      const IoUReport r = per_class_iou(load_unified(ev_pred, map_in), io::load_labelmap(ev_gt));
      emit_json_report(io::report_to_json(r), ev_out, ctx.out);
    });
  }

  // select-policy
  auto* sel = app.add_subcommand("select-policy", "Build a fusion policy");
  sel->require_subcommand(1);

  std::size_t r_classes = 0, r_teachers = 0;
  std::uint64_t r_seed = 0;
  std::string r_out;
  auto* rnd = sel->add_subcommand("random", "Uniformly random teacher per class");
  rnd->add_option("--classes", r_classes, "Number of classes")->required();
  rnd->add_option("--teachers", r_teachers, "Number of teachers")->required();
  rnd->add_option("--seed", r_seed, "RNG seed")->required();
  add_output(rnd, r_out, "Output policy JSON");
  command(rnd, [&] {
    emit_json_report(io::policy_to_json(select_random(r_classes, r_teachers, r_seed)), r_out,
                     ctx.out);
  });

  std::string o_gt, o_out;
  std::vector<std::string> o_teachers, o_reports;
  auto* orc = sel->add_subcommand("oracle", "Per-class argmax of teacher IoU (needs ground truth)");
  orc->add_option("teachers", o_teachers, "Teacher .pmap or .lmap files");
  orc->add_option("--gt", o_gt, "Ground-truth .lmap (with teacher maps)");
  orc->add_option("--reports", o_reports, "Per-teacher IoU report JSON files (alternative)");
  add_output(orc, o_out, "Output policy JSON");
  add_logits_flag(orc);
  command(orc, [&] {
    std::vector<IoUReport> reports;
    if (!o_reports.empty()) {
      if (!o_teachers.empty()) throw ValidationError("oracle: give teacher maps or --reports, not both");
      for (const auto& p : o_reports) reports.push_back(io::report_from_json(json::parse(io::read_text(p))));
    } else {
      if (o_teachers.empty() || o_gt.empty()) {
        throw ValidationError("oracle: need teacher maps with --gt, or --reports");
      }
      const LabelMap gt = io::load_labelmap(o_gt);
      for (const auto& u : load_unified_all(o_teachers, map_in)) reports.push_back(per_class_iou(u, gt));
    }
    std::vector<std::size_t> fallback;
    const FusionPolicy p = select_oracle(reports, &fallback);
    for (auto c : fallback) {
      ctx.err << json{{"warning", "class undefined for every teacher; assigned teacher 0"}, {"class", c}}.dump()
              << "\n";
    }
    emit_json_report(io::policy_to_json(p), o_out, ctx.out);
  });

  std::string c_table, c_features, c_out, c_rho_out;
  std::vector<std::string> c_teachers;
  std::optional<std::uint64_t> c_seed;
  double c_fraction = kDefaultMeasurementFraction;
  TrainOptions c_train;
  auto* cer = sel->add_subcommand("certainty", "Per-class argmax of student certainty");
  cer->add_option("--table", c_table, "Certainty table CSV");
  cer->add_option("teachers", c_teachers, "Teacher .pmap files (runs the selection protocol)");
  cer->add_option("--features", c_features, "Feature .fmap for the protocol");
  cer->add_option("--seed", c_seed, "Seed for the measurement split and student init");
  cer->add_option("--measurement-fraction", c_fraction, "Held-out share for measuring certainty")
      ->capture_default_str();
  cer->add_option("--rho-out", c_rho_out, "Write the measured certainty table CSV");
  c_train.attach(cer);
  add_output(cer, c_out, "Output policy JSON");
  add_logits_flag(cer);
  command(cer, [&] {
    std::vector<std::size_t> fallback;
    FusionPolicy policy = FusionPolicy::identity_for_single_teacher(2);
    if (!c_table.empty()) {
      if (!c_teachers.empty()) throw ValidationError("certainty: give --table or teacher maps, not both");
      const CertaintyTable t = io::certainty_from_csv(io::read_text(c_table));
      policy = select_certainty(t, &fallback);
    } else {
      if (c_teachers.empty() || c_features.empty() || !c_seed) {
        throw ValidationError("certainty: need --table, or teacher maps with --features and --seed");
      }
      const SelectionResult r = certainty_selection_protocol(
          Ensemble(load_probmaps(c_teachers, map_in)), io::load_featuremap(c_features), c_fraction,
          c_train.resolve(*c_seed));
      if (!c_rho_out.empty()) io::write_text_atomic(c_rho_out, io::certainty_to_csv(r.rho));
      policy = r.policy;
      fallback = r.fallback_classes;
    }
    for (auto c : fallback) {
      ctx.err << json{{"warning", "class undefined for every teacher; assigned teacher 0"}, {"class", c}}.dump()
              << "\n";
    }
    emit_json_report(io::policy_to_json(policy), c_out, ctx.out);
  });

  // distill
  std::string d_features, d_labels, d_out, d_trace, d_eval_features, d_eval_out, d_src_features,
      d_src_labels;
  std::uint64_t d_seed = 0;
  std::optional<double> d_mix;
  TrainOptions d_train;
  {
    auto* sub = app.add_subcommand("distill", "Train the toy student on fused labels");
    sub->add_option("--features", d_features, "Feature .fmap")->required();
    sub->add_option("--labels", d_labels, "Fused .lmap (unlabeled pixels are ignored)")->required();
    sub->add_option("--seed", d_seed, "Seed for the student init")->required();
    sub->add_option("--source-features", d_src_features, "Optional labeled source-stream features");
    sub->add_option("--source-labels", d_src_labels, "Optional labeled source-stream labels");
    sub->add_option("--source-mix", d_mix, "Weight of the source stream");
    sub->add_option("--trace", d_trace, "Write the loss trace CSV");
    sub->add_option("--eval-features", d_eval_features,
                    "Run the student on these features instead of --features");
    d_train.attach(sub);
    add_output(sub, d_out, "Output student .pmap");
    command(sub, [&] {
      TrainConfig cfg = d_train.resolve(d_seed);
      if (d_mix) cfg.source_mix = *d_mix;
      const FeatureMap feats = io::load_featuremap(d_features);
      const PixelBatch target = gather_labeled(feats, io::load_labelmap(d_labels));
      std::optional<PixelBatch> source;
      if (!d_src_features.empty() || !d_src_labels.empty()) {
        if (d_src_features.empty() || d_src_labels.empty()) {
          throw ValidationError("distill: --source-features and --source-labels go together");
        }
        source = gather_labeled(io::load_featuremap(d_src_features), io::load_labelmap(d_src_labels));
      }
      const TrainResult result = train_student(target, cfg, source ? &*source : nullptr);
      if (!d_trace.empty()) io::write_text_atomic(d_trace, loss_trace_to_csv(result.loss_trace));
      const FeatureMap eval = d_eval_features.empty() ? feats : io::load_featuremap(d_eval_features);
      const ProbMap student = student_forward(result.model, eval);
      if (d_out.empty()) {
        json params = json::array();
        for (double v : result.model.parameters()) params.push_back(v);
        emit_json(ctx.out, {{"classes", result.model.classes()},
                            {"dims", result.model.dims()},
                            {"config", config_to_json(cfg)},
                            {"final_loss", result.loss_trace.empty() ? 0.0 : result.loss_trace.back()},
                            {"parameters", params}});
      } else {
        io::write_file_atomic(d_out, io::write_probmap(student));
      }
    });
  }

  // synth
  BenchmarkOptions s_bench;
  std::uint64_t s_seed = 0;
  std::string s_dir;
  {
    auto* sub = app.add_subcommand("synth", "Generate a synthetic benchmark instance");
    s_bench.attach(sub, true);
    sub->add_option("--seed", s_seed, "Benchmark seed")->required();
    sub->add_option("--out-dir", s_dir, "Directory for the generated files")->required();
    command(sub, [&] {
      const auto b = experiments::make_benchmark(s_bench.config, s_seed);
      std::error_code ec;
      fs::create_directories(s_dir, ec);
      if (ec) throw IoError("cannot create " + s_dir + ": " + ec.message());
      const fs::path dir(s_dir);
      json files = json::object();
      io::write_file_atomic(dir / "gt.lmap", io::write_labelmap(b.gt));
      io::write_file_atomic(dir / "features.fmap", io::write_featuremap(b.features));
      files["gt"] = "gt.lmap";
      files["features"] = "features.fmap";
      json teachers = json::array();
      for (std::size_t t = 0; t < b.good.size(); ++t) {
        const std::string name = "teacher_" + std::to_string(t) + ".pmap";
        io::write_file_atomic(dir / name, io::write_probmap(b.good[t]));
        teachers.push_back({{"file", name},
                            {"per_class_error", b.good_errors[t]},
                            {"temperature", b.good_temperatures[t]}});
      }
      json bad = json::array();
      for (std::size_t t = 0; t < b.bad.size(); ++t) {
        const std::string name = "underperformer_" + std::to_string(t) + ".pmap";
        io::write_file_atomic(dir / name, io::write_probmap(b.bad[t]));
        bad.push_back(name);
      }
      files["teachers"] = teachers;
      files["underperformers"] = bad;
      const json manifest = {{"seed", s_seed}, {"config", experiments::to_json(s_bench.config)}, {"files", files}};
      io::write_text_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
    });
  }

  // experiment
  auto* ex = app.add_subcommand("experiment", "Synthetic benchmark experiments");
  ex->require_subcommand(1);

  struct Common {
    BenchmarkOptions bench;
    TrainOptions train;
    std::uint64_t seed = 0;
    std::size_t seeds = 10;
    std::size_t kappa = kDefaultKappa;
    double fraction = kDefaultMeasurementFraction;
    std::string out;

    experiments::ProtocolSettings settings() const {
      return {train.resolve(seed), fraction, kappa};
    }
    std::vector<std::uint64_t> seed_list() const { return experiments::seed_range(seed, seeds); }
  };
  Common ks, rb, fx, pc, co;

  auto attach_common = [&](CLI::App* sub, Common& c, bool protocol, bool underperformers) {
    c.bench.attach(sub, underperformers);
    sub->add_option("--seed", c.seed, "Base seed")->required();
    sub->add_option("--seeds", c.seeds, "Number of consecutive benchmark seeds")->capture_default_str();
    if (protocol) {
      c.train.attach(sub);
      sub->add_option("--kappa", c.kappa, "Conflict window side (odd)")->capture_default_str();
      sub->add_option("--measurement-fraction", c.fraction, "Held-out share for measuring certainty")
          ->capture_default_str();
    }
    add_output(sub, c.out, "Output CSV");
  };

  std::string ks_kappas = "1,3,5,7,9,11,13,15,17,19,21,23,25,27";
  auto* kss = ex->add_subcommand("kernel-sweep", "mIoU gain over kappa=1 under a random policy");
  attach_common(kss, ks, false, false);
  kss->add_option("--kappas", ks_kappas, "Comma-separated kappa list (must include 1)")
      ->capture_default_str();
  command(kss, [&] {
    const auto kappas = parse_size_list(ks_kappas, "--kappas");
    emit_csv(experiments::to_csv(experiments::kernel_sweep(ks.bench.config, ks.seed_list(), kappas)),
             ks.out, ctx.out);
  });

  std::size_t rb_max_k = 3;
  auto* rbs = ex->add_subcommand("robustness", "Pseudo-label mIoU as under-performers are added");
  attach_common(rbs, rb, true, false);
  rbs->add_option("--max-k", rb_max_k, "Largest number of under-performers")->capture_default_str();
  command(rbs, [&] {
    emit_csv(experiments::to_csv(
                 experiments::robustness(rb.bench.config, rb.seed_list(), rb_max_k, rb.settings())),
             rb.out, ctx.out);
  });

  std::size_t fx_rounds = 3;
  auto* fxs = ex->add_subcommand("flexibility", "Re-add distilled students to the ensemble");
  attach_common(fxs, fx, true, true);
  fxs->add_option("--rounds", fx_rounds, "Distillation rounds")->capture_default_str();
  command(fxs, [&] {
    emit_csv(experiments::to_csv(
                 experiments::flexibility(fx.bench.config, fx.seed, fx_rounds, fx.settings())),
             fx.out, ctx.out);
  });

  std::size_t pr_prop = 1, pr_instances = 500;
  std::uint64_t pr_seed = 0;
  std::string pr_out;
  auto* prs = ex->add_subcommand("prop-check", "Check the fusion propositions on random instances");
  prs->add_option("--proposition", pr_prop, "1 (lower bound) or 2 (optimality)")->capture_default_str();
  prs->add_option("--instances", pr_instances, "Instances meeting the hypothesis")->capture_default_str();
  prs->add_option("--seed", pr_seed, "Generator seed")->required();
  add_output(prs, pr_out, "Output JSON lines");
  command(prs, [&] {
    const auto check = experiments::prop_check(pr_prop, pr_instances, pr_seed);
    json summary = {{"proposition", check.proposition},
                    {"attempts", check.attempts},
                    {"precondition_met", check.precondition_met},
                    {"violations", check.violations}};
    if (pr_out.empty()) {
      summary["results"] = check.lines;
    } else {
      io::write_text_atomic(pr_out, experiments::to_jsonl(check));
    }
    emit_json(ctx.out, summary);
  });

  auto* pcs = ex->add_subcommand("policy-compare", "Random vs certainty vs oracle policies");
  attach_common(pcs, pc, true, false);
  command(pcs, [&] {
    emit_csv(experiments::to_csv(
                 experiments::policy_comparison(pc.bench.config, pc.seed_list(), pc.settings())),
             pc.out, ctx.out);
  });

  auto* cos = ex->add_subcommand("correlation", "Cosine similarity of certainty and IoU per class");
  attach_common(cos, co, true, false);
  command(cos, [&] {
    emit_csv(experiments::to_csv(
                 experiments::correlation(co.bench.config, co.seed_list(), co.settings())),
             co.out, ctx.out);
  });

  auto report_error = [&](const char* kind, const std::string& message) {
    ctx.err << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << "\n";
  };

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, ctx.out, ctx.err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, ctx.out, ctx.err);
  } catch (const CLI::ParseError& e) {
    report_error("usage", e.what());
    return kExitUsage;
  }

  try {
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (subs[i]->parsed()) {
        handlers[i]();
        return kExitOk;
      }
    }
    report_error("usage", "no command given");
    return kExitUsage;
  } catch (const IoError& e) {
    report_error(e.kind(), e.what());
    return kExitIo;
  } catch (const Error& e) {
    report_error(e.kind(), e.what());
    return kExitValidation;
  } catch (const json::exception& e) {
    report_error("format", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    report_error("internal", e.what());
    return kExitInternal;
  }
}

}  // namespace segfuse::cli
