#include "ssan/experiment.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>
#include <utility>

#include "ssan/errors.hpp"
#include "ssan/eval.hpp"
#include "ssan/grad_check.hpp"
#include "ssan/losses.hpp"
#include "ssan/model.hpp"
#include "ssan/rng.hpp"
#include "ssan/semantics.hpp"

namespace ssan {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string basename(const std::string& path) {
  return fs::path(path).filename().string();
}

std::string task_name(const DataSource& d) {
  if (d.used_synth) return "synth";
  const std::string target = !d.target_pool_path.empty()
                                 ? basename(d.target_pool_path)
                                 : basename(d.target_labeled_path);
  return basename(d.source_path) + "->" + target;
}

void require_all_labeled(const std::vector<int>& labels, const std::string& path) {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] < 0)
      throw ProtocolError("'" + path + "' row " + std::to_string(i + 1) +
                          " is unlabeled but this file must be fully labeled");
}

std::size_t infer_classes(const std::vector<int>& y_s,
                          const std::vector<int>& y_l) {
  int mx = -1;
  for (int y : y_s) mx = std::max(mx, y);
  for (int y : y_l) mx = std::max(mx, y);
  if (mx < 0) throw ProtocolError("no labeled instance in the inputs");
  return static_cast<std::size_t>(mx) + 1;
}

}  // namespace

HdaDataset load_dataset(const DataSource& d, std::uint64_t seed) {
  HdaDataset ds;
  if (d.used_synth) {
    SynthSpec s = d.synth;
    s.seed = seed;
    ds = synth_generate(s);
  } else {
    LoadedCsv src = load_feature_csv(d.source_path);
    require_all_labeled(src.labels, d.source_path);
    ds.x_s = std::move(src.x);
    ds.y_s = std::move(src.labels);
    if (!d.target_pool_path.empty()) {
      LoadedCsv pool = load_feature_csv(d.target_pool_path);
      require_all_labeled(pool.labels, d.target_pool_path);
      SplitResult sp = split_protocol(pool.x, pool.labels, d.m, seed);
      ds.x_l = std::move(sp.x_l);
      ds.y_l = std::move(sp.y_l);
      ds.x_u = std::move(sp.x_u);
      ds.y_u_truth = std::move(sp.y_u_truth);
    } else {
      LoadedCsv lab = load_feature_csv(d.target_labeled_path);
      require_all_labeled(lab.labels, d.target_labeled_path);
      LoadedCsv unl = load_feature_csv(d.target_unlabeled_path);
      ds.x_l = std::move(lab.x);
      ds.y_l = std::move(lab.labels);
      ds.x_u = std::move(unl.x);
      // Labels in the unlabeled file, when all present, serve as held-out
      // ground truth for evaluation; they never reach the training path.
      bool all_known = !unl.labels.empty();
      for (int y : unl.labels) all_known = all_known && y >= 0;
      if (all_known) ds.y_u_truth = std::move(unl.labels);
    }
    ds.K = infer_classes(ds.y_s, ds.y_l);
  }
  validate_dataset(ds);
  standardize_dataset(ds);
  return ds;
}

std::map<std::string, double> loss_gradcheck_errors(std::uint64_t seed) {
  const std::size_t K = 2;
  SsanModel model = init_model({5, 4, 3, 3, K}, {seed});
  Rng rng(seed, Rng::Stream::Synth);
  Matrix x_s(4, 5), x_l(4, 4), x_u(4, 4);
  for (auto& v : x_s.data()) v = rng.gaussian();
  for (auto& v : x_l.data()) v = rng.gaussian();
  for (auto& v : x_u.data()) v = rng.gaussian();
  const std::vector<int> y_s{0, 1, 0, 1};
  const std::vector<int> y_l{0, 1, 1, 0};

  // Quantities the per-epoch refresh would detach stay fixed at the base
  // point, exactly as the objective treats them within an epoch.
  const LossWeights w;
  Matrix z_s0 = encode_source(model, x_s);
  Matrix z_l0 = encode_target(model, x_l);
  Matrix z_u0 = encode_target(model, x_u);
  const SoftLabelBank bank =
      compute_soft_labels(classify(model, z_s0), y_s, K, w.temperature);
  const CentroidSet cents = supervised_centroids(z_s0, y_s, z_l0, y_l, K);
  const PseudoLabelAssignment assignment =
      refine_pseudo_labels(classify(model, z_u0), z_u0, cents);
  std::vector<int> y_t = y_l;
  const auto sel = assignment.selected_indices();
  for (std::size_t i : sel) y_t.push_back(assignment.assigned[i]);

  auto target_union = [&](Tape& t, const TapeModel& tm) {
    auto z_l = encode_target(t, tm, t.constant(x_l));
    auto z_u = encode_target(t, tm, t.constant(x_u));
    return std::pair{z_l, z_u};
  };
  auto esa_node = [&](Tape& t, const TapeModel& tm) {
    auto [z_l, z_u] = target_union(t, tm);
    auto z_t = sel.empty() ? z_l : t.concat_rows(z_l, t.select_rows(z_u, sel));
    auto z_s = encode_source(t, tm, t.constant(x_s));
    return esa_loss(t, triplet_centroid_nodes(t, z_s, y_s, z_t, y_t, K));
  };
  auto domain_node = [&](Tape& t, const TapeModel& tm) {
    auto [z_l, z_u] = target_union(t, tm);
    auto z_s = encode_source(t, tm, t.constant(x_s));
    return domain_loss(t, discriminate(t, tm, z_s),
                       discriminate(t, tm, t.concat_rows(z_l, z_u)));
  };

  std::map<std::string, LossBuilder> builders;
  builders["supervised"] = [&](Tape& t, const ParamMap& q) {
    TapeModel tm = put_on_tape(t, q);
    auto z_s = encode_source(t, tm, t.constant(x_s));
    return supervised_loss(t, classify(t, tm, z_s), y_s);
  };
  builders["soft"] = [&](Tape& t, const ParamMap& q) {
    TapeModel tm = put_on_tape(t, q);
    auto [z_l, z_u] = target_union(t, tm);
    auto probs = t.softmax_rows(classify(t, tm, z_l), 1.0);
    return soft_loss(t, probs, y_l, bank);
  };
  builders["isc"] = [&](Tape& t, const ParamMap& q) {
    TapeModel tm = put_on_tape(t, q);
    auto [z_l, z_u] = target_union(t, tm);
    return isc_loss(t, classify(t, tm, z_l), y_l, bank, w.alpha);
  };
  builders["esa"] = [&](Tape& t, const ParamMap& q) {
    TapeModel tm = put_on_tape(t, q);
    return esa_node(t, tm);
  };
  builders["domain"] = [&](Tape& t, const ParamMap& q) {
    TapeModel tm = put_on_tape(t, q);
    return domain_node(t, tm);
  };
  builders["objective"] = [&](Tape& t, const ParamMap& q) {
    TapeModel tm = put_on_tape(t, q);
    auto z_s = encode_source(t, tm, t.constant(x_s));
    auto [z_l, z_u] = target_union(t, tm);
    auto l_s = supervised_loss(t, classify(t, tm, z_s), y_s);
    auto l_isc = isc_loss(t, classify(t, tm, z_l), y_l, bank, w.alpha);
    auto z_t = sel.empty() ? z_l : t.concat_rows(z_l, t.select_rows(z_u, sel));
    auto l_esa =
        esa_loss(t, triplet_centroid_nodes(t, z_s, y_s, z_t, y_t, K));
    auto l_d = domain_loss(t, discriminate(t, tm, z_s),
                           discriminate(t, tm, t.concat_rows(z_l, z_u)));
    return total_objective(t, l_s, l_isc, l_esa, l_d, w,
                           Role::EncoderClassifier);
  };

  std::map<std::string, double> errors;
  for (const auto& [name, build] : builders)
    errors[name] = grad_check(build, model.params, 1e-5);
  return errors;
}

namespace {

void ensure_out_dir(const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec)
    throw IoError("cannot create output directory '" + out_dir +
                  "': " + ec.message());
}

fs::path out_path(const ExperimentSpec& spec, const std::string& name) {
  return fs::path(spec.out_dir) / name;
}

int run_synth(const ExperimentSpec& spec) {
  ensure_out_dir(spec.out_dir);
  SynthPool pool = synth_generate_pool(spec.data.synth);
  const auto src = out_path(spec, "source.csv");
  const auto tgt = out_path(spec, "target_pool.csv");
  save_feature_csv(src.string(), pool.x_s, pool.y_s);
  save_feature_csv(tgt.string(), pool.pool_x, pool.pool_y);
  write_text_file(out_path(spec, "synth_manifest.json").string(),
                  render_synth_manifest(spec.data.synth, "source.csv",
                                        "target_pool.csv"));
  std::cout << "wrote " << src.string() << " (" << pool.x_s.shape_str()
            << ") and " << tgt.string() << " (" << pool.pool_x.shape_str()
            << ")\n";
  return kExitOk;
}

int run_gradcheck(const ExperimentSpec& spec) {
  const auto errors = loss_gradcheck_errors(spec.config.seed);
  double worst = 0.0;
  for (const auto& [name, err] : errors) {
    worst = std::max(worst, err);
    std::cout << "gradcheck " << name << ": max_rel_err=" << err << ' '
              << (err < 1e-4 ? "PASS" : "FAIL") << '\n';
  }
  std::cout << "gradcheck overall: max_rel_err=" << worst
            << (worst < 1e-4 ? " PASS" : " FAIL") << " (tolerance 1e-4)\n";
  return worst < 1e-4 ? kExitOk : kExitProtocol;
}

struct VariantDef {
  std::string name;
  void (*apply)(TrainConfig&);
};

const std::vector<VariantDef>& ablation_variants() {
  static const std::vector<VariantDef> kVariants{
      {"full", [](TrainConfig&) {}},
      {"alpha0", [](TrainConfig& c) { c.no_soft = true; }},
      {"beta0", [](TrainConfig& c) { c.no_esa = true; }},
      {"gamma0", [](TrainConfig& c) { c.no_adv = true; }},
      {"no_temperature", [](TrainConfig& c) { c.no_temperature = true; }},
      {"no_gs", [](TrainConfig& c) { c.no_gs = true; }},
  };
  return kVariants;
}

/// Shared glue for train/baseline/ablate: runs one (variant, seed) pair,
/// writes its run report, and feeds the collectors.
struct RunCollector {
  const ExperimentSpec& spec;
  std::string task = task_name(spec.data);
  std::vector<PseudoStatsRow> stat_rows;
  ClassHistogram histogram;
  bool has_histogram = false;

  double run_one(const std::string& variant, std::uint64_t seed,
                 const HdaDataset& ds, const TrainConfig& cfg, bool baseline) {
    const auto t0 = Clock::now();
    TrainResult result = baseline ? train_baseline(ds, cfg) : train(ds, cfg);

    RunRecord record;
    record.task = task;
    record.variant = variant;
    record.seed = seed;
    record.config = cfg;
    record.data = spec.data;
    record.final_accuracy = result.final_accuracy;
    record.history = &result.history;
    if (!baseline && ds.has_truth() && !result.history.empty() &&
        result.history.back().assignment.size() == ds.y_u_truth.size() &&
        ds.x_u.rows() > 0) {
      const EpochState& last = result.history.back();
      record.has_stats = true;
      record.stats = pseudo_label_stats(last.assignment, ds.y_u_truth);
      stat_rows.push_back({variant, seed, record.stats, last.selected_count,
                           last.selected_accuracy, last.nn_accuracy});
    }
    record.timing_seconds = seconds_since(t0);

    const std::string file = variant == "full" || variant == "baseline"
                                 ? "run_" + std::to_string(seed) + ".json"
                                 : "run_" + variant + "_" + std::to_string(seed) +
                                       ".json";
    write_text_file(out_path(spec, file).string(), render_run_report(record));

    if (!baseline && !has_histogram) {
      Matrix probs = softmax_rows(
          classify(result.model, encode_source(result.model, ds.x_s)), 1.0);
      histogram = class_prediction_histogram(probs, ds.y_s, ds.K);
      has_histogram = true;
    }
    std::cout << "  " << variant << " seed " << seed << ": accuracy "
              << result.final_accuracy << " (" << record.timing_seconds
              << " s)\n";
    return result.final_accuracy;
  }

  void write_shared_artifacts(const AggregateRecord& agg) {
    write_text_file(out_path(spec, "aggregate.json").string(),
                    render_aggregate_report(agg));
    write_text_file(out_path(spec, "aggregate.csv").string(),
                    render_aggregate_csv(agg.entries));
    if (has_histogram)
      write_text_file(out_path(spec, "histograms.csv").string(),
                      render_histogram_csv(histogram));
    if (!stat_rows.empty())
      write_text_file(out_path(spec, "pseudolabel_stats.csv").string(),
                      render_pseudo_stats_csv(stat_rows));
  }
};

AggregateEntry make_entry(const std::string& name, std::vector<double> accs) {
  AggregateEntry e;
  e.name = name;
  e.accuracies = std::move(accs);
  if (!e.accuracies.empty())
    e.stats = aggregate_runs(e.accuracies);
  else
    e.stats.mean = -1.0;  // no ground truth available
  return e;
}

int run_train(const ExperimentSpec& spec, bool baseline) {
  ensure_out_dir(spec.out_dir);
  const auto t0 = Clock::now();
  RunCollector collector{spec};
  const std::string variant = baseline ? "baseline" : "full";
  std::vector<double> accs;
  for (std::size_t i = 0; i < spec.reps; ++i) {
    const std::uint64_t seed = spec.config.seed + i;
    HdaDataset ds = load_dataset(spec.data, seed);
    TrainConfig cfg = spec.config;
    cfg.seed = seed;
    const double acc = collector.run_one(variant, seed, ds, cfg, baseline);
    if (acc >= 0.0) accs.push_back(acc);
  }

  AggregateRecord agg;
  agg.task = collector.task;
  agg.base_seed = spec.config.seed;
  agg.reps = spec.reps;
  agg.config = spec.config;
  agg.data = spec.data;
  agg.entries.push_back(make_entry(variant, std::move(accs)));
  agg.timing_seconds = seconds_since(t0);
  collector.write_shared_artifacts(agg);

  const AggregateEntry& e = agg.entries.front();
  std::cout << variant << ": mean accuracy " << e.stats.mean << " +- "
            << e.stats.std << " over " << e.stats.n << " scored runs\n";
  return kExitOk;
}

int run_ablate(const ExperimentSpec& spec) {
  ensure_out_dir(spec.out_dir);
  const auto t0 = Clock::now();
  RunCollector collector{spec};
  const auto& variants = ablation_variants();
  std::vector<std::vector<double>> accs(variants.size());

  for (std::size_t i = 0; i < spec.reps; ++i) {
    const std::uint64_t seed = spec.config.seed + i;
    HdaDataset ds = load_dataset(spec.data, seed);
    for (std::size_t v = 0; v < variants.size(); ++v) {
      TrainConfig cfg = spec.config;
      variants[v].apply(cfg);
      cfg.seed = seed;
      const double acc = collector.run_one(variants[v].name, seed, ds, cfg,
                                           /*baseline=*/false);
      if (acc >= 0.0) accs[v].push_back(acc);
    }
  }

  AggregateRecord agg;
  agg.task = collector.task;
  agg.base_seed = spec.config.seed;
  agg.reps = spec.reps;
  agg.config = spec.config;
  agg.data = spec.data;
  for (std::size_t v = 0; v < variants.size(); ++v) {
    AggregateEntry e = make_entry(variants[v].name, accs[v]);
    if (v > 0 && accs[0].size() >= 2 && accs[v].size() >= 2) {
      e.compared = true;
      e.vs_first = welch_ttest(accs[0], accs[v]);
    }
    agg.entries.push_back(std::move(e));
  }
  agg.timing_seconds = seconds_since(t0);
  collector.write_shared_artifacts(agg);

  std::cout << "variant           mean      std\n";
  for (const AggregateEntry& e : agg.entries)
    std::cout << "  " << e.name << ": " << e.stats.mean << " +- " << e.stats.std
              << (e.compared ? " (p=" + std::to_string(e.vs_first.p) +
                                   " vs full)"
                             : "")
              << '\n';
  return kExitOk;
}

}  // namespace

int run_experiment(const ExperimentSpec& spec) {
  try {
    if (spec.reps == 0) throw ParameterError("reps must be >= 1");
    switch (spec.mode) {
      case ExperimentSpec::Mode::Synth:
        return run_synth(spec);
      case ExperimentSpec::Mode::GradCheck:
        return run_gradcheck(spec);
      case ExperimentSpec::Mode::Train:
        return run_train(spec, /*baseline=*/false);
      case ExperimentSpec::Mode::Baseline:
        return run_train(spec, /*baseline=*/true);
      case ExperimentSpec::Mode::Ablate:
        return run_ablate(spec);
    }
    throw ParameterError("unknown mode");
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitProtocol;
  }
}

}  // namespace ssan
