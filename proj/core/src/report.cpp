#include "ssan/report.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ssan/errors.hpp"

namespace ssan {

namespace {

using json = nlohmann::ordered_json;

json config_json(const TrainConfig& c) {
  return json{{"alpha", c.weights.alpha},
              {"beta", c.weights.beta},
              {"gamma", c.weights.gamma},
              {"temperature", c.weights.temperature},
              {"d_common", c.d_common},
              {"hidden", c.hidden},
              {"epochs", c.epochs},
              {"lr", c.lr},
              {"beta1", c.beta1},
              {"beta2", c.beta2},
              {"eps", c.eps},
              {"seed", c.seed},
              {"no_soft", c.no_soft},
              {"no_esa", c.no_esa},
              {"no_adv", c.no_adv},
              {"no_temperature", c.no_temperature},
              {"no_gs", c.no_gs},
              {"student_temperature", c.student_temperature}};
}

json synth_json(const SynthSpec& s) {
  return json{{"K", s.K},
              {"d_latent", s.d_latent},
              {"d_s", s.d_s},
              {"d_t", s.d_t},
              {"separation", s.separation},
              {"noise", s.noise},
              {"per_class", s.per_class},
              {"m", s.m},
              {"seed", s.seed}};
}

json data_json(const DataSource& d) {
  if (d.used_synth) return json{{"synth", synth_json(d.synth)}};
  json out;
  out["source"] = d.source_path;
  if (!d.target_pool_path.empty()) {
    out["target_pool"] = d.target_pool_path;
    out["m"] = d.m;
  } else {
    out["target_labeled"] = d.target_labeled_path;
    out["target_unlabeled"] = d.target_unlabeled_path;
  }
  return out;
}

json stats_json(const PseudoLabelStats& s) {
  return json{{"n_u", s.n_u},
              {"both_correct", s.both_correct},
              {"wrong_agree", s.wrong_agree},
              {"nn_only_correct", s.nn_only_correct},
              {"gs_only_correct", s.gs_only_correct},
              {"wrong_disagree", s.wrong_disagree}};
}

json welch_json(const WelchResult& w) {
  return json{{"t", w.t}, {"df", w.df}, {"p", w.p}, {"neg_log_p", w.neg_log_p}};
}

}  // namespace

std::string render_run_report(const RunRecord& r) {
  json out;
  out["task"] = r.task;
  out["variant"] = r.variant;
  out["seed"] = r.seed;
  out["config"] = config_json(r.config);
  out["data"] = data_json(r.data);
  out["final_accuracy"] = r.final_accuracy;
  json epochs = json::array();
  if (r.history) {
    for (std::size_t e = 0; e < r.history->size(); ++e) {
      const EpochState& st = (*r.history)[e];
      epochs.push_back(json{{"epoch", e},
                            {"l_s", st.l_s},
                            {"l_isc", st.l_isc},
                            {"l_esa", st.l_esa},
                            {"l_d", st.l_d},
                            {"selected", st.selected_count},
                            {"selected_acc", st.selected_accuracy},
                            {"nn_acc", st.nn_accuracy}});
    }
  }
  out["epochs"] = std::move(epochs);
  if (r.has_stats) out["pseudo_label_stats"] = stats_json(r.stats);
  out["timing_seconds"] = r.timing_seconds;
  return out.dump(2) + "\n";
}

std::string render_aggregate_report(const AggregateRecord& a) {
  json out;
  out["task"] = a.task;
  out["base_seed"] = a.base_seed;
  out["reps"] = a.reps;
  out["config"] = config_json(a.config);
  out["data"] = data_json(a.data);
  json entries = json::array();
  for (const AggregateEntry& e : a.entries) {
    json row{{"name", e.name},
             {"accuracies", e.accuracies},
             {"mean", e.stats.mean},
             {"std", e.stats.std},
             {"n", e.stats.n}};
    if (e.compared) row["welch_vs_full"] = welch_json(e.vs_first);
    entries.push_back(std::move(row));
  }
  out["entries"] = std::move(entries);
  out["timing_seconds"] = a.timing_seconds;
  return out.dump(2) + "\n";
}

std::string render_aggregate_csv(const std::vector<AggregateEntry>& entries) {
  std::ostringstream out;
  out << "name,mean,std,n\n";
  char buf[40];
  for (const AggregateEntry& e : entries) {
    std::snprintf(buf, sizeof buf, "%.17g", e.stats.mean);
    out << e.name << ',' << buf;
    std::snprintf(buf, sizeof buf, "%.17g", e.stats.std);
    out << ',' << buf << ',' << e.stats.n << '\n';
  }
  return out.str();
}

std::string render_histogram_csv(const ClassHistogram& h) {
  std::ostringstream out;
  out << "class,defined";
  for (std::size_t j = 0; j < h.rows.cols(); ++j) out << ",p" << j;
  out << '\n';
  char buf[40];
  for (std::size_t k = 0; k < h.rows.rows(); ++k) {
    out << k << ',' << (h.defined[k] ? 1 : 0);
    for (double v : h.rows.row(k)) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << ',' << buf;
    }
    out << '\n';
  }
  return out.str();
}

std::string render_pseudo_stats_csv(const std::vector<PseudoStatsRow>& rows) {
  std::ostringstream out;
  out << "variant,seed,n_u,both_correct,wrong_agree,nn_only_correct,"
         "gs_only_correct,wrong_disagree,selected_count,selected_accuracy,"
         "nn_accuracy\n";
  char buf[40];
  for (const PseudoStatsRow& r : rows) {
    out << r.variant << ',' << r.seed << ',' << r.stats.n_u << ','
        << r.stats.both_correct << ',' << r.stats.wrong_agree << ','
        << r.stats.nn_only_correct << ',' << r.stats.gs_only_correct << ','
        << r.stats.wrong_disagree << ',' << r.selected_count;
    std::snprintf(buf, sizeof buf, "%.17g", r.selected_accuracy);
    out << ',' << buf;
    std::snprintf(buf, sizeof buf, "%.17g", r.nn_accuracy);
    out << ',' << buf << '\n';
  }
  return out.str();
}

std::string render_synth_manifest(const SynthSpec& spec,
                                  const std::string& source_file,
                                  const std::string& pool_file) {
  json out;
  out["format"] = "label,features... per row; label -1 means unlabeled";
  out["spec"] = synth_json(spec);
  out["files"] = json{{"source", source_file}, {"target_pool", pool_file}};
  return out.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace ssan
