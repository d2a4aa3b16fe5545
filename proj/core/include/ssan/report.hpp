#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ssan/data.hpp"
#include "ssan/eval.hpp"
#include "ssan/training.hpp"

namespace ssan {

/// Where a run's data came from: a generated task or user files.
struct DataSource {
  bool used_synth = true;
  SynthSpec synth;
  std::string source_path;
  std::string target_pool_path;
  std::string target_labeled_path;
  std::string target_unlabeled_path;
  std::size_t m = 3;  // labeled-per-class when a pool is split
};

/// Everything one training run reports. Self-describing: the resolved
/// config and data source are embedded so the run can be replayed.
struct RunRecord {
  std::string task;
  std::string variant;  // "full", "baseline", or an ablation name
  std::uint64_t seed = 0;
  TrainConfig config;
  DataSource data;
  double final_accuracy = -1.0;
  const std::vector<EpochState>* history = nullptr;
  bool has_stats = false;
  PseudoLabelStats stats;  // from the final epoch's assignment
  double timing_seconds = 0.0;
};

struct AggregateEntry {
  std::string name;
  std::vector<double> accuracies;  // ordered by seed
  MeanStd stats;
  bool compared = false;   // true when a test against the first entry ran
  WelchResult vs_first;
};

struct AggregateRecord {
  std::string task;
  std::uint64_t base_seed = 0;
  std::size_t reps = 0;
  TrainConfig config;
  DataSource data;
  std::vector<AggregateEntry> entries;
  double timing_seconds = 0.0;
};

/// JSON renderers. Output is deterministic except the timing_seconds
/// field, which always sits alone on its own line so byte comparisons
/// can drop it.
std::string render_run_report(const RunRecord& r);
std::string render_aggregate_report(const AggregateRecord& a);

/// CSV renderers (flat, for plotting).
std::string render_aggregate_csv(const std::vector<AggregateEntry>& entries);
std::string render_histogram_csv(const ClassHistogram& h);

struct PseudoStatsRow {
  std::string variant;
  std::uint64_t seed = 0;
  PseudoLabelStats stats;
  std::size_t selected_count = 0;
  double selected_accuracy = -1.0;
  double nn_accuracy = -1.0;
};
std::string render_pseudo_stats_csv(const std::vector<PseudoStatsRow>& rows);

/// Synth-manifest JSON: the resolved generator spec plus the emitted
/// file names, so headerless CSVs stay self-describing as a bundle.
std::string render_synth_manifest(const SynthSpec& spec,
                                  const std::string& source_file,
                                  const std::string& pool_file);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace ssan
