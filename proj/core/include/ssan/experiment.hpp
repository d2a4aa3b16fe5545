#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "ssan/data.hpp"
#include "ssan/report.hpp"
#include "ssan/training.hpp"

namespace ssan {

/// One fully resolved command: what to run, on which data, where to
/// write. Built by the CLI (flags over config file over defaults) or
/// directly by tests.
struct ExperimentSpec {
  enum class Mode { Train, Synth, GradCheck, Ablate, Baseline };

  Mode mode = Mode::Train;
  DataSource data;      // synth spec or file paths + m
  TrainConfig config;
  std::size_t reps = 1;
  std::string out_dir = ".";
};

/// Process exit codes shared by the library entry point and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;       // missing/unreadable/unwritable files
inline constexpr int kExitUsage = 2;    // bad flag or parameter values
inline constexpr int kExitProtocol = 3; // data violates the task protocol

/// Resolves the dataset for one repetition seed: load + split (or
/// generate) and standardize. Exposed for tests.
HdaDataset load_dataset(const DataSource& data, std::uint64_t seed);

/// Central finite-difference error of each loss builder (supervised,
/// soft, isc, esa, domain, full objective) on a small generated batch,
/// keyed by builder name.
std::map<std::string, double> loss_gradcheck_errors(std::uint64_t seed);

/// Runs the experiment, writes artifacts under spec.out_dir, prints a
/// short summary to stdout, and maps failures to the exit codes above.
int run_experiment(const ExperimentSpec& spec);

}  // namespace ssan
