#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ssan/matrix.hpp"

namespace ssan {

/// Training-path view of a dataset. Deliberately lacks the unlabeled
/// ground truth so no training code can touch it.
struct HdaView {
  const Matrix& x_s;
  const std::vector<int>& y_s;
  const Matrix& x_l;
  const std::vector<int>& y_l;
  const Matrix& x_u;
  std::size_t K;
};

/// Labeled source, small labeled target, large unlabeled target. Source
/// and target widths are independent (heterogeneous by design). The
/// optional unlabeled truth exists for evaluation only.
struct HdaDataset {
  Matrix x_s;
  std::vector<int> y_s;
  Matrix x_l;
  std::vector<int> y_l;
  Matrix x_u;
  std::vector<int> y_u_truth;  // empty when unknown
  std::size_t K = 0;

  bool has_truth() const { return !y_u_truth.empty(); }
  HdaView view() const { return {x_s, y_s, x_l, y_l, x_u, K}; }
};

/// Checks the protocol guarantees (every class present on both labeled
/// sides, labels in range, matching row counts) and warns on stderr when
/// the labeled target outnumbers the unlabeled one.
void validate_dataset(const HdaDataset& ds);

struct LoadedCsv {
  Matrix x;
  std::vector<int> labels;  // -1 marks an unlabeled row
};

/// Headerless CSV, one row per line: integer label (-1 = unlabeled)
/// followed by the feature values. Width inferred from the first row.
LoadedCsv load_feature_csv(const std::string& path);

/// Writes the same format with 17-significant-digit features, so a load
/// after save is bit-identical.
void save_feature_csv(const std::string& path, const Matrix& x,
                      const std::vector<int>& labels);

struct SplitResult {
  Matrix x_l;
  std::vector<int> y_l;
  Matrix x_u;
  std::vector<int> y_u_truth;
};

/// Picks exactly m labeled instances per class from the pool, uniformly
/// without replacement under the seeded generator; the remainder becomes
/// the unlabeled set with its truth held aside. Both halves keep pool
/// row order.
SplitResult split_protocol(const Matrix& pool_x, const std::vector<int>& pool_y,
                           std::size_t m, std::uint64_t seed);

/// Per-feature statistics of a reference matrix (population standard
/// deviation; features with variance under 1e-12 keep scale 1 and are
/// only centered).
struct Standardizer {
  Matrix mean;  // 1 x d
  Matrix scale; // 1 x d, the divisor
};

Standardizer fit_standardizer(const Matrix& reference);
Matrix apply_standardizer(const Standardizer& s, const Matrix& x);

/// Standardizes in place: source statistics from the source matrix;
/// target statistics from labeled and unlabeled target rows jointly.
void standardize_dataset(HdaDataset& ds);

struct SynthSpec {
  std::size_t K = 6;
  std::size_t d_latent = 8;
  std::size_t d_s = 40;
  std::size_t d_t = 24;
  double separation = 3.0;
  double noise = 0.5;
  std::size_t per_class = 60;  // samples per class per domain
  std::size_t m = 3;           // labeled target per class
  std::uint64_t seed = 0;
};

void validate(const SynthSpec& spec);

/// Inspection hooks for the generator (latent-space oracles in tests).
struct SynthDebug {
  Matrix class_means;     // K x d_latent
  Matrix source_latents;  // (K*per_class) x d_latent
  Matrix target_latents;  // (K*per_class) x d_latent
};

/// The raw generated task before the labeled/unlabeled split: shared
/// latent class structure observed through two independent random
/// nonlinear maps of different widths.
struct SynthPool {
  Matrix x_s;
  std::vector<int> y_s;
  Matrix pool_x;             // target pool, width d_t
  std::vector<int> pool_y;
};

SynthPool synth_generate_pool(const SynthSpec& spec, SynthDebug* debug = nullptr);

/// Pool generation followed by split_protocol with the same seed.
HdaDataset synth_generate(const SynthSpec& spec, SynthDebug* debug = nullptr);

}  // namespace ssan
