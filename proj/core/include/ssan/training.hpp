#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ssan/data.hpp"
#include "ssan/losses.hpp"
#include "ssan/model.hpp"
#include "ssan/semantics.hpp"
#include "ssan/tape.hpp"

namespace ssan {

struct TrainConfig {
  LossWeights weights;            // alpha 0.1, beta 0.004, gamma 0.01, T 5
  std::size_t d_common = 256;
  std::size_t hidden = 256;
  std::size_t epochs = 500;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 0;
  // Ablation switches (each removes one ingredient).
  bool no_soft = false;         // alpha -> 0
  bool no_esa = false;          // drop the centroid-alignment term
  bool no_adv = false;          // drop the discriminator game
  bool no_temperature = false;  // soft labels at T = 1
  bool no_gs = false;           // pseudo-labels from the classifier alone
  // Student-side temperature for the soft loss (1 = as the loss is
  // defined; optionally the bank temperature, distillation-style).
  double student_temperature = 1.0;
};

void validate(const TrainConfig& cfg);

/// Everything refreshed once per epoch plus the epoch's loss readings.
/// Loss fields record the terms as they entered the objective; a term an
/// ablation removed is recorded as 0.
struct EpochState {
  SoftLabelBank bank;
  CentroidSet gs_centroids;
  PseudoLabelAssignment assignment;
  double l_s = 0.0;
  double l_isc = 0.0;
  double l_esa = 0.0;
  double l_d = 0.0;
  std::size_t selected_count = 0;
  // Filled from ground truth when available; -1 otherwise.
  double selected_accuracy = -1.0;
  double nn_accuracy = -1.0;
};

struct AdamState {
  GradientMap m;  // first moments
  GradientMap v;  // second moments
  std::size_t step = 0;
};

/// Bias-corrected Adam update applied to exactly the parameters named in
/// `grads`; everything else is untouched (player isolation).
void adam_step(ParamMap& params, const GradientMap& grads, AdamState& state,
               double lr, double beta1, double beta2, double eps);

/// Keeps only the named entries of a gradient map.
GradientMap filter_gradients(const GradientMap& grads,
                             const std::vector<std::string>& keep);

/// One full-batch epoch: refresh the soft-label bank and GS centroids
/// (detached), refresh pseudo-labels, build every loss on one tape, then
/// take the discriminator step (on -gamma L_D, discriminator parameters
/// only) and the main step (full objective, encoder/classifier parameters
/// only). Both gradients are evaluated at the epoch's starting point.
EpochState run_epoch(SsanModel& model, const HdaView& data,
                     const TrainConfig& cfg, std::size_t epoch,
                     AdamState& main_opt, AdamState& disc_opt);

struct TrainResult {
  SsanModel model;
  std::vector<EpochState> history;
  std::vector<int> predictions;   // over the unlabeled target
  double final_accuracy = -1.0;   // -1 without ground truth
};

/// Initializes a model from the dataset's shapes and the config seed and
/// runs the epoch loop. Ground truth, when present, feeds only the
/// diagnostics and the final accuracy.
TrainResult train(const HdaDataset& ds, const TrainConfig& cfg);

/// Target-only reference: the same target encoder + classifier trained
/// with plain cross-entropy on the labeled target rows alone, same
/// budget and optimizer. The comparison anchor for the transfer gain.
TrainResult train_baseline(const HdaDataset& ds, const TrainConfig& cfg);

}  // namespace ssan
