#pragma once

#include <vector>

#include "ssan/matrix.hpp"
#include "ssan/semantics.hpp"
#include "ssan/tape.hpp"

namespace ssan {

/// Temperature-smoothed average source prediction per class. Row k is the
/// soft label for class k. Plain matrices, so nothing here ever receives a
/// gradient; the bank is refreshed once per epoch and then held fixed.
struct SoftLabelBank {
  Matrix q;                        // K x K
  double temperature = 1.0;
  std::size_t epoch_computed = 0;
};

struct LossWeights {
  double alpha = 0.1;        // soft/hard mix
  double beta = 0.004;       // semantic-alignment weight
  double gamma = 0.01;       // adversarial weight
  double temperature = 5.0;  // soft-label temperature
};

/// Throws ParameterError unless alpha in [0,1], beta,gamma >= 0, T > 0.
void validate(const LossWeights& w);

/// Which player's objective total_objective assembles.
enum class Role { EncoderClassifier, Discriminator };

/// Row k = mean over source instances of class k of softmax(logits/T).
SoftLabelBank compute_soft_labels(const Matrix& source_logits,
                                  const std::vector<int>& labels,
                                  std::size_t K, double temperature,
                                  std::size_t epoch = 0);

/// Mean cross-entropy of softmax(logits) against integer labels.
Tape::NodeId supervised_loss(Tape& t, Tape::NodeId logits,
                             const std::vector<int>& labels);

/// -(1/n) sum_i q^(y_i) . log p_i over labeled-target probability rows.
Tape::NodeId soft_loss(Tape& t, Tape::NodeId probs,
                       const std::vector<int>& labels,
                       const SoftLabelBank& bank);

/// (1-alpha) * supervised + alpha * soft on the labeled target. The
/// student distribution uses temperature student_temperature (default 1;
/// a config switch exposes the distillation-style alternative of reusing
/// the bank temperature).
Tape::NodeId isc_loss(Tape& t, Tape::NodeId target_logits,
                      const std::vector<int>& labels, const SoftLabelBank& bank,
                      double alpha, double student_temperature = 1.0);

/// Sum over active classes of the three pairwise squared centroid
/// distances. An empty active set yields a constant 0 and a warning on
/// stderr.
Tape::NodeId esa_loss(Tape& t, const TapeTriplet& triplet);

/// mean log D(source rows) + mean log(1 - D(target rows)); the target
/// side covers labeled and unlabeled rows together.
Tape::NodeId domain_loss(Tape& t, Tape::NodeId d_source, Tape::NodeId d_target);

/// Assembles the scalar each player minimizes. Pass Tape::kNoNode for a
/// term an ablation removed; it contributes nothing. EncoderClassifier:
/// L_S + L_ISC + beta*L_ESA + gamma*L_D. Discriminator: -gamma*L_D.
Tape::NodeId total_objective(Tape& t, Tape::NodeId l_s, Tape::NodeId l_isc,
                             Tape::NodeId l_esa, Tape::NodeId l_d,
                             const LossWeights& w, Role role);

}  // namespace ssan
