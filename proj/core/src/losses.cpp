#include "ssan/losses.hpp"

#include <iostream>
#include <string>

#include "ssan/errors.hpp"

namespace ssan {

void validate(const LossWeights& w) {
  if (!(w.alpha >= 0.0 && w.alpha <= 1.0))
    throw ParameterError("alpha must lie in [0,1]");
  if (w.beta < 0.0) throw ParameterError("beta must be >= 0");
  if (w.gamma < 0.0) throw ParameterError("gamma must be >= 0");
  if (!(w.temperature > 0.0)) throw ParameterError("temperature must be > 0");
}

SoftLabelBank compute_soft_labels(const Matrix& source_logits,
                                  const std::vector<int>& labels,
                                  std::size_t K, double temperature,
                                  std::size_t epoch) {
  if (labels.size() != source_logits.rows())
    throw DimensionError("compute_soft_labels: " +
                         std::to_string(labels.size()) + " labels for " +
                         source_logits.shape_str());
  Matrix probs = softmax_rows(source_logits, temperature);

  SoftLabelBank bank;
  bank.q = Matrix(K, source_logits.cols());
  bank.temperature = temperature;
  bank.epoch_computed = epoch;
  std::vector<std::size_t> counts(K, 0);
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= K)
      throw LabelError("compute_soft_labels: label " + std::to_string(y) +
                       " out of range at row " + std::to_string(i));
    auto dst = bank.q.row(static_cast<std::size_t>(y));
    auto src = probs.row(i);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
    ++counts[static_cast<std::size_t>(y)];
  }
  for (std::size_t k = 0; k < K; ++k) {
    if (counts[k] == 0)
      throw ProtocolError("compute_soft_labels: class " + std::to_string(k) +
                          " has no source instance");
    const double inv = 1.0 / static_cast<double>(counts[k]);
    for (double& v : bank.q.row(k)) v *= inv;
  }
  return bank;
}

Tape::NodeId supervised_loss(Tape& t, Tape::NodeId logits,
                             const std::vector<int>& labels) {
  if (t.value(logits).rows() == 0)
    throw ProtocolError("supervised_loss: empty batch");
  auto probs = t.softmax_rows(logits, 1.0);
  auto picked = t.gather_cols(t.log_clamped(probs), labels);
  return t.scale(t.mean_all(picked), -1.0);
}

Tape::NodeId soft_loss(Tape& t, Tape::NodeId probs,
                       const std::vector<int>& labels,
                       const SoftLabelBank& bank) {
  const Matrix& p = t.value(probs);
  if (p.rows() == 0) throw ProtocolError("soft_loss: empty labeled target set");
  if (labels.size() != p.rows())
    throw DimensionError("soft_loss: " + std::to_string(labels.size()) +
                         " labels for " + p.shape_str());
  if (bank.q.cols() != p.cols())
    throw DimensionError("soft_loss: bank " + bank.q.shape_str() +
                         " vs probabilities " + p.shape_str());

  // Row i of the selection matrix is the bank row for label y_i; it
  // enters the tape as a constant, so the bank stays detached.
  Matrix q_sel(p.rows(), p.cols());
  for (std::size_t i = 0; i < p.rows(); ++i) {
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= bank.q.rows())
      throw LabelError("soft_loss: label " + std::to_string(y) +
                       " out of range at row " + std::to_string(i));
    auto src = bank.q.row(static_cast<std::size_t>(y));
    auto dst = q_sel.row(i);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = src[j];
  }
  auto weighted = t.hadamard(t.constant(std::move(q_sel)), t.log_clamped(probs));
  return t.scale(t.sum_all(weighted), -1.0 / static_cast<double>(p.rows()));
}

Tape::NodeId isc_loss(Tape& t, Tape::NodeId target_logits,
                      const std::vector<int>& labels, const SoftLabelBank& bank,
                      double alpha, double student_temperature) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw ParameterError("isc_loss: alpha must lie in [0,1]");
  if (alpha == 0.0) return supervised_loss(t, target_logits, labels);

  auto probs = t.softmax_rows(target_logits, student_temperature);
  auto soft = soft_loss(t, probs, labels, bank);
  if (alpha == 1.0) return soft;

  auto sup = supervised_loss(t, target_logits, labels);
  return t.add(t.scale(sup, 1.0 - alpha), t.scale(soft, alpha));
}

Tape::NodeId esa_loss(Tape& t, const TapeTriplet& triplet) {
  if (triplet.active_classes.empty()) {
    std::cerr << "[ssan] warning: no class has both source and target "
                 "representatives; alignment loss is 0 this epoch\n";
    return t.constant(Matrix(1, 1, 0.0));
  }
  Tape::NodeId total = Tape::kNoNode;
  for (std::size_t i = 0; i < triplet.active_classes.size(); ++i) {
    auto st = t.sum_squares(t.sub(triplet.mu_s[i], triplet.mu_t[i]));
    auto s_st = t.sum_squares(t.sub(triplet.mu_s[i], triplet.mu_st[i]));
    auto t_st = t.sum_squares(t.sub(triplet.mu_t[i], triplet.mu_st[i]));
    auto term = t.add(t.add(st, s_st), t_st);
    total = total == Tape::kNoNode ? term : t.add(total, term);
  }
  return total;
}

Tape::NodeId domain_loss(Tape& t, Tape::NodeId d_source, Tape::NodeId d_target) {
  const Matrix& ds = t.value(d_source);
  const Matrix& dt = t.value(d_target);
  if (ds.rows() == 0) throw ProtocolError("domain_loss: empty source side");
  if (dt.rows() == 0) throw ProtocolError("domain_loss: empty target side");

  auto src_term = t.mean_all(t.log_clamped(d_source));
  auto ones = t.constant(Matrix(dt.rows(), dt.cols(), 1.0));
  auto tgt_term = t.mean_all(t.log_clamped(t.sub(ones, d_target)));
  return t.add(src_term, tgt_term);
}

Tape::NodeId total_objective(Tape& t, Tape::NodeId l_s, Tape::NodeId l_isc,
                             Tape::NodeId l_esa, Tape::NodeId l_d,
                             const LossWeights& w, Role role) {
  if (role == Role::Discriminator) {
    if (l_d == Tape::kNoNode)
      throw ParameterError("total_objective: discriminator needs the domain loss");
    return t.scale(l_d, -w.gamma);
  }
  Tape::NodeId total = Tape::kNoNode;
  auto accumulate = [&t, &total](Tape::NodeId node) {
    if (node == Tape::kNoNode) return;
    total = total == Tape::kNoNode ? node : t.add(total, node);
  };
  accumulate(l_s);
  accumulate(l_isc);
  if (l_esa != Tape::kNoNode) accumulate(t.scale(l_esa, w.beta));
  if (l_d != Tape::kNoNode) accumulate(t.scale(l_d, w.gamma));
  return total == Tape::kNoNode ? t.constant(Matrix(1, 1, 0.0)) : total;
}

}  // namespace ssan
