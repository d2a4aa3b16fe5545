#include "ssan/eval.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ssan/errors.hpp"

namespace ssan {

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size())
    throw DimensionError("accuracy: " + std::to_string(predicted.size()) +
                         " predictions vs " + std::to_string(truth.size()) +
                         " truths");
  if (predicted.empty()) throw ProtocolError("accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    hits += predicted[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

MeanStd aggregate_runs(const std::vector<double>& values) {
  if (values.empty()) throw ProtocolError("aggregate_runs: empty list");
  MeanStd out;
  out.n = values.size();
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(out.n);
  if (out.n >= 2) {
    double acc = 0.0;
    for (double v : values) acc += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(acc / static_cast<double>(out.n - 1));
  }
  return out;
}

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  return h;  // converged to working precision for all tested inputs
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0))
    throw ParameterError("incomplete_beta: a and b must be > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

WelchResult welch_ttest(const std::vector<double>& a,
                        const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2)
    throw ProtocolError("welch_ttest: need at least 2 samples per side");
  const auto stats_a = aggregate_runs(a);
  const auto stats_b = aggregate_runs(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double va = stats_a.std * stats_a.std;
  const double vb = stats_b.std * stats_b.std;
  const double se2 = va / na + vb / nb;
  const double diff = stats_a.mean - stats_b.mean;

  WelchResult out;
  if (se2 == 0.0) {
    // Both sides constant. Equal means: no evidence, p = 1. Different
    // means: the separation limit.
    out.df = na + nb - 2.0;
    if (diff == 0.0) {
      out.t = 0.0;
      out.p = 1.0;
      out.neg_log_p = 0.0;
    } else {
      out.t = diff > 0 ? 1e308 : -1e308;
      out.p = std::numeric_limits<double>::min();
      out.neg_log_p = -std::log(out.p);
    }
    return out;
  }

  out.t = diff / std::sqrt(se2);
  out.df = se2 * se2 /
           ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
  // Two-sided p through the t-distribution tail written as a beta integral.
  out.p = incomplete_beta(out.df / 2.0, 0.5, out.df / (out.df + out.t * out.t));
  if (out.p < std::numeric_limits<double>::min())
    out.p = std::numeric_limits<double>::min();
  if (out.p > 1.0) out.p = 1.0;
  out.neg_log_p = -std::log(out.p);
  return out;
}

PseudoLabelStats pseudo_label_stats(const PseudoLabelAssignment& assignment,
                                    const std::vector<int>& truth) {
  if (assignment.size() != truth.size())
    throw DimensionError("pseudo_label_stats: " +
                         std::to_string(assignment.size()) + " assignments vs " +
                         std::to_string(truth.size()) + " truths");
  PseudoLabelStats s;
  s.n_u = truth.size();
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool nn_ok = assignment.y_nn[i] == truth[i];
    const bool gs_ok = assignment.y_gs[i] == truth[i];
    const bool agree = assignment.y_nn[i] == assignment.y_gs[i];
    if (nn_ok && gs_ok)
      ++s.both_correct;
    else if (agree)
      ++s.wrong_agree;
    else if (nn_ok)
      ++s.nn_only_correct;
    else if (gs_ok)
      ++s.gs_only_correct;
    else
      ++s.wrong_disagree;
  }
  return s;
}

ClassHistogram class_prediction_histogram(const Matrix& probs,
                                          const std::vector<int>& labels,
                                          std::size_t K) {
  if (labels.size() != probs.rows())
    throw DimensionError("class_prediction_histogram: " +
                         std::to_string(labels.size()) + " labels for " +
                         probs.shape_str());
  ClassHistogram out;
  out.rows = Matrix(K, probs.cols());
  out.defined.assign(K, false);
  std::vector<std::size_t> counts(K, 0);
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= K)
      throw LabelError("class_prediction_histogram: label " + std::to_string(y) +
                       " out of range at row " + std::to_string(i));
    auto dst = out.rows.row(static_cast<std::size_t>(y));
    auto src = probs.row(i);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
    ++counts[static_cast<std::size_t>(y)];
  }
  for (std::size_t k = 0; k < K; ++k) {
    if (counts[k] == 0) continue;
    out.defined[k] = true;
    const double inv = 1.0 / static_cast<double>(counts[k]);
    for (double& v : out.rows.row(k)) v *= inv;
  }
  return out;
}

}  // namespace ssan
