#pragma once

#include <vector>

#include "ssan/matrix.hpp"
#include "ssan/semantics.hpp"

namespace ssan {

/// Fraction of positions where predicted == truth.
double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // Bessel-corrected sample deviation; 0 for n == 1
  std::size_t n = 0;
};

MeanStd aggregate_runs(const std::vector<double>& values);

/// Regularized incomplete beta I_x(a,b), continued-fraction evaluation,
/// absolute accuracy around 1e-10 on the tested domain.
double incomplete_beta(double a, double b, double x);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;         // two-sided
  double neg_log_p = 0.0;
};

/// Welch's unequal-variance t-test with Welch-Satterthwaite degrees of
/// freedom. Identical samples give p = 1 exactly. When both sides have
/// zero variance but different means the limit is reported: |t| huge,
/// p = the smallest positive normal double.
WelchResult welch_ttest(const std::vector<double>& a, const std::vector<double>& b);

/// How the two pseudo-label voters relate to the truth. The five counts
/// partition the unlabeled set: agreement splits into correct/wrong, and
/// disagreement into which voter (if any) was right.
struct PseudoLabelStats {
  std::size_t n_u = 0;
  std::size_t both_correct = 0;      // agree and correct: the selected, used slice
  std::size_t wrong_agree = 0;       // agree but wrong: selected, harmful
  std::size_t nn_only_correct = 0;   // disagree, classifier right
  std::size_t gs_only_correct = 0;   // disagree, geometric vote right
  std::size_t wrong_disagree = 0;    // disagree, both wrong
};

PseudoLabelStats pseudo_label_stats(const PseudoLabelAssignment& assignment,
                                    const std::vector<int>& truth);

/// Row k = mean predicted distribution over instances labeled k. Classes
/// with no instance keep a zero row and a cleared flag.
struct ClassHistogram {
  Matrix rows;                // K x K
  std::vector<bool> defined;  // per class
};

ClassHistogram class_prediction_histogram(const Matrix& probs,
                                          const std::vector<int>& labels,
                                          std::size_t K);

}  // namespace ssan
