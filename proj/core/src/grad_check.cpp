#include "ssan/grad_check.hpp"

#include <cmath>
#include <string>

#include "ssan/errors.hpp"

namespace ssan {

namespace {

double evaluate(const LossBuilder& build, const ParamMap& params) {
  Tape tape;
  return tape.scalar(build(tape, params));
}

}  // namespace

double grad_check(const LossBuilder& build, const ParamMap& params, double eps) {
  if (eps <= 0.0) throw ParameterError("grad_check: eps must be > 0");

  const double base = evaluate(build, params);
  if (evaluate(build, params) != base)
    throw DeterminismError(
        "grad_check: two evaluations at the same point disagree; "
        "the loss builder is not deterministic");

  Tape tape;
  GradientMap analytic = tape.backward(build(tape, params));

  double worst = 0.0;
  for (const auto& [name, value] : params) {
    const Matrix& grad = analytic.at(name);
    for (std::size_t r = 0; r < value.rows(); ++r) {
      for (std::size_t c = 0; c < value.cols(); ++c) {
        ParamMap bumped = params;
        bumped[name](r, c) = value(r, c) + eps;
        const double up = evaluate(build, bumped);
        bumped[name](r, c) = value(r, c) - eps;
        const double down = evaluate(build, bumped);
        const double numeric = (up - down) / (2.0 * eps);
        const double err =
            std::abs(grad(r, c) - numeric) / std::max(1.0, std::abs(numeric));
        if (err > worst) worst = err;
      }
    }
  }
  return worst;
}

}  // namespace ssan
