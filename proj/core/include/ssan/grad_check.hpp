#pragma once

#include <functional>

#include "ssan/tape.hpp"

namespace ssan {

/// Builds a fresh tape over the given parameters and returns the loss node.
/// Must be deterministic: called repeatedly with perturbed copies of the
/// parameter map during finite-difference checking.
using LossBuilder = std::function<Tape::NodeId(Tape&, const ParamMap&)>;

/// Compares reverse-mode gradients against central finite differences
/// (loss(w+eps) - loss(w-eps)) / (2 eps) for every entry of every parameter.
/// Returns the max over entries of |analytic - numeric| / max(1, |numeric|).
/// Throws DeterminismError if two evaluations at the base point disagree.
double grad_check(const LossBuilder& build, const ParamMap& params, double eps);

}  // namespace ssan
