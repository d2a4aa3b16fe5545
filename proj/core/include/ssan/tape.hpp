#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ssan/matrix.hpp"

namespace ssan {

/// Gradients keyed by parameter name. std::map keeps iteration order
/// deterministic for the optimizer.
using GradientMap = std::map<std::string, Matrix>;
using ParamMap = std::map<std::string, Matrix>;

/// Define-by-run reverse-mode differentiation record. Each operation
/// appends a node holding the forward value and a closure that routes the
/// upstream gradient to its inputs; nodes are created in topological order
/// by construction, so backward() is a single reverse sweep.
///
/// Leaves come in two kinds: named trainable parameters (returned in the
/// gradient map after backward) and constants (no gradient is ever
/// computed for them or through subtrees reaching only them). A tape is
/// rebuilt for every training step and supports multiple backward passes
/// over the same forward values.
class Tape {
public:
  using NodeId = std::int32_t;
  static constexpr NodeId kNoNode = -1;

  // ---- leaves ----
  NodeId constant(Matrix value);
  NodeId param(const std::string& name, const Matrix& value);

  // ---- elementwise / scalar ----
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId hadamard(NodeId a, NodeId b);
  NodeId scale(NodeId a, double c);

  // ---- layers ----
  NodeId affine(NodeId x, NodeId w, NodeId b);
  NodeId leaky_relu(NodeId x, double slope);
  NodeId softmax_rows(NodeId x, double temperature);
  NodeId logistic_clamped(NodeId x);
  NodeId log_clamped(NodeId x, double floor = kLogFloor);

  // ---- selection / reduction ----
  NodeId select_rows(NodeId x, std::vector<std::size_t> indices);
  NodeId concat_rows(NodeId a, NodeId b);
  NodeId mean_rows(NodeId x);
  NodeId sum_all(NodeId x);    // 1x1
  NodeId mean_all(NodeId x);   // 1x1
  NodeId sum_squares(NodeId x);  // 1x1
  NodeId gather_cols(NodeId x, std::vector<int> cols);  // n x 1

  // ---- access ----
  const Matrix& value(NodeId id) const;
  double scalar(NodeId id) const;  // value of a 1x1 node
  std::size_t node_count() const { return nodes_.size(); }
  bool has_param(const std::string& name) const { return params_.count(name) != 0; }
  const std::map<std::string, NodeId>& params() const { return params_; }

  /// Reverse sweep from a 1x1 loss node. Returns one gradient per
  /// registered parameter; parameters the loss never touches get zeros.
  GradientMap backward(NodeId loss);

private:
  // Receives the accumulated gradient of its own node and pushes
  // contributions to parents via pull().
  using BackwardFn = std::function<void(Tape&, const Matrix& upstream)>;

  struct Node {
    Matrix value;
    bool needs_grad = false;
    BackwardFn backward;
  };

  NodeId emplace(Matrix value, bool needs_grad, BackwardFn fn);
  void pull(NodeId target, const Matrix& contribution);
  void pull_scaled(NodeId target, const Matrix& contribution, double c);
  bool needs(NodeId id) const { return nodes_[static_cast<std::size_t>(id)].needs_grad; }

  std::vector<Node> nodes_;
  std::vector<Matrix> grads_;  // live only inside backward()
  std::map<std::string, NodeId> params_;
};

}  // namespace ssan
