#include "ssan/tape.hpp"

#include <cmath>
#include <utility>

#include "ssan/errors.hpp"

namespace ssan {

Tape::NodeId Tape::emplace(Matrix value, bool needs_grad, BackwardFn fn) {
  nodes_.push_back(Node{std::move(value), needs_grad, std::move(fn)});
  return static_cast<NodeId>(nodes_.size() - 1);
}

const Matrix& Tape::value(NodeId id) const {
  return nodes_.at(static_cast<std::size_t>(id)).value;
}

double Tape::scalar(NodeId id) const {
  const Matrix& v = value(id);
  if (v.rows() != 1 || v.cols() != 1)
    throw DimensionError("scalar: node is " + v.shape_str() + ", expected 1x1");
  return v(0, 0);
}

void Tape::pull(NodeId target, const Matrix& contribution) {
  if (!needs(target)) return;
  Matrix& g = grads_[static_cast<std::size_t>(target)];
  if (g.empty() && !(contribution.rows() == 0 || contribution.cols() == 0))
    g = Matrix(contribution.rows(), contribution.cols());
  if (!g.empty()) add_in_place(g, contribution);
}

void Tape::pull_scaled(NodeId target, const Matrix& contribution, double c) {
  if (!needs(target)) return;
  Matrix& g = grads_[static_cast<std::size_t>(target)];
  if (g.empty()) g = Matrix(contribution.rows(), contribution.cols());
  auto gd = g.data();
  auto cd = contribution.data();
  for (std::size_t i = 0; i < gd.size(); ++i) gd[i] += c * cd[i];
}

Tape::NodeId Tape::constant(Matrix value) {
  return emplace(std::move(value), false, nullptr);
}

Tape::NodeId Tape::param(const std::string& name, const Matrix& value) {
  if (params_.count(name))
    throw ParameterError("param: duplicate parameter name '" + name + "'");
  NodeId id = emplace(value, true, nullptr);
  params_[name] = id;
  return id;
}

Tape::NodeId Tape::add(NodeId a, NodeId b) {
  Matrix out = ssan::add(value(a), value(b));
  return emplace(std::move(out), needs(a) || needs(b),
                 [a, b](Tape& t, const Matrix& g) {
                   t.pull(a, g);
                   t.pull(b, g);
                 });
}

Tape::NodeId Tape::sub(NodeId a, NodeId b) {
  Matrix out = ssan::sub(value(a), value(b));
  return emplace(std::move(out), needs(a) || needs(b),
                 [a, b](Tape& t, const Matrix& g) {
                   t.pull(a, g);
                   t.pull_scaled(b, g, -1.0);
                 });
}

Tape::NodeId Tape::hadamard(NodeId a, NodeId b) {
  Matrix out = ssan::hadamard(value(a), value(b));
  return emplace(std::move(out), needs(a) || needs(b),
                 [a, b](Tape& t, const Matrix& g) {
                   if (t.needs(a)) t.pull(a, ssan::hadamard(g, t.value(b)));
                   if (t.needs(b)) t.pull(b, ssan::hadamard(g, t.value(a)));
                 });
}

Tape::NodeId Tape::scale(NodeId a, double c) {
  Matrix out = scaled(value(a), c);
  return emplace(std::move(out), needs(a),
                 [a, c](Tape& t, const Matrix& g) { t.pull_scaled(a, g, c); });
}

Tape::NodeId Tape::affine(NodeId x, NodeId w, NodeId b) {
  Matrix out = ssan::affine(value(x), value(w), value(b));
  return emplace(std::move(out), needs(x) || needs(w) || needs(b),
                 [x, w, b](Tape& t, const Matrix& g) {
                   if (t.needs(x)) t.pull(x, matmul_transpose_b(g, t.value(w)));
                   if (t.needs(w)) t.pull(w, matmul_transpose_a(t.value(x), g));
                   if (t.needs(b)) {
                     Matrix gb(1, g.cols());
                     auto o = gb.row(0);
                     for (std::size_t i = 0; i < g.rows(); ++i) {
                       auto grow = g.row(i);
                       for (std::size_t j = 0; j < grow.size(); ++j) o[j] += grow[j];
                     }
                     t.pull(b, gb);
                   }
                 });
}

Tape::NodeId Tape::leaky_relu(NodeId x, double slope) {
  Matrix out = ssan::leaky_relu(value(x), slope);
  return emplace(std::move(out), needs(x),
                 [x, slope](Tape& t, const Matrix& g) {
                   if (!t.needs(x)) return;
                   // gradient 1 at input >= 0 (including exactly 0), slope below
                   Matrix gx = g;
                   auto xd = t.value(x).data();
                   auto gd = gx.data();
                   for (std::size_t i = 0; i < gd.size(); ++i)
                     if (xd[i] < 0.0) gd[i] *= slope;
                   t.pull(x, gx);
                 });
}

Tape::NodeId Tape::softmax_rows(NodeId x, double temperature) {
  Matrix out = ssan::softmax_rows(value(x), temperature);
  NodeId self = emplace(std::move(out), needs(x), nullptr);
  nodes_.back().backward = [x, self, temperature](Tape& t, const Matrix& g) {
    if (!t.needs(x)) return;
    const Matrix& y = t.value(self);
    Matrix gx(y.rows(), y.cols());
    for (std::size_t i = 0; i < y.rows(); ++i) {
      auto yrow = y.row(i);
      auto grow = g.row(i);
      auto orow = gx.row(i);
      double dot = 0.0;
      for (std::size_t j = 0; j < yrow.size(); ++j) dot += grow[j] * yrow[j];
      for (std::size_t j = 0; j < yrow.size(); ++j)
        orow[j] = yrow[j] * (grow[j] - dot) / temperature;
    }
    t.pull(x, gx);
  };
  return self;
}

Tape::NodeId Tape::logistic_clamped(NodeId x) {
  Matrix out = ssan::logistic_clamped(value(x));
  NodeId self = emplace(std::move(out), needs(x), nullptr);
  nodes_.back().backward = [x, self](Tape& t, const Matrix& g) {
    if (!t.needs(x)) return;
    const Matrix& y = t.value(self);
    Matrix gx = g;
    auto yd = y.data();
    auto gd = gx.data();
    for (std::size_t i = 0; i < gd.size(); ++i) {
      // zero in the clamped region, logistic derivative elsewhere
      if (yd[i] <= kSigmoidClamp || yd[i] >= 1.0 - kSigmoidClamp)
        gd[i] = 0.0;
      else
        gd[i] *= yd[i] * (1.0 - yd[i]);
    }
    t.pull(x, gx);
  };
  return self;
}

Tape::NodeId Tape::log_clamped(NodeId x, double floor) {
  Matrix out = ssan::log_clamped(value(x), floor);
  return emplace(std::move(out), needs(x),
                 [x, floor](Tape& t, const Matrix& g) {
                   if (!t.needs(x)) return;
                   Matrix gx = g;
                   auto xd = t.value(x).data();
                   auto gd = gx.data();
                   for (std::size_t i = 0; i < gd.size(); ++i)
                     gd[i] = xd[i] > floor ? gd[i] / xd[i] : 0.0;
                   t.pull(x, gx);
                 });
}

Tape::NodeId Tape::select_rows(NodeId x, std::vector<std::size_t> indices) {
  Matrix out = ssan::select_rows(value(x), indices);
  return emplace(std::move(out), needs(x),
                 [x, idx = std::move(indices)](Tape& t, const Matrix& g) {
                   if (!t.needs(x)) return;
                   Matrix gx(t.value(x).rows(), t.value(x).cols());
                   for (std::size_t r = 0; r < idx.size(); ++r) {
                     auto grow = g.row(r);
                     auto orow = gx.row(idx[r]);
                     for (std::size_t j = 0; j < grow.size(); ++j) orow[j] += grow[j];
                   }
                   t.pull(x, gx);
                 });
}

Tape::NodeId Tape::concat_rows(NodeId a, NodeId b) {
  Matrix out = ssan::concat_rows(value(a), value(b));
  const std::size_t na = value(a).rows();
  return emplace(std::move(out), needs(a) || needs(b),
                 [a, b, na](Tape& t, const Matrix& g) {
                   if (t.needs(a) && na > 0) {
                     Matrix ga(na, g.cols());
                     for (std::size_t i = 0; i < na; ++i) {
                       auto src = g.row(i);
                       auto dst = ga.row(i);
                       for (std::size_t j = 0; j < src.size(); ++j) dst[j] = src[j];
                     }
                     t.pull(a, ga);
                   }
                   const std::size_t nb = g.rows() - na;
                   if (t.needs(b) && nb > 0) {
                     Matrix gb(nb, g.cols());
                     for (std::size_t i = 0; i < nb; ++i) {
                       auto src = g.row(na + i);
                       auto dst = gb.row(i);
                       for (std::size_t j = 0; j < src.size(); ++j) dst[j] = src[j];
                     }
                     t.pull(b, gb);
                   }
                 });
}

Tape::NodeId Tape::mean_rows(NodeId x) {
  Matrix out = ssan::mean_rows(value(x));
  return emplace(std::move(out), needs(x),
                 [x](Tape& t, const Matrix& g) {
                   if (!t.needs(x)) return;
                   const std::size_t n = t.value(x).rows();
                   Matrix gx(n, g.cols());
                   const double inv = 1.0 / static_cast<double>(n);
                   auto grow = g.row(0);
                   for (std::size_t i = 0; i < n; ++i) {
                     auto orow = gx.row(i);
                     for (std::size_t j = 0; j < grow.size(); ++j) orow[j] = grow[j] * inv;
                   }
                   t.pull(x, gx);
                 });
}

Tape::NodeId Tape::sum_all(NodeId x) {
  Matrix out(1, 1, ssan::sum_all(value(x)));
  return emplace(std::move(out), needs(x),
                 [x](Tape& t, const Matrix& g) {
                   if (!t.needs(x)) return;
                   const Matrix& xv = t.value(x);
                   t.pull(x, Matrix(xv.rows(), xv.cols(), g(0, 0)));
                 });
}

Tape::NodeId Tape::mean_all(NodeId x) {
  Matrix out(1, 1, ssan::mean_all(value(x)));
  return emplace(std::move(out), needs(x),
                 [x](Tape& t, const Matrix& g) {
                   if (!t.needs(x)) return;
                   const Matrix& xv = t.value(x);
                   const double v = g(0, 0) / static_cast<double>(xv.size());
                   t.pull(x, Matrix(xv.rows(), xv.cols(), v));
                 });
}

Tape::NodeId Tape::sum_squares(NodeId x) {
  Matrix out(1, 1, ssan::sum_squares(value(x)));
  return emplace(std::move(out), needs(x),
                 [x](Tape& t, const Matrix& g) {
                   if (!t.needs(x)) return;
                   t.pull(x, scaled(t.value(x), 2.0 * g(0, 0)));
                 });
}

Tape::NodeId Tape::gather_cols(NodeId x, std::vector<int> cols) {
  Matrix out = ssan::gather_cols(value(x), cols);
  return emplace(std::move(out), needs(x),
                 [x, cols = std::move(cols)](Tape& t, const Matrix& g) {
                   if (!t.needs(x)) return;
                   Matrix gx(t.value(x).rows(), t.value(x).cols());
                   for (std::size_t i = 0; i < cols.size(); ++i)
                     gx(i, static_cast<std::size_t>(cols[i])) += g(i, 0);
                   t.pull(x, gx);
                 });
}

GradientMap Tape::backward(NodeId loss) {
  const Matrix& lv = value(loss);
  if (lv.rows() != 1 || lv.cols() != 1)
    throw DimensionError("backward: loss node is " + lv.shape_str() +
                         ", expected 1x1 scalar");
  grads_.assign(nodes_.size(), Matrix());
  grads_[static_cast<std::size_t>(loss)] = Matrix(1, 1, 1.0);
  for (std::size_t i = static_cast<std::size_t>(loss) + 1; i-- > 0;) {
    const Node& node = nodes_[i];
    if (grads_[i].empty() || !node.backward) continue;
    node.backward(*this, grads_[i]);
  }
  GradientMap out;
  for (const auto& [name, id] : params_) {
    Matrix& g = grads_[static_cast<std::size_t>(id)];
    if (g.empty()) g = Matrix(value(id).rows(), value(id).cols());
    out.emplace(name, std::move(g));
  }
  grads_.clear();
  return out;
}

}  // namespace ssan
