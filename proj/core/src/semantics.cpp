#include "ssan/semantics.hpp"

#include <cmath>
#include <string>

#include "ssan/errors.hpp"

namespace ssan {

namespace {

constexpr double kNormFloor = 1e-12;

void check_labels(const std::vector<int>& y, std::size_t n, std::size_t K,
                  const char* who) {
  if (y.size() != n)
    throw DimensionError(std::string(who) + ": " + std::to_string(y.size()) +
                         " labels for " + std::to_string(n) + " rows");
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y[i] < 0 || static_cast<std::size_t>(y[i]) >= K)
      throw LabelError(std::string(who) + ": label " + std::to_string(y[i]) +
                       " out of range at row " + std::to_string(i));
}

std::vector<std::vector<std::size_t>> rows_by_class(const std::vector<int>& y,
                                                    std::size_t K) {
  std::vector<std::vector<std::size_t>> groups(K);
  for (std::size_t i = 0; i < y.size(); ++i)
    groups[static_cast<std::size_t>(y[i])].push_back(i);
  return groups;
}

}  // namespace

std::size_t PseudoLabelAssignment::selected_count() const {
  std::size_t n = 0;
  for (bool s : selected) n += s ? 1 : 0;
  return n;
}

std::vector<std::size_t> PseudoLabelAssignment::selected_indices() const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < selected.size(); ++i)
    if (selected[i]) idx.push_back(i);
  return idx;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw DimensionError("cosine_similarity: lengths " + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()));
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  na = std::sqrt(na);
  nb = std::sqrt(nb);
  if (na < kNormFloor || nb < kNormFloor) return -1.0;
  return dot / (na * nb);
}

CentroidSet supervised_centroids(const Matrix& z_s, const std::vector<int>& y_s,
                                 const Matrix& z_l, const std::vector<int>& y_l,
                                 std::size_t K) {
  if (!z_s.empty() && !z_l.empty() && z_s.cols() != z_l.cols())
    throw DimensionError("supervised_centroids: feature widths " +
                         z_s.shape_str() + " vs " + z_l.shape_str());
  check_labels(y_s, z_s.rows(), K, "supervised_centroids(source)");
  check_labels(y_l, z_l.rows(), K, "supervised_centroids(target)");

  const std::size_t d = z_s.empty() ? z_l.cols() : z_s.cols();
  CentroidSet out;
  out.mu = Matrix(K, d);
  out.defined.assign(K, false);
  std::vector<std::size_t> counts(K, 0);

  for (std::size_t i = 0; i < z_s.rows(); ++i) {
    auto dst = out.mu.row(static_cast<std::size_t>(y_s[i]));
    auto src = z_s.row(i);
    for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
    ++counts[static_cast<std::size_t>(y_s[i])];
  }
  for (std::size_t i = 0; i < z_l.rows(); ++i) {
    auto dst = out.mu.row(static_cast<std::size_t>(y_l[i]));
    auto src = z_l.row(i);
    for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
    ++counts[static_cast<std::size_t>(y_l[i])];
  }
  for (std::size_t k = 0; k < K; ++k) {
    if (counts[k] == 0) continue;
    out.defined[k] = true;
    const double inv = 1.0 / static_cast<double>(counts[k]);
    for (double& v : out.mu.row(k)) v *= inv;
  }
  return out;
}

std::size_t gs_label(std::span<const double> z, const CentroidSet& centroids) {
  bool any = false;
  std::size_t best = 0;
  double best_sim = 0.0;
  for (std::size_t k = 0; k < centroids.defined.size(); ++k) {
    if (!centroids.defined[k]) continue;
    const double sim = cosine_similarity(z, centroids.mu.row(k));
    if (!any || sim > best_sim) {
      any = true;
      best = k;
      best_sim = sim;
    }
  }
  if (!any) throw ProtocolError("gs_label: no defined centroid");
  return best;
}

PseudoLabelAssignment refine_pseudo_labels(const Matrix& logits_u,
                                           const Matrix& z_u,
                                           const CentroidSet& centroids) {
  if (logits_u.rows() != z_u.rows())
    throw DimensionError("refine_pseudo_labels: " + logits_u.shape_str() +
                         " logits vs " + z_u.shape_str() + " features");
  const std::size_t n = logits_u.rows();
  PseudoLabelAssignment out;
  out.y_nn.resize(n);
  out.y_gs.resize(n);
  out.selected.resize(n);
  out.assigned.assign(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    out.y_nn[i] = static_cast<int>(argmax(logits_u.row(i)));
    out.y_gs[i] = static_cast<int>(gs_label(z_u.row(i), centroids));
    out.selected[i] = out.y_nn[i] == out.y_gs[i];
    if (out.selected[i]) out.assigned[i] = out.y_nn[i];
  }
  return out;
}

PseudoLabelAssignment nn_only_assignment(const Matrix& logits_u) {
  const std::size_t n = logits_u.rows();
  PseudoLabelAssignment out;
  out.y_nn.resize(n);
  out.selected.assign(n, true);
  for (std::size_t i = 0; i < n; ++i)
    out.y_nn[i] = static_cast<int>(argmax(logits_u.row(i)));
  out.y_gs = out.y_nn;
  out.assigned = out.y_nn;
  return out;
}

TripletCentroids triplet_centroids(const Matrix& z_s, const std::vector<int>& y_s,
                                   const Matrix& z_t, const std::vector<int>& y_t,
                                   std::size_t K) {
  check_labels(y_s, z_s.rows(), K, "triplet_centroids(source)");
  check_labels(y_t, z_t.rows(), K, "triplet_centroids(target)");
  const std::size_t d = z_s.cols();
  TripletCentroids out;
  out.mu_s = Matrix(K, d);
  out.mu_t = Matrix(K, d);
  out.mu_st = Matrix(K, d);
  out.active.assign(K, false);

  const auto gs = rows_by_class(y_s, K);
  const auto gt = rows_by_class(y_t, K);
  for (std::size_t k = 0; k < K; ++k) {
    if (gs[k].empty() || gt[k].empty()) continue;
    out.active[k] = true;
    Matrix s_rows = select_rows(z_s, gs[k]);
    Matrix t_rows = select_rows(z_t, gt[k]);
    Matrix ms = mean_rows(s_rows);
    Matrix mt = mean_rows(t_rows);
    Matrix mst = mean_rows(concat_rows(s_rows, t_rows));
    for (std::size_t j = 0; j < d; ++j) {
      out.mu_s(k, j) = ms(0, j);
      out.mu_t(k, j) = mt(0, j);
      out.mu_st(k, j) = mst(0, j);
    }
  }
  return out;
}

TapeTriplet triplet_centroid_nodes(Tape& t, Tape::NodeId z_s,
                                   const std::vector<int>& y_s,
                                   Tape::NodeId z_t,
                                   const std::vector<int>& y_t, std::size_t K) {
  check_labels(y_s, t.value(z_s).rows(), K, "triplet_centroid_nodes(source)");
  check_labels(y_t, t.value(z_t).rows(), K, "triplet_centroid_nodes(target)");

  const auto gs = rows_by_class(y_s, K);
  const auto gt = rows_by_class(y_t, K);
  TapeTriplet out;
  for (std::size_t k = 0; k < K; ++k) {
    if (gs[k].empty() || gt[k].empty()) continue;
    auto s_rows = t.select_rows(z_s, gs[k]);
    auto t_rows = t.select_rows(z_t, gt[k]);
    out.mu_s.push_back(t.mean_rows(s_rows));
    out.mu_t.push_back(t.mean_rows(t_rows));
    out.mu_st.push_back(t.mean_rows(t.concat_rows(s_rows, t_rows)));
    out.active_classes.push_back(k);
  }
  return out;
}

}  // namespace ssan
