#pragma once

#include <span>
#include <vector>

#include "ssan/matrix.hpp"
#include "ssan/tape.hpp"

namespace ssan {

/// Per-class mean of encoded features from labeled source and labeled
/// target together. Rows for classes with no contributing instance are
/// zero and flagged undefined.
struct CentroidSet {
  Matrix mu;                   // K x d_common
  std::vector<bool> defined;   // per class
};

/// Source / target / combined per-class means. A class is active when
/// both domains contribute at least one instance; inactive rows are zero.
struct TripletCentroids {
  Matrix mu_s, mu_t, mu_st;    // K x d_common each
  std::vector<bool> active;
};

/// Tape-resident triplet centroids: one 1 x d_common node per active
/// class, aligned across the three vectors, so alignment losses built on
/// them backpropagate into the encoders.
struct TapeTriplet {
  std::vector<Tape::NodeId> mu_s, mu_t, mu_st;
  std::vector<std::size_t> active_classes;
};

/// One entry per unlabeled instance. `assigned` is the consensus label
/// when `selected`, otherwise -1.
struct PseudoLabelAssignment {
  std::vector<int> y_nn;        // classifier argmax
  std::vector<int> y_gs;        // geometric-similarity label
  std::vector<bool> selected;   // y_nn == y_gs
  std::vector<int> assigned;

  std::size_t size() const { return y_nn.size(); }
  std::size_t selected_count() const;
  std::vector<std::size_t> selected_indices() const;
};

/// a.b / (|a||b|); returns -1 when either norm is below 1e-12 so a
/// degenerate vector can never win an argmax.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Per-class mean over source and labeled-target features jointly.
/// Detached by construction (plain matrices); used only for GS labeling.
CentroidSet supervised_centroids(const Matrix& z_s, const std::vector<int>& y_s,
                                 const Matrix& z_l, const std::vector<int>& y_l,
                                 std::size_t K);

/// Class whose centroid has the highest cosine similarity to z; ties
/// break toward the lowest class index; undefined centroids are skipped.
std::size_t gs_label(std::span<const double> z, const CentroidSet& centroids);

/// Assigns a pseudo-label to exactly those unlabeled instances where the
/// classifier vote and the geometric vote agree. No confidence threshold.
PseudoLabelAssignment refine_pseudo_labels(const Matrix& logits_u,
                                           const Matrix& z_u,
                                           const CentroidSet& centroids);

/// Classifier-only assignment: every instance selected with its argmax
/// label (the refinement switched off).
PseudoLabelAssignment nn_only_assignment(const Matrix& logits_u);

/// Plain per-class triplet means (oracle/evaluation path).
TripletCentroids triplet_centroids(const Matrix& z_s, const std::vector<int>& y_s,
                                   const Matrix& z_t, const std::vector<int>& y_t,
                                   std::size_t K);

/// Tape version: builds the three means per active class from row
/// selections of the encoded-feature nodes, keeping them differentiable.
/// The combined mean averages the concatenated rows, which equals the
/// count-weighted blend of the two domain means.
TapeTriplet triplet_centroid_nodes(Tape& t, Tape::NodeId z_s,
                                   const std::vector<int>& y_s,
                                   Tape::NodeId z_t,
                                   const std::vector<int>& y_t, std::size_t K);

}  // namespace ssan
