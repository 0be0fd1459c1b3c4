// Per-iteration correspondence machinery: forward matches into the model
// shape, overlap selection over sorted residuals, backward matches for the
// selected inliers, and the reliability weights derived from the ratio of
// bidirectional distances.
#pragma once

#include "hsaicp/geometry.hpp"
#include "hsaicp/kdtree.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace hsaicp {

/// A batch of nearest-neighbor matches; entry k pairs query k with
/// target[k] at Euclidean distance[k].
struct Matches {
  std::vector<std::size_t> target;
  std::vector<double> distance;

  std::size_t size() const { return target.size(); }
};

/// One match per data point: target[i] is the model index c(i) nearest to
/// transformed_data[i], distance[i] the exact forward distance.
Matches forward_correspondences(const KdTree& model_index,
                                const PointCloud& transformed_data);

/// Result of the trimmed overlap search: the fraction xi of data points
/// kept as inliers, chosen by minimizing psi = sum of the h smallest
/// squared forward distances / (h * xi^(1+lambda)) over all admissible
/// prefix sizes h.
struct HardAssignment {
  double xi = 1.0;
  std::size_t inlier_count = 0;
  double psi = 0.0;
  std::vector<std::uint8_t> inlier_mask;  // per data index, 1 = inlier
};

/// Sequence-processing minimizer over prefix sizes h in
/// [ceil(xi_min * N), N] of distance-sorted residuals. Ties in psi pick the
/// smaller prefix; the all-zero-residual case returns full overlap.
HardAssignment hard_assignment(std::span<const double> forward_dists,
                               double lambda, double xi_min);

/// Backward matches for the inliers' model points. Each model point is
/// mapped through the inverse of the current transform and queried against
/// the index of the *untransformed* data shape, which therefore never needs
/// rebuilding. The returned distance is measured in untransformed-data
/// space and agrees with the transformed-space backward distance up to
/// rigid-motion roundoff.
Matches backward_correspondences(const KdTree& data_index,
                                 const PointCloud& inlier_model_points,
                                 const RigidTransform& current);

/// Regularized ratio of bidirectional distances,
/// (forward + delta) / (backward + delta), >= 1 whenever forward >=
/// backward. delta keeps coincident correspondences legal.
double distance_ratio(double forward_dist, double backward_dist, double delta);

/// Reliability weight exp(-gamma * (rho - 1)) in (0, 1]; monotone
/// non-increasing in rho, equal to 1 exactly when the bidirectional
/// distances agree. gamma = 0 disables the penalty.
double soft_assignment(double rho, double gamma);

/// Everything one iteration knows about its correspondences. Backward
/// fields are only meaningful where omega == 1; q is exactly zero for
/// outliers.
struct CorrespondenceSet {
  std::vector<std::size_t> forward_target;  // c(i)
  std::vector<double> forward_dist;
  std::vector<std::uint8_t> omega;          // hard weight
  std::vector<std::size_t> backward_source;  // l, inliers only
  std::vector<double> backward_dist;         // inliers only
  std::vector<double> rho;                   // inliers only
  std::vector<double> p;                     // inliers only
  // Solver weight: omega * p for the assignment-based algorithms, the
  // baseline's own weighting rule otherwise.
  std::vector<double> q;

  std::size_t size() const { return forward_target.size(); }
};

}  // namespace hsaicp
