#include "hsaicp/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace hsaicp {

Matches forward_correspondences(const KdTree& model_index,
                                const PointCloud& transformed_data) {
  if (transformed_data.empty()) {
    throw std::invalid_argument("forward_correspondences: empty data shape");
  }
  Matches out;
  out.target.resize(transformed_data.size());
  out.distance.resize(transformed_data.size());
  for (std::size_t i = 0; i < transformed_data.size(); ++i) {
    const KdTree::Result r = model_index.nearest(transformed_data[i]);
    out.target[i] = r.index;
    out.distance[i] = r.distance;
  }
  return out;
}

HardAssignment hard_assignment(std::span<const double> forward_dists,
                               double lambda, double xi_min) {
  const std::size_t n = forward_dists.size();
  if (n == 0) throw std::invalid_argument("hard_assignment: no distances");
  if (!(lambda > 0.0)) throw std::invalid_argument("hard_assignment: lambda must be > 0");
  if (!(xi_min > 0.0) || xi_min > 1.0) {
    throw std::invalid_argument("hard_assignment: xi_min must be in (0, 1]");
  }
  for (double d : forward_dists) {
    if (!(d >= 0.0) || !std::isfinite(d)) {
      throw std::invalid_argument("hard_assignment: distances must be finite and >= 0");
    }
  }

  // Sort by (distance, index) so equal residuals resolve deterministically.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return forward_dists[a] < forward_dists[b] ||
           (forward_dists[a] == forward_dists[b] && a < b);
  });

  // Tolerant ceiling: xi_min * n may land a hair above an integer it should
  // hit exactly (e.g. 0.1 * 30).
  const double nd = static_cast<double>(n);
  std::size_t h_min = static_cast<std::size_t>(std::ceil(xi_min * nd - 1e-9));
  h_min = std::clamp<std::size_t>(h_min, 1, n);

  double running = 0.0;
  double best_psi = std::numeric_limits<double>::infinity();
  std::size_t best_h = n;
  for (std::size_t h = 1; h <= n; ++h) {
    const double d = forward_dists[order[h - 1]];
    running += d * d;
    if (h < h_min) continue;
    const double xi = static_cast<double>(h) / nd;
    const double psi = running / (static_cast<double>(h) * std::pow(xi, 1.0 + lambda));
    if (psi < best_psi) {
      best_psi = psi;
      best_h = h;
    }
  }
  // All residuals zero: every prefix scores zero, the registration is
  // already perfect, keep everything.
  if (running == 0.0) {
    best_h = n;
    best_psi = 0.0;
  }

  HardAssignment out;
  out.inlier_count = best_h;
  out.xi = static_cast<double>(best_h) / nd;
  out.psi = best_psi;
  out.inlier_mask.assign(n, 0);
  for (std::size_t k = 0; k < best_h; ++k) out.inlier_mask[order[k]] = 1;
  return out;
}

Matches backward_correspondences(const KdTree& data_index,
                                 const PointCloud& inlier_model_points,
                                 const RigidTransform& current) {
  if (inlier_model_points.empty()) {
    throw std::invalid_argument("backward_correspondences: no inliers");
  }
  const RigidTransform inverse = invert_transform(current);
  Matches out;
  out.target.resize(inlier_model_points.size());
  out.distance.resize(inlier_model_points.size());
  for (std::size_t k = 0; k < inlier_model_points.size(); ++k) {
    const KdTree::Result r = data_index.nearest(inverse(inlier_model_points[k]));
    out.target[k] = r.index;
    out.distance[k] = r.distance;
  }
  return out;
}

double distance_ratio(double forward_dist, double backward_dist, double delta) {
  if (forward_dist < 0.0 || backward_dist < 0.0) {
    throw std::invalid_argument("distance_ratio: negative distance");
  }
  if (!(delta > 0.0)) throw std::invalid_argument("distance_ratio: delta must be > 0");
  if (backward_dist > forward_dist) {
    throw std::invalid_argument(
        "distance_ratio: backward distance exceeds forward distance");
  }
  return (forward_dist + delta) / (backward_dist + delta);
}

double soft_assignment(double rho, double gamma) {
  if (rho < 1.0) throw std::invalid_argument("soft_assignment: rho must be >= 1");
  if (gamma < 0.0) throw std::invalid_argument("soft_assignment: gamma must be >= 0");
  // exp underflows to 0 for huge ratios; the weight contract is (0, 1].
  return std::max(std::exp(-gamma * (rho - 1.0)),
                  std::numeric_limits<double>::min());
}

}  // namespace hsaicp
