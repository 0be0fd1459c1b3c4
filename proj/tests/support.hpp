// Shared test utilities: deterministic random data and the independent
// brute-force oracles the suites check against.
#pragma once

#include "hsaicp/geometry.hpp"
#include "hsaicp/simulation.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace testutil {

inline hsaicp::PointCloud random_cloud(std::size_t n, std::uint64_t seed,
                                       double extent = 1.0) {
  hsaicp::Rng rng(seed);
  std::vector<hsaicp::Point3> points;
  points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    points.emplace_back(rng.uniform(-extent, extent), rng.uniform(-extent, extent),
                        rng.uniform(-extent, extent));
  }
  return hsaicp::PointCloud(std::move(points));
}

inline hsaicp::RigidTransform random_rigid(std::uint64_t seed,
                                           double max_angle_deg = 180.0,
                                           double max_trans = 1.0) {
  return hsaicp::random_perturbation(max_angle_deg, max_trans, 1.0, seed);
}

// Linear-scan nearest neighbor with the same lowest-index tie-break the
// index promises.
inline std::pair<std::size_t, double> nearest_linear(const hsaicp::PointCloud& cloud,
                                                     const hsaicp::Point3& query) {
  std::size_t best = std::numeric_limits<std::size_t>::max();
  double best_sq = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double sq = (cloud[i] - query).squaredNorm();
    if (sq < best_sq || (sq == best_sq && i < best)) {
      best_sq = sq;
      best = i;
    }
  }
  return {best, std::sqrt(best_sq)};
}

struct PrefixChoice {
  std::size_t h;
  double psi;
};

// Exhaustive evaluation of the trimmed statistic over every admissible
// prefix, with fresh summation per prefix. Smallest prefix wins ties; the
// all-zero case keeps everything.
inline PrefixChoice exhaustive_prefix_search(std::span<const double> dists,
                                             double lambda, double xi_min) {
  std::vector<double> sorted(dists.begin(), dists.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double nd = static_cast<double>(n);

  std::size_t h_min = 1;
  while (static_cast<double>(h_min) < xi_min * nd - 1e-9) ++h_min;

  double best_psi = std::numeric_limits<double>::infinity();
  std::size_t best_h = n;
  double total = 0.0;
  for (std::size_t h = h_min; h <= n; ++h) {
    double sum = 0.0;
    for (std::size_t k = 0; k < h; ++k) sum += sorted[k] * sorted[k];
    const double xi = static_cast<double>(h) / nd;
    const double psi = sum / (static_cast<double>(h) * std::pow(xi, 1.0 + lambda));
    if (psi < best_psi) {
      best_psi = psi;
      best_h = h;
    }
  }
  for (double v : sorted) total += v * v;
  if (total == 0.0) return {n, 0.0};
  return {best_h, best_psi};
}

inline double max_abs_diff(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace testutil
