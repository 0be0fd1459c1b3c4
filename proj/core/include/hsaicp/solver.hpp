// Closed-form weighted rigid alignment: weighted centroiding plus an SVD of
// the weighted cross-covariance, with a determinant guard against
// reflections.
#pragma once

#include "hsaicp/geometry.hpp"

#include <stdexcept>
#include <vector>

namespace hsaicp {

/// No pair carries positive weight.
class NoInliersError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The weighted support does not determine a unique rotation (fewer than
/// three effective pairs, or a collinear/coincident configuration).
class DegenerateGeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Weighted point pairs (source -> target). Sources are the untransformed
/// data points; weights are the products q_i of the hard and soft
/// assignments (any non-negative weights are accepted).
struct WeightedPairSet {
  std::vector<Point3> source;
  std::vector<Point3> target;
  std::vector<double> weight;

  std::size_t size() const { return source.size(); }
};

/// Global minimizer of sum_i w_i * |R s_i + t - m_i|^2 over proper rigid
/// motions. Throws NoInliersError when all weights vanish and
/// DegenerateGeometryError when the support cannot fix the rotation.
RigidTransform weighted_rigid_solve(const WeightedPairSet& pairs);

/// The objective itself: sum_i w_i * |R s_i + t - m_i|^2.
double weighted_sse(const WeightedPairSet& pairs, const RigidTransform& transform);

}  // namespace hsaicp
