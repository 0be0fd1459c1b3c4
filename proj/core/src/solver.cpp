#include "hsaicp/solver.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>

namespace hsaicp {

namespace {

void validate(const WeightedPairSet& pairs) {
  if (pairs.source.size() != pairs.target.size() ||
      pairs.source.size() != pairs.weight.size()) {
    throw std::invalid_argument("WeightedPairSet: mismatched lengths");
  }
  for (double w : pairs.weight) {
    if (!std::isfinite(w) || w < 0.0) {
      throw std::invalid_argument("WeightedPairSet: weights must be finite and >= 0");
    }
  }
}

}  // namespace

RigidTransform weighted_rigid_solve(const WeightedPairSet& pairs) {
  validate(pairs);

  double weight_sum = 0.0;
  std::size_t effective = 0;
  for (double w : pairs.weight) {
    weight_sum += w;
    if (w > 0.0) ++effective;
  }
  if (weight_sum <= 0.0) {
    throw NoInliersError("weighted_rigid_solve: all weights are zero");
  }
  if (effective < 3) {
    throw DegenerateGeometryError(
        "weighted_rigid_solve: fewer than 3 pairs with positive weight");
  }

  Eigen::Vector3d centroid_src = Eigen::Vector3d::Zero();
  Eigen::Vector3d centroid_tgt = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    centroid_src += pairs.weight[i] * pairs.source[i];
    centroid_tgt += pairs.weight[i] * pairs.target[i];
  }
  centroid_src /= weight_sum;
  centroid_tgt /= weight_sum;

  Eigen::Matrix3d cross = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    cross += pairs.weight[i] * (pairs.source[i] - centroid_src) *
             (pairs.target[i] - centroid_tgt).transpose();
  }

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d& sigma = svd.singularValues();
  // Rank < 2 leaves a rotation axis undetermined (collinear or coincident
  // support).
  if (sigma(1) <= 1e-12 * sigma(0) || sigma(0) == 0.0) {
    throw DegenerateGeometryError("weighted_rigid_solve: degenerate pair geometry");
  }

  const Eigen::Matrix3d& u = svd.matrixU();
  const Eigen::Matrix3d& v = svd.matrixV();
  Eigen::Vector3d reflection_guard(1.0, 1.0, (v * u.transpose()).determinant());

  RigidTransform out;
  out.rotation = v * reflection_guard.asDiagonal() * u.transpose();
  out.translation = centroid_tgt - out.rotation * centroid_src;
  return out;
}

double weighted_sse(const WeightedPairSet& pairs, const RigidTransform& transform) {
  validate(pairs);
  double sum = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    sum += pairs.weight[i] * (transform(pairs.source[i]) - pairs.target[i]).squaredNorm();
  }
  return sum;
}

}  // namespace hsaicp
