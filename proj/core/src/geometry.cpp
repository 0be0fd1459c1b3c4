#include "hsaicp/geometry.hpp"

#include "hsaicp/kdtree.hpp"

#include <Eigen/LU>

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace hsaicp {

PointCloud::PointCloud(std::vector<Point3> points) : points_(std::move(points)) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!points_[i].allFinite()) {
      throw std::invalid_argument("PointCloud: non-finite coordinate at point " +
                                  std::to_string(i));
    }
  }
}

double RigidTransform::orthonormality_error() const {
  const Eigen::Matrix3d gram = rotation.transpose() * rotation;
  return (gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
}

bool RigidTransform::is_valid(double tol) const {
  if (!rotation.allFinite() || !translation.allFinite()) return false;
  if (orthonormality_error() > tol) return false;
  return std::abs(rotation.determinant() - 1.0) <= tol;
}

namespace {

void require_valid(const RigidTransform& transform, const char* op) {
  if (!transform.is_valid()) {
    throw std::invalid_argument(std::string(op) +
                                ": rotation is not a proper rotation matrix");
  }
}

}  // namespace

PointCloud apply_transform(const PointCloud& cloud, const RigidTransform& transform) {
  if (cloud.empty()) throw std::invalid_argument("apply_transform: empty cloud");
  require_valid(transform, "apply_transform");
  std::vector<Point3> out;
  out.reserve(cloud.size());
  for (const Point3& p : cloud) out.push_back(transform(p));
  return PointCloud(std::move(out));
}

RigidTransform invert_transform(const RigidTransform& transform) {
  require_valid(transform, "invert_transform");
  RigidTransform inv;
  inv.rotation = transform.rotation.transpose();
  inv.translation = -(inv.rotation * transform.translation);
  return inv;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  require_valid(a, "compose");
  require_valid(b, "compose");
  RigidTransform out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

double mean_resolution(const PointCloud& cloud) {
  if (cloud.size() < 2) {
    throw std::invalid_argument("mean_resolution: need at least 2 points");
  }
  return mean_resolution(KdTree(cloud));
}

}  // namespace hsaicp
