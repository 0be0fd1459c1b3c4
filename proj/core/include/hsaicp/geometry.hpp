// Core geometric types: point clouds, rigid transforms, and the cloud
// resolution statistic used to scale tolerances and error metrics.
#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace hsaicp {

using Point3 = Eigen::Vector3d;

/// An ordered, immutable sequence of finite 3-D points. Indices into the
/// cloud are stable and shared with every structure derived from it
/// (correspondences, inlier masks, ...).
class PointCloud {
 public:
  PointCloud() = default;
  /// Throws std::invalid_argument if any coordinate is NaN or infinite.
  explicit PointCloud(std::vector<Point3> points);

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const Point3& operator[](std::size_t i) const { return points_[i]; }
  const std::vector<Point3>& points() const { return points_; }

  auto begin() const { return points_.begin(); }
  auto end() const { return points_.end(); }

 private:
  std::vector<Point3> points_;
};

/// Proper rigid motion p -> rotation * p + translation.
/// A valid transform satisfies R^T R = I and det R = 1 to 1e-9.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidTransform identity() { return {}; }

  Point3 operator()(const Point3& p) const { return rotation * p + translation; }

  /// Max deviation of R^T R from the identity, entrywise.
  double orthonormality_error() const;
  bool is_valid(double tol = 1e-9) const;
};

/// Applies T to every point, preserving order. Rejects invalid transforms.
PointCloud apply_transform(const PointCloud& cloud, const RigidTransform& transform);

/// (R, t)^-1 = (R^T, -R^T t).
RigidTransform invert_transform(const RigidTransform& transform);

/// Group composition: compose(a, b) maps p -> a(b(p)).
/// Note this is not the perturbation rule (R_a * R_b, t_a + t_b) used when
/// seeding benchmark initializations; see simulation.hpp for that one.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

/// Mean over all points of the distance to the nearest *other* point in the
/// same cloud. Duplicated points contribute zero. Requires >= 2 points.
double mean_resolution(const PointCloud& cloud);

}  // namespace hsaicp
