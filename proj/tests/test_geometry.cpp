#include "hsaicp/geometry.hpp"

#include "doctest.h"
#include "support.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <limits>
#include <stdexcept>

using namespace hsaicp;

namespace {

RigidTransform rot_z(double radians, const Point3& t = Point3::Zero()) {
  RigidTransform out;
  out.rotation = Eigen::AngleAxisd(radians, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  out.translation = t;
  return out;
}

}  // namespace

TEST_CASE("PointCloud rejects non-finite coordinates") {
  CHECK_THROWS_AS(PointCloud({Point3(0, 0, std::nan(""))}), std::invalid_argument);
  CHECK_THROWS_AS(PointCloud({Point3(0, 0, 0),
                              Point3(std::numeric_limits<double>::infinity(), 0, 0)}),
                  std::invalid_argument);
}

TEST_CASE("apply_transform with identity returns the same cloud") {
  const PointCloud cloud = testutil::random_cloud(50, 1);
  const PointCloud moved = apply_transform(cloud, RigidTransform::identity());
  REQUIRE(moved.size() == cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    CHECK(moved[i] == cloud[i]);
  }
}

TEST_CASE("apply_transform rotates a point a quarter turn about z") {
  const PointCloud cloud({Point3(1, 0, 0)});
  const PointCloud moved = apply_transform(cloud, rot_z(M_PI / 2));
  CHECK(moved[0].x() == doctest::Approx(0).epsilon(1e-15));
  CHECK(moved[0].y() == doctest::Approx(1));
  CHECK(moved[0].z() == 0.0);
}

TEST_CASE("apply_transform rejects a non-orthonormal rotation") {
  RigidTransform bad;
  bad.rotation(0, 0) = 2.0;
  CHECK_THROWS_AS(apply_transform(testutil::random_cloud(3, 2), bad),
                  std::invalid_argument);
  CHECK_THROWS_AS(apply_transform(PointCloud(), RigidTransform::identity()),
                  std::invalid_argument);
}

TEST_CASE("transform round trip recovers the cloud") {
  const PointCloud cloud = testutil::random_cloud(80, 3, 5.0);
  const RigidTransform transform = testutil::random_rigid(99, 170.0, 4.0);
  const PointCloud back =
      apply_transform(apply_transform(cloud, transform), invert_transform(transform));
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    CHECK((back[i] - cloud[i]).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("invert_transform matches the hand-computed inverse") {
  CHECK(invert_transform(RigidTransform::identity()).rotation ==
        Eigen::Matrix3d::Identity());

  const RigidTransform transform = rot_z(M_PI / 2, Point3(1, 0, 0));
  const RigidTransform inverse = invert_transform(transform);
  const RigidTransform expected = rot_z(-M_PI / 2);
  CHECK(testutil::max_abs_diff(inverse.rotation, expected.rotation) <= 1e-15);
  CHECK((inverse.translation - Point3(0, 1, 0)).norm() <= 1e-15);

  const RigidTransform round = compose(transform, inverse);
  CHECK(testutil::max_abs_diff(round.rotation, Eigen::Matrix3d::Identity()) <= 1e-12);
  CHECK(round.translation.norm() <= 1e-12);
}

TEST_CASE("compose has the identity element and adds rotation angles") {
  const RigidTransform transform = testutil::random_rigid(7);
  const RigidTransform left = compose(RigidTransform::identity(), transform);
  CHECK(left.rotation == transform.rotation);
  CHECK(left.translation == transform.translation);

  const RigidTransform quarter = compose(rot_z(M_PI / 4), rot_z(M_PI / 4));
  CHECK(testutil::max_abs_diff(quarter.rotation, rot_z(M_PI / 2).rotation) <= 1e-15);
}

TEST_CASE("compose is associative") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const RigidTransform a = testutil::random_rigid(3 * seed);
    const RigidTransform b = testutil::random_rigid(3 * seed + 1);
    const RigidTransform c = testutil::random_rigid(3 * seed + 2);
    const RigidTransform lhs = compose(compose(a, b), c);
    const RigidTransform rhs = compose(a, compose(b, c));
    CHECK(testutil::max_abs_diff(lhs.rotation, rhs.rotation) <= 1e-12);
    CHECK((lhs.translation - rhs.translation).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("rigid motions preserve pairwise distances") {
  const PointCloud cloud = testutil::random_cloud(40, 11, 3.0);
  const RigidTransform transform = testutil::random_rigid(13, 180.0, 10.0);
  const PointCloud moved = apply_transform(cloud, transform);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (std::size_t j = i + 1; j < cloud.size(); ++j) {
      const double before = (cloud[i] - cloud[j]).norm();
      const double after = (moved[i] - moved[j]).norm();
      CHECK(std::abs(after - before) <= 1e-9 * std::max(1.0, before));
    }
  }
}

TEST_CASE("every produced transform satisfies the rotation invariants") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const RigidTransform a = testutil::random_rigid(seed);
    const RigidTransform b = testutil::random_rigid(seed + 1000);
    for (const RigidTransform& t : {a, invert_transform(a), compose(a, b)}) {
      CHECK(t.orthonormality_error() <= 1e-9);
      CHECK(std::abs(t.rotation.determinant() - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("mean_resolution on small hand-checked clouds") {
  CHECK(mean_resolution(PointCloud({Point3(0, 0, 0), Point3(1, 0, 0), Point3(2, 0, 0)})) ==
        doctest::Approx(1.0));
  CHECK(mean_resolution(PointCloud({Point3(0, 0, 0), Point3(3, 0, 0)})) ==
        doctest::Approx(3.0));
  CHECK_THROWS_AS(mean_resolution(PointCloud({Point3(0, 0, 0)})), std::invalid_argument);
}

TEST_CASE("mean_resolution equals the all-pairs oracle") {
  const PointCloud cloud = testutil::random_cloud(100, 17);
  double expected = 0.0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < cloud.size(); ++j) {
      if (j == i) continue;
      best = std::min(best, (cloud[i] - cloud[j]).norm());
    }
    expected += best;
  }
  expected /= static_cast<double>(cloud.size());
  CHECK(mean_resolution(cloud) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("duplicate points contribute zero to mean_resolution") {
  const PointCloud cloud({Point3(0, 0, 0), Point3(0, 0, 0), Point3(4, 0, 0)});
  // duplicates: 0 and 0; the lone point: 4
  CHECK(mean_resolution(cloud) == doctest::Approx(4.0 / 3.0));
}
