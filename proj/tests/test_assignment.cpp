#include "hsaicp/assignment.hpp"

#include "doctest.h"
#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

using namespace hsaicp;

TEST_CASE("forward correspondences on identical clouds are the identity map") {
  const PointCloud cloud = testutil::random_cloud(100, 41);
  const KdTree index(cloud);
  const Matches m = forward_correspondences(index, cloud);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    CHECK(m.target[i] == i);
    CHECK(m.distance[i] == 0.0);
  }
}

TEST_CASE("a sub-cell lattice shift gives every point the same distance") {
  std::vector<Point3> points;
  for (int x = 0; x < 5; ++x) {
    for (int y = 0; y < 5; ++y) {
      for (int z = 0; z < 5; ++z) points.emplace_back(x, y, z);
    }
  }
  const PointCloud model(points);
  for (Point3& p : points) p += Point3(0.4, 0, 0);
  const PointCloud shifted(points);

  const KdTree index(model);
  const Matches m = forward_correspondences(index, shifted);
  for (double dist : m.distance) CHECK(dist == doctest::Approx(0.4));
}

TEST_CASE("forward correspondences match the double-loop oracle") {
  const PointCloud model = testutil::random_cloud(300, 43);
  const PointCloud data = testutil::random_cloud(200, 47);
  const KdTree index(model);
  const Matches m = forward_correspondences(index, data);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto [want_index, want_dist] = testutil::nearest_linear(model, data[i]);
    CHECK(m.target[i] == want_index);
    CHECK(m.distance[i] == doctest::Approx(want_dist).epsilon(1e-12));
  }
}

TEST_CASE("equal residuals force full overlap") {
  const std::vector<double> dists(37, 0.7);
  const HardAssignment hard = hard_assignment(dists, 2.0, 0.25);
  CHECK(hard.xi == 1.0);
  CHECK(hard.inlier_count == 37);
  CHECK(std::count(hard.inlier_mask.begin(), hard.inlier_mask.end(), 1) == 37);
}

TEST_CASE("worked trimming example: squared residuals 1,1,1,100") {
  const std::vector<double> dists = {1.0, 1.0, 1.0, 10.0};
  const HardAssignment hard = hard_assignment(dists, 2.0, 0.25);
  CHECK(hard.inlier_count == 3);
  CHECK(hard.xi == doctest::Approx(0.75));
  // prefix statistics are 64, 8, 64/27, 25.75; the third wins
  CHECK(hard.psi == doctest::Approx(64.0 / 27.0).epsilon(1e-12));
  CHECK(hard.inlier_mask == std::vector<std::uint8_t>{1, 1, 1, 0});
}

TEST_CASE("hard assignment equals the exhaustive prefix search") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    Rng rng(seed);
    const std::size_t n = 1 + rng.bounded(2000);
    std::vector<double> dists(n);
    for (double& d : dists) d = rng.uniform(0.0, 10.0);
    // sprinkle exact duplicates so the tie paths run
    for (std::size_t k = 0; k + 1 < n; k += 7) dists[k + 1] = dists[k];

    const HardAssignment hard = hard_assignment(dists, 2.0, 0.25);
    const auto want = testutil::exhaustive_prefix_search(dists, 2.0, 0.25);
    CHECK(hard.inlier_count == want.h);
    CHECK(hard.psi == want.psi);
  }
}

TEST_CASE("inlier distances never exceed outlier distances") {
  Rng rng(71);
  std::vector<double> dists(500);
  for (double& d : dists) d = rng.uniform(0.0, 5.0);
  const HardAssignment hard = hard_assignment(dists, 2.0, 0.25);
  double max_in = 0.0;
  double min_out = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < dists.size(); ++i) {
    if (hard.inlier_mask[i]) {
      max_in = std::max(max_in, dists[i]);
    } else {
      min_out = std::min(min_out, dists[i]);
    }
  }
  CHECK(max_in <= min_out);
}

TEST_CASE("all-zero residuals select full overlap") {
  const std::vector<double> dists(12, 0.0);
  const HardAssignment hard = hard_assignment(dists, 2.0, 0.25);
  CHECK(hard.xi == 1.0);
  CHECK(hard.psi == 0.0);
}

TEST_CASE("hard assignment input validation") {
  const std::vector<double> ok = {1.0, 2.0};
  CHECK_THROWS_AS(hard_assignment(std::vector<double>{}, 2.0, 0.25),
                  std::invalid_argument);
  CHECK_THROWS_AS(hard_assignment(ok, 0.0, 0.25), std::invalid_argument);
  CHECK_THROWS_AS(hard_assignment(ok, 2.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(hard_assignment(ok, 2.0, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(hard_assignment(std::vector<double>{-1.0}, 2.0, 0.25),
                  std::invalid_argument);
}

TEST_CASE("backward correspondences with identity transform are self matches") {
  const PointCloud cloud = testutil::random_cloud(50, 73);
  const KdTree index(cloud);
  const Matches m =
      backward_correspondences(index, cloud, RigidTransform::identity());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    CHECK(m.target[i] == i);
    CHECK(m.distance[i] == 0.0);
  }
}

TEST_CASE("single-point data shape always answers l = 0") {
  const PointCloud data({Point3(0.5, 0.5, 0.5)});
  const KdTree index(data);
  const PointCloud queries = testutil::random_cloud(10, 79);
  const Matches m = backward_correspondences(index, queries, testutil::random_rigid(3));
  for (std::size_t k = 0; k < queries.size(); ++k) CHECK(m.target[k] == 0);
}

TEST_CASE("inverse-transform backward search equals the transformed-space search") {
  // The rewritten backward query must reproduce the straightforward
  // definition: nearest transformed data point, distance measured in
  // transformed space.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const PointCloud data = testutil::random_cloud(120, 100 + seed);
    const PointCloud queries = testutil::random_cloud(60, 200 + seed, 1.5);
    const RigidTransform transform = testutil::random_rigid(300 + seed, 90.0, 2.0);

    const KdTree data_index(data);
    const Matches fast = backward_correspondences(data_index, queries, transform);

    const PointCloud moved = apply_transform(data, transform);
    for (std::size_t k = 0; k < queries.size(); ++k) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < moved.size(); ++j) {
        best = std::min(best, (queries[k] - moved[j]).norm());
      }
      CHECK(std::abs(fast.distance[k] - best) <= 1e-9 * std::max(1.0, best));
    }
  }
}

TEST_CASE("distance ratio handles agreement and coincidence") {
  CHECK(distance_ratio(0.5, 0.5, 1e-6) == 1.0);
  CHECK(distance_ratio(0.0, 0.0, 1e-6) == 1.0);
  CHECK(distance_ratio(2e-3, 1e-3, 1e-9) ==
        doctest::Approx((2e-3 + 1e-9) / (1e-3 + 1e-9)).epsilon(1e-15));
}

TEST_CASE("distance ratio input validation") {
  CHECK_THROWS_AS(distance_ratio(-1.0, 0.0, 1e-6), std::invalid_argument);
  CHECK_THROWS_AS(distance_ratio(1.0, -1.0, 1e-6), std::invalid_argument);
  CHECK_THROWS_AS(distance_ratio(1.0, 2.0, 1e-6), std::invalid_argument);
  CHECK_THROWS_AS(distance_ratio(1.0, 0.5, 0.0), std::invalid_argument);
}

TEST_CASE("soft assignment weight") {
  CHECK(soft_assignment(1.0, 2.0) == 1.0);
  CHECK(soft_assignment(1.0, 0.0) == 1.0);
  CHECK(soft_assignment(17.0, 0.0) == 1.0);
  CHECK(soft_assignment(1.5, 2.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK_THROWS_AS(soft_assignment(0.99, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(soft_assignment(1.5, -1.0), std::invalid_argument);

  // stays strictly positive even where exp would underflow
  CHECK(soft_assignment(1e6, 100.0) > 0.0);

  double prev = 2.0;
  for (double rho : {1.0, 1.1, 1.5, 2.0, 5.0, 50.0}) {
    const double p = soft_assignment(rho, 2.0);
    CHECK(p <= prev);
    CHECK(p > 0.0);
    CHECK(p <= 1.0);
    prev = p;
  }
}
