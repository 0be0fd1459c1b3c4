// Exact nearest-neighbor index over a fixed point cloud.
#pragma once

#include "hsaicp/geometry.hpp"

#include <cstdint>
#include <vector>

namespace hsaicp {

/// Balanced k-d tree built once per cloud. Queries are exact: the returned
/// index always minimizes the Euclidean distance, with ties broken toward
/// the lowest point index so results are reproducible and comparable
/// against a linear scan. Immutable after construction; concurrent queries
/// are safe. The indexed cloud must outlive the tree.
class KdTree {
 public:
  struct Result {
    std::size_t index;
    double distance;
  };

  explicit KdTree(const PointCloud& cloud);

  /// Nearest point to an arbitrary (finite) query location.
  Result nearest(const Point3& query) const;

  /// Nearest neighbor of cloud[self] excluding the point itself.
  /// Requires size() >= 2.
  Result nearest_other(std::size_t self) const;

  std::size_t size() const { return cloud_->size(); }
  const PointCloud& cloud() const { return *cloud_; }

 private:
  struct Node {
    std::uint32_t point;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint8_t axis = 0;
  };

  std::int32_t build(std::uint32_t* first, std::uint32_t* last);
  void search(std::int32_t node, const Point3& query, std::size_t exclude,
              std::size_t& best_index, double& best_sq) const;

  const PointCloud* cloud_;
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
};

/// Same statistic as mean_resolution(cloud), reusing an existing index.
double mean_resolution(const KdTree& index);

}  // namespace hsaicp
