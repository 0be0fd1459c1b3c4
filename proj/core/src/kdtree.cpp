#include "hsaicp/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace hsaicp {

namespace {
constexpr std::size_t kNoExclude = std::numeric_limits<std::size_t>::max();
}

KdTree::KdTree(const PointCloud& cloud) : cloud_(&cloud) {
  if (cloud.empty()) throw std::invalid_argument("KdTree: empty cloud");
  std::vector<std::uint32_t> order(cloud.size());
  std::iota(order.begin(), order.end(), 0u);
  nodes_.reserve(cloud.size());
  root_ = build(order.data(), order.data() + order.size());
}

// Median split on the widest-spread axis. Equal coordinates are ordered by
// point index so the tree layout is a pure function of the cloud.
std::int32_t KdTree::build(std::uint32_t* first, std::uint32_t* last) {
  if (first == last) return -1;
  const auto& pts = cloud_->points();

  Point3 lo = pts[*first];
  Point3 hi = pts[*first];
  for (std::uint32_t* it = first + 1; it != last; ++it) {
    lo = lo.cwiseMin(pts[*it]);
    hi = hi.cwiseMax(pts[*it]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);

  std::uint32_t* mid = first + (last - first) / 2;
  std::nth_element(first, mid, last, [&](std::uint32_t a, std::uint32_t b) {
    const double ca = pts[a][axis];
    const double cb = pts[b][axis];
    return ca < cb || (ca == cb && a < b);
  });

  Node node;
  node.point = *mid;
  node.axis = static_cast<std::uint8_t>(axis);
  const std::int32_t id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(node);
  const std::int32_t left = build(first, mid);
  const std::int32_t right = build(mid + 1, last);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KdTree::search(std::int32_t node, const Point3& query, std::size_t exclude,
                    std::size_t& best_index, double& best_sq) const {
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  const auto& pts = cloud_->points();

  if (n.point != exclude) {
    const double sq = (pts[n.point] - query).squaredNorm();
    if (sq < best_sq || (sq == best_sq && n.point < best_index)) {
      best_sq = sq;
      best_index = n.point;
    }
  }

  const double split = pts[n.point][n.axis];
  const double delta = query[n.axis] - split;
  const std::int32_t near = delta <= 0.0 ? n.left : n.right;
  const std::int32_t far = delta <= 0.0 ? n.right : n.left;

  if (near >= 0) search(near, query, exclude, best_index, best_sq);
  // The far side may still hold an equally distant lower-index point, so
  // the prune must keep ties.
  if (far >= 0 && delta * delta <= best_sq) {
    search(far, query, exclude, best_index, best_sq);
  }
}

KdTree::Result KdTree::nearest(const Point3& query) const {
  if (!query.allFinite()) {
    throw std::invalid_argument("KdTree::nearest: non-finite query");
  }
  std::size_t best_index = std::numeric_limits<std::size_t>::max();
  double best_sq = std::numeric_limits<double>::infinity();
  search(root_, query, kNoExclude, best_index, best_sq);
  return {best_index, std::sqrt(best_sq)};
}

KdTree::Result KdTree::nearest_other(std::size_t self) const {
  if (self >= cloud_->size()) {
    throw std::invalid_argument("KdTree::nearest_other: index out of range");
  }
  if (cloud_->size() < 2) {
    throw std::invalid_argument("KdTree::nearest_other: need at least 2 points");
  }
  std::size_t best_index = std::numeric_limits<std::size_t>::max();
  double best_sq = std::numeric_limits<double>::infinity();
  search(root_, (*cloud_)[self], self, best_index, best_sq);
  return {best_index, std::sqrt(best_sq)};
}

double mean_resolution(const KdTree& index) {
  const std::size_t n = index.size();
  if (n < 2) throw std::invalid_argument("mean_resolution: need at least 2 points");
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += index.nearest_other(i).distance;
  return sum / static_cast<double>(n);
}

}  // namespace hsaicp
