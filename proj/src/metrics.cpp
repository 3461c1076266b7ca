#include "sonarmvs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sonarmvs/errors.hpp"
#include "sonarmvs/parallel.hpp"

namespace sonarmvs {

namespace {

constexpr std::size_t kLeafSize = 12;

void require_non_empty(const PointCloud& a, const PointCloud& b) {
  if (a.empty() || b.empty()) throw DataError("chamfer distance needs two non-empty clouds");
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

PointCloud depth_map_to_point_cloud(const FrontDepthMap& d, const DepthMask& mask,
                                    const Pose& pose, CloudFrame frame) {
  if (mask.mask.rows() != d.rows() || mask.mask.cols() != d.cols()) {
    throw DataError("depth_map_to_point_cloud: mask and depth map differ in shape");
  }
  PointCloud cloud;
  cloud.frame = frame;
  for (std::size_t e = 0; e < d.rows(); ++e) {
    const double phi = d.elevation.at(static_cast<double>(e));
    for (std::size_t c = 0; c < d.cols(); ++c) {
      if (!mask.mask(e, c)) continue;
      const double theta = d.azimuth.at(static_cast<double>(c));
      cloud.points.push_back(pose.apply(spherical_to_euclidean({d.depth(e, c), theta, phi})));
    }
  }
  return cloud;
}

double mae(const FrontDepthMap& est, const FrontDepthMap& gt, double beta) {
  if (est.rows() != gt.rows() || est.cols() != gt.cols()) {
    throw DataError("mae: depth map shapes differ");
  }
  double sum = 0.0;
  const auto a = est.depth.values();
  const auto b = gt.depth.values();
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return beta * sum / static_cast<double>(a.size());
}

double chamfer_bruteforce(const PointCloud& s1, const PointCloud& s2, double gamma) {
  require_non_empty(s1, s2);
  auto directed = [](const PointCloud& from, const PointCloud& to) {
    std::vector<double> best(from.size());
    for (std::size_t i = 0; i < from.size(); ++i) {
      double b = std::numeric_limits<double>::infinity();
      for (const Vec3& y : to.points) b = std::min(b, (from.points[i] - y).squaredNorm());
      best[i] = b;
    }
    return mean_of(best);
  };
  return gamma * directed(s1, s2) + gamma * directed(s2, s1);
}

double chamfer_fast(const PointCloud& s1, const PointCloud& s2, double gamma, unsigned threads) {
  require_non_empty(s1, s2);
  auto directed = [threads](const PointCloud& from, const PointCloud& to) {
    const KdTree tree(to.points);
    std::vector<double> best(from.size());
    parallel_for(from.size(), threads,
                 [&](std::size_t i) { best[i] = tree.nearest_squared_distance(from.points[i]); });
    return mean_of(best);
  };
  return gamma * directed(s1, s2) + gamma * directed(s2, s1);
}

KdTree::KdTree(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    build(0, points_.size());
  }
}

std::size_t KdTree::build(std::size_t begin, std::size_t end) {
  const std::size_t id = nodes_.size();
  nodes_.push_back({});
  nodes_[id].begin = begin;
  nodes_[id].end = end;
  if (end - begin <= kLeafSize) return id;

  Vec3 lo = points_[begin];
  Vec3 hi = points_[begin];
  for (std::size_t i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[i]);
    hi = hi.cwiseMax(points_[i]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(points_.begin() + static_cast<std::ptrdiff_t>(begin),
                   points_.begin() + static_cast<std::ptrdiff_t>(mid),
                   points_.begin() + static_cast<std::ptrdiff_t>(end),
                   [axis](const Vec3& a, const Vec3& b) { return a[axis] < b[axis]; });
  const double split = points_[mid][axis];
  const std::size_t left = build(begin, mid);
  const std::size_t right = build(mid, end);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KdTree::search(std::size_t node_id, const Vec3& q, double& best) const {
  const Node& node = nodes_[node_id];
  if (node.axis < 0) {
    for (std::size_t i = node.begin; i < node.end; ++i) {
      best = std::min(best, (q - points_[i]).squaredNorm());
    }
    return;
  }
  // Left holds coordinates <= split, right holds coordinates >= split.
  const double delta = q[node.axis] - node.split;
  const std::size_t near = delta < 0.0 ? node.left : node.right;
  const std::size_t far = delta < 0.0 ? node.right : node.left;
  search(near, q, best);
  if (delta * delta <= best) search(far, q, best);
}

double KdTree::nearest_squared_distance(const Vec3& query) const {
  double best = std::numeric_limits<double>::infinity();
  if (!nodes_.empty()) search(0, query, best);
  return best;
}

}  // namespace sonarmvs
