#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sonarmvs/frontdepth.hpp"
#include "sonarmvs/geometry.hpp"
#include "sonarmvs/sonar_types.hpp"

namespace sonarmvs {

enum class CloudFrame { kSensor, kWorld };

struct PointCloud {
  std::vector<Vec3> points;
  CloudFrame frame = CloudFrame::kSensor;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

/// Back-projects every masked-in cell through (D, theta_c, phi_e) and `pose`.
PointCloud depth_map_to_point_cloud(const FrontDepthMap& d, const DepthMask& mask,
                                    const Pose& pose = Pose::identity(),
                                    CloudFrame frame = CloudFrame::kSensor);

inline constexpr double kMaeScale = 1000.0;     // beta
inline constexpr double kChamferScale = 500.0;  // gamma

/// beta / (E W) * sum |est - gt| over all cells.
double mae(const FrontDepthMap& est, const FrontDepthMap& gt, double beta = kMaeScale);

/// Exact O(|S1| |S2|) chamfer distance with squared Euclidean distances:
/// gamma / |S1| sum_x min_y |x-y|^2 + gamma / |S2| sum_y min_x |x-y|^2.
double chamfer_bruteforce(const PointCloud& s1, const PointCloud& s2,
                          double gamma = kChamferScale);

/// Same value as chamfer_bruteforce via exact kd-tree nearest neighbours.
double chamfer_fast(const PointCloud& s1, const PointCloud& s2, double gamma = kChamferScale,
                    unsigned threads = 0);

/// Static 3D kd-tree for exact nearest-neighbour queries.
class KdTree {
 public:
  explicit KdTree(std::span<const Vec3> points);

  /// Squared distance to the nearest stored point (infinity when empty).
  double nearest_squared_distance(const Vec3& query) const;
  std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    double split = 0.0;
    int axis = -1;  // -1 marks a leaf
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t left = 0;
    std::size_t right = 0;
  };

  std::size_t build(std::size_t begin, std::size_t end);
  void search(std::size_t node, const Vec3& q, double& best) const;

  std::vector<Vec3> points_;
  std::vector<Node> nodes_;
};

}  // namespace sonarmvs
