#pragma once

#include "dro/geometry.hpp"

#include <vector>

namespace dro {

/// Static 3D kd-tree over a point set. Radius queries are inclusive
/// (distance <= radius) and return indices in ascending order; nearest-point
/// ties resolve to the smaller index.
class KdTree3 {
 public:
  KdTree3() = default;
  explicit KdTree3(std::vector<Vec3> points);

  int size() const { return static_cast<int>(points_.size()); }
  const Vec3& point(int index) const { return points_[index]; }

  std::vector<int> radius_search(const Vec3& center, double radius) const;
  /// Index of the closest point, or -1 when empty. dist_sq (optional) receives
  /// the squared distance.
  int nearest(const Vec3& query, double* dist_sq = nullptr) const;

 private:
  struct Node {
    int point = -1;
    int axis = 0;
    int left = -1;
    int right = -1;
  };

  int build(std::vector<int>& order, int lo, int hi, int depth);
  void radius_visit(int node, const Vec3& center, double radius_sq,
                    std::vector<int>& out) const;
  void nearest_visit(int node, const Vec3& query, int& best,
                     double& best_sq) const;

  std::vector<Vec3> points_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace dro
