#include "dro/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace dro {

KdTree3::KdTree3(std::vector<Vec3> points) : points_(std::move(points)) {
  std::vector<int> order(points_.size());
  std::iota(order.begin(), order.end(), 0);
  nodes_.reserve(points_.size());
  root_ = build(order, 0, static_cast<int>(order.size()), 0);
}

int KdTree3::build(std::vector<int>& order, int lo, int hi, int depth) {
  if (lo >= hi) return -1;
  const int axis = depth % 3;
  const int mid = lo + (hi - lo) / 2;
  std::nth_element(order.begin() + lo, order.begin() + mid,
                   order.begin() + hi, [&](int a, int b) {
                     if (points_[a][axis] != points_[b][axis]) {
                       return points_[a][axis] < points_[b][axis];
                     }
                     return a < b;
                   });
  const int node_id = static_cast<int>(nodes_.size());
  nodes_.push_back({order[mid], axis, -1, -1});
  const int left = build(order, lo, mid, depth + 1);
  const int right = build(order, mid + 1, hi, depth + 1);
  nodes_[node_id].left = left;
  nodes_[node_id].right = right;
  return node_id;
}

void KdTree3::radius_visit(int node, const Vec3& center, double radius_sq,
                           std::vector<int>& out) const {
  if (node < 0) return;
  const Node& n = nodes_[node];
  const Vec3& p = points_[n.point];
  if ((p - center).squaredNorm() <= radius_sq) out.push_back(n.point);
  const double diff = center[n.axis] - p[n.axis];
  if (diff * diff <= radius_sq) {
    radius_visit(n.left, center, radius_sq, out);
    radius_visit(n.right, center, radius_sq, out);
  } else if (diff < 0.0) {
    radius_visit(n.left, center, radius_sq, out);
  } else {
    radius_visit(n.right, center, radius_sq, out);
  }
}

std::vector<int> KdTree3::radius_search(const Vec3& center,
                                        double radius) const {
  std::vector<int> out;
  if (radius < 0.0) return out;
  radius_visit(root_, center, radius * radius, out);
  std::sort(out.begin(), out.end());
  return out;
}

void KdTree3::nearest_visit(int node, const Vec3& query, int& best,
                            double& best_sq) const {
  if (node < 0) return;
  const Node& n = nodes_[node];
  const Vec3& p = points_[n.point];
  const double d_sq = (p - query).squaredNorm();
  if (d_sq < best_sq || (d_sq == best_sq && n.point < best)) {
    best = n.point;
    best_sq = d_sq;
  }
  const double diff = query[n.axis] - p[n.axis];
  const int near = diff < 0.0 ? n.left : n.right;
  const int far = diff < 0.0 ? n.right : n.left;
  nearest_visit(near, query, best, best_sq);
  if (diff * diff <= best_sq) {
    nearest_visit(far, query, best, best_sq);
  }
}

int KdTree3::nearest(const Vec3& query, double* dist_sq) const {
  int best = -1;
  double best_sq = std::numeric_limits<double>::infinity();
  nearest_visit(root_, query, best, best_sq);
  if (dist_sq) *dist_sq = best_sq;
  return best;
}

}  // namespace dro
