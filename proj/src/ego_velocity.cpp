#include "dro/ego_velocity.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <random>
#include <unordered_map>

namespace dro {

namespace {

constexpr double kMinPlanarRange = 0.1;     // m
constexpr double kStationaryEps = 1e-6;     // m/s
constexpr double kMaxConditionNumber = 1e8;
constexpr int kMinStaticSamples = 10;

// Normal equations of the origin-constrained circle fit.
struct CircleNormalEq {
  Mat2 m = Mat2::Zero();
  Vec2 rhs = Vec2::Zero();
};

CircleNormalEq accumulate_circle(const std::vector<Vec2>& samples) {
  CircleNormalEq eq;
  for (const auto& q : samples) {
    eq.m += q * q.transpose();
    eq.rhs += 0.5 * q.squaredNorm() * q;
  }
  return eq;
}

double condition_number_2x2(const Mat2& m) {
  const double a = m(0, 0), b = m(0, 1), c = m(1, 1);
  const double mean = 0.5 * (a + c);
  const double disc = std::sqrt(std::max(0.0, mean * mean - (a * c - b * b)));
  const double lo = mean - disc;
  const double hi = mean + disc;
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

// Geometric rms of a point set to its own best-fit circle through the origin;
// +inf when the fit is degenerate. Used only to break static-cluster ties.
double circle_fit_rms(const std::vector<Vec2>& points) {
  const auto eq = accumulate_circle(points);
  if (condition_number_2x2(eq.m) >= kMaxConditionNumber) {
    return std::numeric_limits<double>::infinity();
  }
  const Vec2 center = eq.m.ldlt().solve(eq.rhs);
  const double radius = center.norm();
  double sum_sq = 0.0;
  for (const auto& q : points) {
    const double d = (q - center).norm() - radius;
    sum_sq += d * d;
  }
  return std::sqrt(sum_sq / static_cast<double>(points.size()));
}

// 2D uniform grid with cell size eps; region queries return indices in
// ascending order so cluster expansion is order-independent of the index.
class EpsGrid {
 public:
  EpsGrid(const std::vector<Vec2>& points, double eps)
      : points_(points), eps_(eps) {
    cells_.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      cells_[key_of(points[i])].push_back(static_cast<int>(i));
    }
  }

  std::vector<int> region(int center) const {
    const Vec2& p = points_[center];
    const double eps_sq = eps_ * eps_;
    const long cx = cell_coord(p.x());
    const long cy = cell_coord(p.y());
    std::vector<int> out;
    for (long gx = cx - 1; gx <= cx + 1; ++gx) {
      for (long gy = cy - 1; gy <= cy + 1; ++gy) {
        const auto it = cells_.find(pack(gx, gy));
        if (it == cells_.end()) continue;
        for (int idx : it->second) {
          if ((points_[idx] - p).squaredNorm() <= eps_sq) out.push_back(idx);
        }
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  long cell_coord(double v) const {
    return static_cast<long>(std::floor(v / eps_));
  }
  std::uint64_t key_of(const Vec2& p) const {
    return pack(cell_coord(p.x()), cell_coord(p.y()));
  }
  static std::uint64_t pack(long x, long y) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32) |
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(y));
  }

  const std::vector<Vec2>& points_;
  double eps_;
  std::unordered_map<std::uint64_t, std::vector<int>> cells_;
};

EgoVelocityEstimate estimate_from_center(const std::vector<Vec2>& samples,
                                         const Vec2& center) {
  EgoVelocityEstimate est;
  est.v_xy = 2.0 * center;
  est.speed = est.v_xy.norm();
  est.n_static = static_cast<int>(samples.size());
  double sum_sq = 0.0;
  for (const auto& q : samples) {
    const double r = q.squaredNorm() - 2.0 * q.dot(center);
    sum_sq += r * r;
  }
  est.rms_residual = std::sqrt(sum_sq / static_cast<double>(samples.size())) /
                     std::max(est.speed, 1.0);
  return est;
}

Vec2 solve_linear_velocity(const std::vector<DopplerSample>& samples,
                           const std::vector<int>* subset) {
  Mat2 m = Mat2::Zero();
  Vec2 rhs = Vec2::Zero();
  auto add = [&](const DopplerSample& s) {
    m += s.direction * s.direction.transpose();
    rhs += s.radial_speed * s.direction;
  };
  if (subset) {
    for (int i : *subset) add(samples[i]);
  } else {
    for (const auto& s : samples) add(s);
  }
  if (condition_number_2x2(m) >= kMaxConditionNumber) {
    throw Error("degenerate geometry: ray directions do not constrain velocity");
  }
  return m.ldlt().solve(rhs);
}

}  // namespace

std::vector<DopplerSample> project_doppler(const RadarScan& scan,
                                           int doppler_sign) {
  std::vector<DopplerSample> samples;
  samples.reserve(scan.points.size());
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    const auto& pt = scan.points[i];
    const double planar = std::hypot(pt.position.x(), pt.position.y());
    if (planar < kMinPlanarRange) continue;
    DopplerSample s;
    s.direction = Vec2(pt.position.x(), pt.position.y()) / planar;
    s.radial_speed =
        -doppler_sign * pt.doppler * pt.position.norm() / planar;
    s.q = s.radial_speed * s.direction;
    s.source_index = static_cast<int>(i);
    samples.push_back(s);
  }
  if (samples.empty()) {
    throw Error("project_doppler: no points with usable planar range");
  }
  return samples;
}

std::vector<DopplerSample> gaussian_prefilter(
    const std::vector<DopplerSample>& samples, double k_sigma) {
  const std::size_t n = samples.size();
  if (n < 3) return samples;

  std::vector<double> magnitude(n);
  for (std::size_t i = 0; i < n; ++i) magnitude[i] = samples[i].q.norm();
  const double mean =
      std::accumulate(magnitude.begin(), magnitude.end(), 0.0) /
      static_cast<double>(n);
  double var = 0.0;
  for (double m : magnitude) var += (m - mean) * (m - mean);
  const double sigma = std::sqrt(var / static_cast<double>(n - 1));

  std::vector<DopplerSample> kept;
  kept.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(magnitude[i] - mean) <= k_sigma * sigma) {
      kept.push_back(samples[i]);
    }
  }

  const std::size_t floor_count = (n + 1) / 2;
  if (kept.size() < floor_count) {
    // Retention floor: the 50% closest to the mean, in original order.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return std::abs(magnitude[a] - mean) <
                              std::abs(magnitude[b] - mean);
                     });
    order.resize(floor_count);
    std::sort(order.begin(), order.end());
    kept.clear();
    for (std::size_t i : order) kept.push_back(samples[i]);
  }
  return kept;
}

ClusterLabels dbscan(const std::vector<Vec2>& points, double eps,
                     int min_pts) {
  if (eps <= 0.0) throw Error("dbscan: eps must be positive");
  if (min_pts < 1) throw Error("dbscan: min_pts must be >= 1");

  constexpr int kUndefined = -2;
  const int n = static_cast<int>(points.size());
  ClusterLabels out;
  out.labels.assign(n, kUndefined);
  if (n == 0) return out;

  const EpsGrid grid(points, eps);
  int next_cluster = 0;
  for (int i = 0; i < n; ++i) {
    if (out.labels[i] != kUndefined) continue;
    const auto seed = grid.region(i);
    if (static_cast<int>(seed.size()) < min_pts) {
      out.labels[i] = kNoiseLabel;
      continue;
    }
    const int cluster = next_cluster++;
    out.labels[i] = cluster;
    std::deque<int> frontier(seed.begin(), seed.end());
    while (!frontier.empty()) {
      const int j = frontier.front();
      frontier.pop_front();
      if (out.labels[j] == kNoiseLabel) out.labels[j] = cluster;  // border
      if (out.labels[j] != kUndefined) continue;
      out.labels[j] = cluster;
      const auto reach = grid.region(j);
      if (static_cast<int>(reach.size()) >= min_pts) {
        frontier.insert(frontier.end(), reach.begin(), reach.end());
      }
    }
  }

  // Static designation: largest cluster, ties by best circle-fit rms.
  std::vector<int> census(next_cluster, 0);
  for (int label : out.labels) {
    if (label >= 0) ++census[label];
  }
  auto rms_of = [&](int cluster) {
    std::vector<Vec2> members;
    for (int i = 0; i < n; ++i) {
      if (out.labels[i] == cluster) members.push_back(points[i]);
    }
    return circle_fit_rms(members);
  };
  int best = -1;
  double best_rms = 0.0;
  bool best_rms_known = false;
  for (int c = 0; c < next_cluster; ++c) {
    if (best < 0 || census[c] > census[best]) {
      best = c;
      best_rms_known = false;
    } else if (census[c] == census[best]) {
      if (!best_rms_known) {
        best_rms = rms_of(best);
        best_rms_known = true;
      }
      const double rms = rms_of(c);
      if (rms < best_rms) {
        best = c;
        best_rms = rms;
      }
    }
  }
  out.static_cluster = best;
  return out;
}

double fit_circle_fixed_axis(const std::vector<Vec2>& samples) {
  if (samples.size() < 2) {
    throw Error("fit_circle_fixed_axis: need at least 2 samples");
  }
  double numerator = 0.0;
  double vy_sq = 0.0;
  for (const auto& s : samples) {
    const double a = s.squaredNorm();
    numerator += a * s.y();
    vy_sq += s.y() * s.y();
  }
  if (vy_sq < 1e-12) {
    throw Error("fit_circle_fixed_axis: degenerate geometry (sum V_y^2 ~ 0)");
  }
  return numerator / (2.0 * vy_sq);
}

EgoVelocityEstimate fit_circle_general(const std::vector<Vec2>& samples) {
  if (samples.size() < 3) {
    throw Error("fit_circle_general: need at least 3 samples");
  }
  bool all_tiny = true;
  for (const auto& q : samples) {
    if (q.norm() >= kStationaryEps) {
      all_tiny = false;
      break;
    }
  }
  if (all_tiny) {
    return estimate_from_center(samples, Vec2::Zero());
  }
  const auto eq = accumulate_circle(samples);
  if (condition_number_2x2(eq.m) >= kMaxConditionNumber) {
    throw Error("fit_circle_general: degenerate geometry (samples collinear through origin)");
  }
  const Vec2 center = eq.m.ldlt().solve(eq.rhs);
  return estimate_from_center(samples, center);
}

EgoVelocityEstimate fit_velocity_least_squares(
    const std::vector<DopplerSample>& samples) {
  if (samples.size() < 2) {
    throw Error("fit_velocity_least_squares: need at least 2 samples");
  }
  const Vec2 v = solve_linear_velocity(samples, nullptr);
  EgoVelocityEstimate est;
  est.v_xy = v;
  est.speed = v.norm();
  est.n_static = static_cast<int>(samples.size());
  double sum_sq = 0.0;
  for (const auto& s : samples) {
    const double r = s.direction.dot(v) - s.radial_speed;
    sum_sq += r * r;
  }
  est.rms_residual = std::sqrt(sum_sq / static_cast<double>(samples.size()));
  return est;
}

EgoVelocityEstimate fit_velocity_ransac(
    const std::vector<DopplerSample>& samples, int iterations,
    double inlier_threshold, std::uint64_t seed) {
  const int n = static_cast<int>(samples.size());
  if (n < 2) throw Error("fit_velocity_ransac: need at least 2 samples");

  std::mt19937_64 rng(seed);
  auto pick = [&](int bound) {
    return static_cast<int>(rng() % static_cast<std::uint64_t>(bound));
  };

  std::vector<int> best_inliers;
  for (int it = 0; it < iterations; ++it) {
    const int a = pick(n);
    int b = pick(n);
    if (a == b) continue;
    Mat2 m;
    m.row(0) = samples[a].direction.transpose();
    m.row(1) = samples[b].direction.transpose();
    if (std::abs(m.determinant()) < 1e-9) continue;
    const Vec2 v =
        m.inverse() * Vec2(samples[a].radial_speed, samples[b].radial_speed);
    std::vector<int> inliers;
    for (int i = 0; i < n; ++i) {
      if (std::abs(samples[i].direction.dot(v) - samples[i].radial_speed) <=
          inlier_threshold) {
        inliers.push_back(i);
      }
    }
    if (inliers.size() > best_inliers.size()) best_inliers = std::move(inliers);
  }

  if (best_inliers.size() < 2) return fit_velocity_least_squares(samples);

  const Vec2 v = solve_linear_velocity(samples, &best_inliers);
  EgoVelocityEstimate est;
  est.v_xy = v;
  est.speed = v.norm();
  est.n_static = static_cast<int>(best_inliers.size());
  double sum_sq = 0.0;
  for (int i : best_inliers) {
    const double r = samples[i].direction.dot(v) - samples[i].radial_speed;
    sum_sq += r * r;
  }
  est.rms_residual =
      std::sqrt(sum_sq / static_cast<double>(best_inliers.size()));
  return est;
}

EgoVelocityResult estimate_ego_velocity(const RadarScan& scan,
                                        const OdomConfig& config) {
  EgoVelocityResult result;
  result.labels.labels.assign(scan.points.size(), kNoiseLabel);
  result.labels.static_cluster = -1;

  std::vector<DopplerSample> samples;
  try {
    samples = project_doppler(scan, config.doppler_sign);
  } catch (const Error&) {
    return result;  // velocity unavailable
  }
  const auto filtered = gaussian_prefilter(samples, config.gaussian_k_sigma);

  std::vector<Vec2> qs(filtered.size());
  for (std::size_t i = 0; i < filtered.size(); ++i) qs[i] = filtered[i].q;
  const auto clusters = dbscan(qs, config.dbscan_eps, config.dbscan_min_pts);

  for (std::size_t i = 0; i < filtered.size(); ++i) {
    result.labels.labels[filtered[i].source_index] = clusters.labels[i];
  }
  result.labels.static_cluster = clusters.static_cluster;
  if (clusters.static_cluster < 0) return result;

  std::vector<Vec2> static_q;
  for (std::size_t i = 0; i < filtered.size(); ++i) {
    if (clusters.labels[i] == clusters.static_cluster) {
      static_q.push_back(filtered[i].q);
    }
  }
  if (static_cast<int>(static_q.size()) < kMinStaticSamples) return result;

  try {
    if (config.fit_mode == FitMode::kGeneral) {
      result.estimate = fit_circle_general(static_q);
    } else {
      // Paper-frame fit assumes motion along body +x; the circle axis there
      // is the first body coordinate, so swap into (V_x, V_y) order.
      std::vector<Vec2> paper(static_q.size());
      for (std::size_t i = 0; i < static_q.size(); ++i) {
        paper[i] = Vec2(static_q[i].y(), static_q[i].x());
      }
      const double radius = fit_circle_fixed_axis(paper);
      result.estimate = estimate_from_center(static_q, Vec2(radius, 0.0));
    }
  } catch (const Error&) {
    return result;
  }
  return result;
}

RadarScan remove_dynamic(const RadarScan& scan, const ClusterLabels& labels) {
  if (labels.labels.size() != scan.points.size()) {
    throw Error("remove_dynamic: labels do not cover the scan");
  }
  RadarScan out;
  out.timestamp = scan.timestamp;
  if (labels.static_cluster >= 0) {
    for (std::size_t i = 0; i < scan.points.size(); ++i) {
      if (labels.labels[i] == labels.static_cluster) {
        out.points.push_back(scan.points[i]);
      }
    }
  }
  if (out.points.empty()) {
    throw Error("remove_dynamic: no static points remain");
  }
  return out;
}

}  // namespace dro
