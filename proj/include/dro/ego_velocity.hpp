#pragma once

#include "dro/geometry.hpp"
#include "dro/io.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace dro {

constexpr int kNoiseLabel = -1;

/// One radar return projected into planar Doppler-velocity space. For a
/// stationary world point seen from planar ego-velocity v, q lies on the
/// circle through the origin with diameter vector v.
struct DopplerSample {
  Vec2 q = Vec2::Zero();       // radial_speed * direction, m/s
  Vec2 direction = Vec2::Zero();  // planar unit ray toward the return
  double radial_speed = 0.0;   // elevation-corrected planar closing speed, m/s
  int source_index = -1;       // index into RadarScan::points
};

struct ClusterLabels {
  std::vector<int> labels;  // cluster id >= 0, or kNoiseLabel
  int static_cluster = -1;  // id of the cluster designated static; -1 if none
};

struct EgoVelocityEstimate {
  Vec2 v_xy = Vec2::Zero();   // m/s, radar body XY; v_z fixed at 0
  double speed = 0.0;         // ||v_xy||
  int n_static = 0;           // samples used by the fit
  double rms_residual = 0.0;  // normalized algebraic circle residual, m/s
};

/// Projects per-point Doppler into the body XY plane:
///   q = (-doppler_sign * d) * (||p|| / ||(x,y)||) * (x,y)/||(x,y)||
/// The ||p||/||(x,y)|| factor removes the elevation foreshortening of the
/// measured radial speed so the circle relation is exact for any static
/// point. Points with ||(x,y)|| < 0.1 m are excluded. Throws when nothing
/// survives.
std::vector<DopplerSample> project_doppler(const RadarScan& scan,
                                           int doppler_sign);

/// k-sigma gate on ||q|| around its sample mean; always retains at least 50%
/// of the samples (the ones closest to the mean). Inputs with fewer than 3
/// samples pass through unchanged.
std::vector<DopplerSample> gaussian_prefilter(
    const std::vector<DopplerSample>& samples, double k_sigma);

/// Standard DBSCAN over 2D points: a core point has >= min_pts neighbors
/// within eps (inclusive, counting itself); border points join the first
/// discovered adjacent cluster; leftovers are noise. static_cluster is the
/// largest cluster, ties broken by smaller rms distance to the cluster's own
/// best-fit circle through the origin. static_cluster == -1 when everything
/// is noise.
ClusterLabels dbscan(const std::vector<Vec2>& points, double eps, int min_pts);

/// Closed-form radius of the paper-frame circle (diameter along +V_y),
/// minimizing the squared algebraic residual:
///   r = sum(a_i V_y_i) / (2 sum(V_y_i^2)),  a_i = V_x_i^2 + V_y_i^2
/// Throws on degenerate geometry (sum V_y^2 ~ 0).
double fit_circle_fixed_axis(const std::vector<Vec2>& samples);

/// Origin-constrained algebraic circle fit with free center c:
///   (sum q q^T) c = 0.5 sum ||q||^2 q,   v_xy = 2c.
/// Returns v_xy = 0 without solving when every ||q|| < 1e-6. Throws on
/// ill-conditioned normal equations (samples collinear through the origin).
EgoVelocityEstimate fit_circle_general(const std::vector<Vec2>& samples);

/// Naive linear least squares on direction.v = radial_speed over all samples,
/// no clustering or robustness; the internal comparison baseline.
EgoVelocityEstimate fit_velocity_least_squares(
    const std::vector<DopplerSample>& samples);

/// 2-point RANSAC around the linear solve, followed by an inlier refit.
EgoVelocityEstimate fit_velocity_ransac(
    const std::vector<DopplerSample>& samples, int iterations,
    double inlier_threshold, std::uint64_t seed);

struct EgoVelocityResult {
  std::optional<EgoVelocityEstimate> estimate;  // empty: velocity unavailable
  ClusterLabels labels;  // one label per scan point (dropped points are noise)
};

/// Full filtering pipeline: project -> gaussian_prefilter -> dbscan -> circle
/// fit on the static cluster. Degenerate conditions never throw here; they
/// yield an empty estimate.
EgoVelocityResult estimate_ego_velocity(const RadarScan& scan,
                                        const OdomConfig& config);

/// Keeps only the points labeled with the static cluster. Throws when labels
/// do not cover the scan or nothing remains.
RadarScan remove_dynamic(const RadarScan& scan, const ClusterLabels& labels);

}  // namespace dro
