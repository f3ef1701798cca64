#pragma once

#include "dro/geometry.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace dro {

struct PosePair {
  Pose est;
  Pose gt;
};

/// Pairs each estimated pose with the nearest-in-time ground-truth pose within
/// max_dt; unpaired poses are dropped (count reported via `dropped`).
std::vector<PosePair> associate_by_time(const Trajectory& est,
                                        const Trajectory& gt,
                                        double max_dt = 0.05,
                                        int* dropped = nullptr);

/// Closed-form least-squares rigid alignment (SVD, no scale) mapping the
/// estimated positions onto ground truth; det(R) is forced to +1. Throws on
/// fewer than 3 pairs or a collinear configuration.
Pose align_rigid(const std::vector<Vec3>& est_positions,
                 const std::vector<Vec3>& gt_positions);

/// RMSE of ||gt - (R est + t)|| under the given alignment.
double ate_rmse(const std::vector<PosePair>& pairs, const Pose& alignment);

struct RpeResult {
  double trans_rmse = 0.0;     // m per frame-pair
  double rot_rmse = 0.0;       // rad per frame-pair
  double trans_per_meter = 0.0;  // RMSE of per-span error / gt span length
  double rot_per_meter = 0.0;
  int n = 0;
};

/// Relative pose error over a fixed frame delta:
///   E_i = (G_i^-1 G_{i+d})^-1 (E_i^-1 E_{i+d}).
/// Both per-frame-pair and per-meter normalizations are reported (spans
/// shorter than 1 cm are skipped in the per-meter figures).
RpeResult rpe(const std::vector<PosePair>& pairs, int delta = 1);

/// KITTI-style relative translational error: for every start pose and every
/// requested length L, the relative-pose error over the first span whose
/// accumulated ground-truth path length reaches L, divided by L; averaged over
/// starts. Lengths without any complete span are omitted.
std::map<double, double> relative_error_by_length(
    const std::vector<PosePair>& pairs, const std::vector<double>& lengths);

/// Same spans as above, bucketed by the mean ground-truth speed over the span
/// (bucket centers at multiples of bucket_width).
std::map<double, double> relative_error_by_speed(
    const std::vector<PosePair>& pairs, const std::vector<double>& lengths,
    double bucket_width = 2.0);

struct MetricReport {
  double ate = 0.0;  // m, after rigid alignment
  RpeResult rpe;
  std::map<double, double> rel_error_by_length;  // path length (m) -> fraction
  std::map<double, double> rel_error_by_speed;   // speed bucket (m/s) -> fraction
  int n_pairs = 0;
  int n_dropped = 0;
};

MetricReport evaluate_trajectories(const Trajectory& est, const Trajectory& gt,
                                   double max_dt, int rpe_delta,
                                   const std::vector<double>& lengths);

std::string report_to_text(const MetricReport& report);
void write_report_csv(const MetricReport& report,
                      const std::filesystem::path& path);

}  // namespace dro
