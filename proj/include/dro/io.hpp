#pragma once

#include "dro/geometry.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace dro {

struct IoError : Error {
  using Error::Error;
};

/// Configuration / usage errors (bad config key, bad flag); CLI maps these to
/// exit code 2, everything else to 1.
struct ConfigError : Error {
  using Error::Error;
};

struct RadarPoint {
  Vec3 position = Vec3::Zero();  // meters, radar body frame: x forward, y left, z up
  double doppler = 0.0;          // m/s, sign convention per OdomConfig::doppler_sign
  double intensity = 0.0;        // dimensionless, >= 0
  double time_offset = 0.0;      // seconds relative to the scan timestamp
};

struct RadarScan {
  double timestamp = 0.0;  // seconds, sequence clock
  std::vector<RadarPoint> points;
};

enum class FitMode { kGeneral, kFixedAxis };

struct OdomConfig {
  double voxel_size = 1.0;             // m
  double dbscan_eps = 0.25;            // m/s, in Doppler (V_x, V_y) space
  int dbscan_min_pts = 5;
  double w_thre = 0.0;                 // absolute intensity threshold for peak promotion
  bool w_thre_auto = true;             // resolve w_thre from the sequence head instead
  double z_thre = 0.8;                 // |n.n'| gate for correspondences
  double huber_delta = 0.5;            // m^2, loss scale applied to squared residuals
  double keyframe_trans_thresh = 1.0;  // m
  double keyframe_rot_thresh_deg = 5.0;
  int window_size = 4;
  double assoc_radius = 2.0;           // m
  int doppler_sign = +1;               // +1: positive Doppler = target receding
  int max_gn_iters = 10;
  int max_outer_iters = 8;
  int min_neighbors = 5;
  double gaussian_k_sigma = 3.0;
  FitMode fit_mode = FitMode::kGeneral;
  bool enable_ego_velocity = true;
  bool enable_dynamic_removal = true;

  void validate() const;  // throws ConfigError
};

struct ScanReadStats {
  int rows_dropped = 0;
};

/// Scan CSV contract: header `timestamp_s,x_m,y_m,z_m,doppler_mps,intensity,time_offset_s`,
/// one file per scan, comma separated, '.' decimal, no quoting. Rows with
/// non-finite fields, zero range, or negative intensity are dropped and counted.
RadarScan read_scan_file(const std::filesystem::path& path,
                         ScanReadStats* stats = nullptr);
void write_scan_file(const RadarScan& scan, const std::filesystem::path& path);

/// Ordered stream over `<dir>/scans/<index:06>_<timestamp_ns>.csv`. Index gaps
/// and non-monotonic timestamps are errors.
class SequenceReader {
 public:
  explicit SequenceReader(const std::filesystem::path& dir);

  std::size_t size() const { return files_.size(); }
  bool done() const { return pos_ >= files_.size(); }
  RadarScan next();
  const std::vector<std::filesystem::path>& files() const { return files_; }

 private:
  std::vector<std::filesystem::path> files_;
  std::size_t pos_ = 0;
  double last_timestamp_ = 0.0;
  bool have_last_ = false;
};

/// TUM trajectory format: `timestamp tx ty tz qx qy qz qw`, whitespace
/// separated; `#` comment lines allowed. Quaternions are normalized on read;
/// norm deviating from 1 by more than 1e-3 is an error.
Trajectory read_trajectory_tum(const std::filesystem::path& path);
void write_trajectory_tum(const Trajectory& traj,
                          const std::filesystem::path& path);

/// `key = value` config dialect with `#` comments. Unknown keys are an error.
OdomConfig read_config(const std::filesystem::path& path);
OdomConfig parse_config_text(const std::string& text,
                             const std::string& origin = "<string>");

/// 9 significant digits, shortest form ("%.9g").
std::string format_double(double value);

}  // namespace dro
