#pragma once

#include "dro/ego_velocity.hpp"
#include "dro/features.hpp"
#include "dro/matching.hpp"

#include <optional>
#include <string>

namespace dro {

struct FrameDiagnostics {
  double timestamp = 0.0;
  int n_points = 0;
  int n_static = 0;
  double speed = 0.0;
  int n_features = 0;
  int n_correspondences = 0;
  double cost = 0.0;
  bool velocity_unavailable = false;
  bool dynamic_removal_skipped = false;
  bool deskew_noop = true;
  bool registration_infeasible = false;
  bool used_prior_pose = false;
  bool diverged = false;
  bool frame_skipped = false;

  std::string flags() const;  // semicolon-joined tokens, "ok" when clean
  static const char* csv_header();
  std::string csv_line() const;
};

struct OdometryState {
  std::vector<Keyframe> window;  // at most OdomConfig::window_size entries
  Pose last_pose;
  std::optional<EgoVelocityEstimate> last_velocity;
  double last_timestamp = 0.0;
  bool started = false;  // world frame anchors at the first processed scan
  Trajectory trajectory;
  int next_keyframe_id = 0;
};

/// Motion prior: rotation extrapolated at constant angular velocity from the
/// last two poses; translation dt * ego velocity in the body frame, or the
/// full constant-velocity model when the ego estimate is unavailable.
Pose predict_pose(const OdometryState& state,
                  const std::optional<EgoVelocityEstimate>& ego_vel,
                  double dt);

/// Moves every point to where it would have been measured at the scan
/// timestamp, assuming constant body twist [v; omega] over the acquisition.
/// A scan without per-point offsets passes through (applied = false).
RadarScan deskew(const RadarScan& scan, const EgoVelocityEstimate& ego_vel,
                 const Vec3& angular_rate, bool* applied = nullptr);

/// Adds a keyframe when the pose moved beyond the translation or rotation
/// threshold from the previous keyframe (or the window is empty); evicts the
/// oldest beyond window_size. Returns whether a keyframe was added.
bool maybe_add_keyframe(OdometryState& state, const Pose& pose,
                        const FeatureSet& features, const OdomConfig& config);

/// One full odometry step. Returns the world pose of the scan, or nullopt when
/// the frame was skipped after all fallbacks. Throws on non-monotonic input.
std::optional<Pose> process_scan(OdometryState& state, const RadarScan& scan,
                                 const OdomConfig& config,
                                 FrameDiagnostics* diag = nullptr);

}  // namespace dro
