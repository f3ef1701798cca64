#include "dro/pipeline.hpp"

#include <cmath>
#include <sstream>

namespace dro {

namespace {

constexpr double kDegToRad = M_PI / 180.0;

// Body angular rate from the last two trajectory poses; zero on early frames.
Vec3 angular_rate_estimate(const OdometryState& state) {
  const auto& traj = state.trajectory;
  if (traj.size() < 2) return Vec3::Zero();
  const Pose& prev = traj[traj.size() - 2];
  const Pose& last = traj.back();
  const double dt_prev = last.time - prev.time;
  if (dt_prev <= 0.0) return Vec3::Zero();
  try {
    return so3_log(prev.rotation.transpose() * last.rotation) / dt_prev;
  } catch (const Error&) {
    return Vec3::Zero();
  }
}

}  // namespace

std::string FrameDiagnostics::flags() const {
  std::string out;
  auto add = [&](bool cond, const char* token) {
    if (!cond) return;
    if (!out.empty()) out += ';';
    out += token;
  };
  add(velocity_unavailable, "vel_unavailable");
  add(dynamic_removal_skipped, "no_dynamic_removal");
  add(deskew_noop, "deskew_noop");
  add(registration_infeasible, "reg_infeasible");
  add(used_prior_pose, "prior_pose");
  add(diverged, "diverged");
  add(frame_skipped, "skipped");
  if (out.empty()) out = "ok";
  return out;
}

const char* FrameDiagnostics::csv_header() {
  return "timestamp,n_points,n_static,speed,n_features,n_corr,cost,flags";
}

std::string FrameDiagnostics::csv_line() const {
  std::ostringstream out;
  out << format_double(timestamp) << ',' << n_points << ',' << n_static << ','
      << format_double(speed) << ',' << n_features << ','
      << n_correspondences << ',' << format_double(cost) << ',' << flags();
  return out.str();
}

Pose predict_pose(const OdometryState& state,
                  const std::optional<EgoVelocityEstimate>& ego_vel,
                  double dt) {
  if (!state.started || state.trajectory.empty()) {
    return Pose{};
  }
  const auto& traj = state.trajectory;
  const Pose& last = traj.back();

  Mat3 rotation_inc = Mat3::Identity();
  double dt_prev = 0.0;
  if (traj.size() >= 2) {
    const Pose& prev = traj[traj.size() - 2];
    dt_prev = last.time - prev.time;
    if (dt_prev > 0.0) {
      try {
        const Vec3 phi = so3_log(prev.rotation.transpose() * last.rotation);
        rotation_inc = so3_exp(phi * (dt / dt_prev));
      } catch (const Error&) {
        rotation_inc = Mat3::Identity();
      }
    }
  }

  if (ego_vel) {
    Pose increment;
    increment.rotation = rotation_inc;
    increment.translation =
        Vec3(dt * ego_vel->v_xy.x(), dt * ego_vel->v_xy.y(), 0.0);
    Pose prior = compose(last, increment);
    prior.time = last.time + dt;
    return prior;
  }

  if (traj.size() >= 2 && dt_prev > 0.0) {
    const Pose& prev = traj[traj.size() - 2];
    try {
      Twist xi = se3_log(compose(inverse(prev), last));
      xi.rho *= dt / dt_prev;
      xi.phi *= dt / dt_prev;
      Pose prior = compose(last, se3_exp(xi));
      prior.time = last.time + dt;
      return prior;
    } catch (const Error&) {
    }
  }
  Pose prior = last;
  prior.time = last.time + dt;
  return prior;
}

RadarScan deskew(const RadarScan& scan, const EgoVelocityEstimate& ego_vel,
                 const Vec3& angular_rate, bool* applied) {
  bool any_offset = false;
  for (const auto& p : scan.points) {
    if (p.time_offset != 0.0) {
      any_offset = true;
      break;
    }
  }
  if (applied) *applied = any_offset;
  if (!any_offset) return scan;

  const Vec3 velocity(ego_vel.v_xy.x(), ego_vel.v_xy.y(), 0.0);
  RadarScan out = scan;
  for (auto& p : out.points) {
    if (p.time_offset == 0.0) continue;
    const Twist xi{velocity * p.time_offset, angular_rate * p.time_offset};
    p.position = apply(se3_exp(xi), p.position);
    p.time_offset = 0.0;
  }
  return out;
}

bool maybe_add_keyframe(OdometryState& state, const Pose& pose,
                        const FeatureSet& features, const OdomConfig& config) {
  bool add = state.window.empty();
  if (!add) {
    const Keyframe& last = state.window.back();
    const double trans = (pose.translation - last.pose.translation).norm();
    const double rot =
        rotation_angle(last.pose.rotation.transpose() * pose.rotation);
    add = trans > config.keyframe_trans_thresh ||
          rot > config.keyframe_rot_thresh_deg * kDegToRad;
  }
  if (add) {
    state.window.push_back({pose, features, state.next_keyframe_id++});
    while (static_cast<int>(state.window.size()) > config.window_size) {
      state.window.erase(state.window.begin());
    }
  }
  return add;
}

std::optional<Pose> process_scan(OdometryState& state, const RadarScan& scan,
                                 const OdomConfig& config,
                                 FrameDiagnostics* diag_out) {
  FrameDiagnostics diag;
  diag.timestamp = scan.timestamp;
  diag.n_points = static_cast<int>(scan.points.size());
  struct DiagGuard {
    FrameDiagnostics& diag;
    FrameDiagnostics* out;
    ~DiagGuard() {
      if (out) *out = diag;
    }
  } guard{diag, diag_out};

  if (state.started && scan.timestamp <= state.last_timestamp) {
    throw Error("process_scan: non-monotonic scan timestamp");
  }
  if (scan.points.empty()) throw Error("process_scan: empty scan");

  std::optional<EgoVelocityEstimate> ego;
  ClusterLabels labels;
  if (config.enable_ego_velocity) {
    auto result = estimate_ego_velocity(scan, config);
    ego = result.estimate;
    labels = std::move(result.labels);
  }
  diag.velocity_unavailable = !ego.has_value();
  if (ego) {
    diag.speed = ego->speed;
    diag.n_static = ego->n_static;
  }

  // Fallback 1: no velocity -> keep all points.
  RadarScan working = scan;
  if (ego && config.enable_dynamic_removal) {
    try {
      working = remove_dynamic(scan, labels);
    } catch (const Error&) {
      diag.dynamic_removal_skipped = true;
    }
  } else {
    diag.dynamic_removal_skipped = true;
  }

  if (ego) {
    bool applied = false;
    working = deskew(working, *ego, angular_rate_estimate(state), &applied);
    diag.deskew_noop = !applied;
  }

  FeatureSet features;
  bool have_features = false;
  try {
    features = extract_features(working, config);
    have_features = true;
    diag.n_features = static_cast<int>(features.cells.size());
  } catch (const Error&) {
  }

  state.last_velocity = ego;

  if (!state.started) {
    if (!have_features) {
      // Cannot seed the map from this frame; the world frame waits for the
      // next usable scan.
      diag.frame_skipped = true;
      return std::nullopt;
    }
    Pose pose;  // identity: world frame = first processed scan
    pose.time = scan.timestamp;
    state.trajectory.push_back(pose);
    state.last_pose = pose;
    state.last_timestamp = scan.timestamp;
    state.started = true;
    maybe_add_keyframe(state, pose, features, config);
    return pose;
  }

  const double dt = scan.timestamp - state.trajectory.back().time;
  Pose prior = predict_pose(state, ego, dt);
  prior.time = scan.timestamp;

  if (!have_features) {
    // Fallback 3: nothing to register; skip the frame entirely.
    diag.frame_skipped = true;
    state.last_timestamp = scan.timestamp;
    return std::nullopt;
  }

  Pose pose = prior;
  bool registration_ok = false;
  if (!state.window.empty()) {
    const Submap submap = build_submap(state.window);
    const auto reg = register_scan(features, submap, prior, config);
    diag.n_correspondences = reg.n_correspondences;
    diag.cost = reg.final_cost;
    diag.diverged = reg.diverged;
    if (reg.infeasible) {
      // Fallback 2: accept the motion prior as the pose.
      diag.registration_infeasible = true;
      diag.used_prior_pose = true;
    } else {
      pose = reg.pose;
      registration_ok = true;
    }
  } else {
    diag.used_prior_pose = true;
  }
  pose.time = scan.timestamp;

  state.trajectory.push_back(pose);
  state.last_pose = pose;
  state.last_timestamp = scan.timestamp;
  if (registration_ok) {
    maybe_add_keyframe(state, pose, features, config);
  }
  return pose;
}

}  // namespace dro
