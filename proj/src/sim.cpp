#include "dro/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dro::sim {

namespace {

constexpr double kMinRange = 0.5;          // m, below this nothing is emitted
constexpr double kNominalRange = 10.0;     // m, intensity reference range
constexpr double kGhostDopplerSpan = 30.0; // m/s
constexpr double kGhostIntensityMax = 0.5;

// The world is a fixed set of point scatterers so consecutive scans
// re-observe the same physical targets (detection speckle and measurement
// noise aside). Scatterers cluster on structure (column/edge/corner analogs)
// the way radar returns do; each cluster carries one dominant reflector. The
// layout derives from the scene geometry alone, never from the per-frame
// seed.
constexpr std::uint64_t kScattererLayoutSeed = 0x5CA77E7E2ull;
constexpr double kClusterDensity = 0.25;        // clusters per m^2 of patch
constexpr double kLoneScattererDensity = 0.2;   // per m^2 of patch
constexpr double kGroundClusterDensity = 0.02;  // per m^2
constexpr double kGroundLoneDensity = 0.05;     // per m^2
constexpr double kClusterRadius = 0.3;          // m, on the surface
constexpr int kMaxGroundScatterers = 15000;
constexpr double kMoverScattererPerArea = 30.0; // per m^2 of cross section

struct Scatterer {
  Vec3 position;        // world (static); mover offsets are relative
  double reflectivity;  // per-scatterer strength around the surface value
  int mover_index = -1;
};

Vec3 sample_ball(Rng& rng, double radius) {
  Vec3 dir;
  do {
    dir = Vec3(rng.normal(1.0), rng.normal(1.0), rng.normal(1.0));
  } while (dir.norm() < 1e-12);
  dir.normalize();
  return radius * std::cbrt(rng.uniform()) * dir;
}

std::vector<Scatterer> materialize_scatterers(const SceneModel& scene) {
  Rng rng(kScattererLayoutSeed);
  std::vector<Scatterer> out;
  auto populate_patch = [&](const Patch& patch, double cluster_density,
                            double lone_density, int scatterer_cap) {
    const double area = patch.edge1.cross(patch.edge2).norm();
    if (area <= 1e-9) throw Error("scene patch has dependent edge vectors");
    if (patch.reflectivity <= 0.0) {
      throw Error("patch reflectivity must be positive");
    }
    const Vec3 u1 = patch.edge1.normalized();
    const Vec3 u2 = (patch.edge2 - patch.edge2.dot(u1) * u1).normalized();
    const std::size_t cap = out.size() + scatterer_cap;

    const int n_clusters = static_cast<int>(std::ceil(area * cluster_density));
    for (int c = 0; c < n_clusters && out.size() < cap; ++c) {
      const Vec3 seed = patch.corner + rng.uniform() * patch.edge1 +
                        rng.uniform() * patch.edge2;
      const int members = 4 + rng.uniform_int(5);
      for (int i = 0; i < members && out.size() < cap; ++i) {
        const double angle = rng.uniform(0.0, 2.0 * M_PI);
        const double rad = kClusterRadius * std::sqrt(rng.uniform());
        Scatterer s;
        s.position =
            seed + rad * (std::cos(angle) * u1 + std::sin(angle) * u2);
        // one dominant reflector per cluster anchors the intensity peak
        s.reflectivity = patch.reflectivity *
                         (i == 0 ? 3.0 + 2.0 * rng.uniform()
                                 : 0.5 + rng.uniform());
        out.push_back(s);
      }
    }
    const int n_lone = static_cast<int>(std::ceil(area * lone_density));
    for (int i = 0; i < n_lone && out.size() < cap; ++i) {
      Scatterer s;
      s.position = patch.corner + rng.uniform() * patch.edge1 +
                   rng.uniform() * patch.edge2;
      s.reflectivity = patch.reflectivity * (0.5 + rng.uniform());
      out.push_back(s);
    }
  };
  for (const auto& patch : scene.patches) {
    populate_patch(patch, kClusterDensity, kLoneScattererDensity, 1 << 20);
  }
  if (scene.ground_plane) {
    Patch ground;
    const double side = scene.ground_size;
    ground.corner = Vec3(-0.5 * side, -0.5 * side, 0.0);
    ground.edge1 = Vec3(side, 0.0, 0.0);
    ground.edge2 = Vec3(0.0, side, 0.0);
    ground.reflectivity = scene.ground_reflectivity;
    populate_patch(ground, kGroundClusterDensity, kGroundLoneDensity,
                   kMaxGroundScatterers);
  }
  for (std::size_t m = 0; m < scene.movers.size(); ++m) {
    const auto& mover = scene.movers[m];
    if (mover.extent <= 0.0) throw Error("mover extent must be positive");
    if (mover.reflectivity <= 0.0) {
      throw Error("mover reflectivity must be positive");
    }
    const int n = std::max(
        20, static_cast<int>(std::ceil(kMoverScattererPerArea * M_PI *
                                       mover.extent * mover.extent)));
    for (int i = 0; i < n; ++i) {
      Scatterer s;
      s.position = sample_ball(rng, mover.extent);  // offset from the mover
      s.reflectivity = mover.reflectivity * (0.5 + rng.uniform());
      s.mover_index = static_cast<int>(m);
      out.push_back(s);
    }
  }
  return out;
}

// Detection probabilities min(1, alpha * score) sum to the budget; solve for
// alpha by bisection (monotone in alpha).
double solve_detection_scale(const std::vector<double>& scores, int budget) {
  if (scores.empty() || budget <= 0) return 0.0;
  if (static_cast<int>(scores.size()) <= budget) {
    return std::numeric_limits<double>::infinity();
  }
  double lo = 0.0;
  double hi = 1.0;
  auto expected = [&](double alpha) {
    double sum = 0.0;
    for (double s : scores) sum += std::min(1.0, alpha * s);
    return sum;
  };
  while (expected(hi) < budget) hi *= 2.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (expected(mid) < budget ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::uint64_t Rng::next_u64() {
  // splitmix64; platform-independent by construction
  state_ += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

double Rng::normal(double sigma) {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

int Rng::uniform_int(int bound) {
  return static_cast<int>(next_u64() % static_cast<std::uint64_t>(bound));
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  Rng rng(base ^ (0xD1342543DE82EF95ull * (stream + 1)));
  return rng.next_u64();
}

SimulatedScan simulate_scan(const SceneModel& scene, const Pose& pose,
                            const Vec3& velocity_world,
                            const Vec3& angular_rate_body,
                            const SensorSpec& spec, std::uint64_t seed) {
  if (spec.fov_azimuth_deg <= 0.0 || spec.fov_azimuth_deg >= 360.0 ||
      spec.fov_elevation_deg <= 0.0 || spec.fov_elevation_deg >= 360.0) {
    throw Error("simulate_scan: FOV must be within (0, 360) degrees");
  }
  if (spec.range_noise_sigma < 0.0 || spec.doppler_noise_sigma < 0.0 ||
      spec.intensity_noise_sigma < 0.0) {
    throw Error("simulate_scan: noise sigmas must be >= 0");
  }
  if (spec.points_per_scan < 1) {
    throw Error("simulate_scan: points_per_scan must be >= 1");
  }

  Rng rng(seed);
  const auto scatterers = materialize_scatterers(scene);
  if (scatterers.empty()) {
    throw Error("simulate_scan: scene has no emitting geometry");
  }
  const double half_az = 0.5 * spec.fov_azimuth_deg * M_PI / 180.0;
  const double half_el = 0.5 * spec.fov_elevation_deg * M_PI / 180.0;
  const Vec3 v_body = pose.rotation.transpose() * velocity_world;

  const auto sensor_pose_at = [&](double tau) {
    if (tau == 0.0) return pose;
    return compose(pose, se3_exp(Twist{v_body * tau, angular_rate_body * tau}));
  };

  SimulatedScan out;
  out.scan.timestamp = pose.time;

  // Attempts to place one return from world_point; applies FOV/range culling
  // and the noise model.
  const auto emit = [&](const Vec3& world_point, const Vec3& target_velocity,
                        double reflectivity, double tau, const Pose& sensor,
                        PointKind kind, int mover_index) {
    const Vec3 p_body = apply(inverse(sensor), world_point);
    const double range = p_body.norm();
    if (range < kMinRange || range > spec.max_range) return false;
    if (std::abs(std::atan2(p_body.y(), p_body.x())) > half_az) return false;
    const double planar = std::hypot(p_body.x(), p_body.y());
    if (std::abs(std::atan2(p_body.z(), planar)) > half_el) return false;

    const Vec3 sensor_velocity = sensor.rotation * v_body;
    const Vec3 ray_world = sensor.rotation * (p_body / range);
    const double radial = ray_world.dot(target_velocity - sensor_velocity);

    RadarPoint point;
    point.position =
        p_body + rng.normal(spec.range_noise_sigma) * (p_body / range);
    point.doppler =
        spec.doppler_sign * radial + rng.normal(spec.doppler_noise_sigma);
    point.intensity =
        std::max(0.0, reflectivity * (kNominalRange / range) *
                              (kNominalRange / range) +
                          rng.normal(spec.intensity_noise_sigma));
    point.time_offset = tau;
    out.scan.points.push_back(point);
    out.truth.push_back({kind, world_point, mover_index});
    return true;
  };
  const auto draw_tau = [&] {
    return spec.scan_duration > 0.0 ? rng.uniform(0.0, spec.scan_duration)
                                    : 0.0;
  };

  // Candidate pass: every scatterer in view at its own acquisition time.
  const int n_ghost = static_cast<int>(
      std::llround(spec.ghost_fraction * spec.points_per_scan));
  const int budget = spec.points_per_scan - n_ghost;

  struct Candidate {
    Vec3 world_point;
    Vec3 target_velocity;
    double reflectivity;
    double tau;
    PointKind kind;
    int mover_index;
  };
  std::vector<Candidate> candidates;
  std::vector<double> scores;
  for (const auto& s : scatterers) {
    const double tau = draw_tau();
    const Pose sensor = sensor_pose_at(tau);
    Candidate c;
    c.tau = tau;
    c.reflectivity = s.reflectivity;
    c.mover_index = s.mover_index;
    if (s.mover_index >= 0) {
      const Mover& mover = scene.movers[s.mover_index];
      c.world_point = mover.position + tau * mover.velocity + s.position;
      c.target_velocity = mover.velocity;
      c.kind = PointKind::kDynamic;
    } else {
      c.world_point = s.position;
      c.target_velocity = Vec3::Zero();
      c.kind = PointKind::kStatic;
    }
    const Vec3 p_body = apply(inverse(sensor), c.world_point);
    const double range = p_body.norm();
    if (range < kMinRange || range > spec.max_range) continue;
    if (std::abs(std::atan2(p_body.y(), p_body.x())) > half_az) continue;
    if (std::abs(std::atan2(p_body.z(), std::hypot(p_body.x(), p_body.y()))) >
        half_el) {
      continue;
    }
    candidates.push_back(c);
    scores.push_back(c.reflectivity * (kNominalRange / range) *
                     (kNominalRange / range));
  }

  // SNR-proportional detection, normalized so the expected count matches the
  // budget; strong nearby targets return every frame, weak ones flicker.
  const double alpha = solve_detection_scale(scores, budget);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double p = std::min(1.0, alpha * scores[i]);
    if (rng.uniform() >= p) continue;
    const Candidate& c = candidates[i];
    emit(c.world_point, c.target_velocity, c.reflectivity, c.tau,
         sensor_pose_at(c.tau), c.kind, c.mover_index);
  }

  for (int g = 0; g < n_ghost; ++g) {
    const double tau =
        spec.scan_duration > 0.0 ? rng.uniform(0.0, spec.scan_duration) : 0.0;
    const double az = rng.uniform(-half_az, half_az);
    const double el = rng.uniform(-half_el, half_el);
    const double range = rng.uniform(std::max(1.0, kMinRange), spec.max_range);
    RadarPoint point;
    point.position = range * Vec3(std::cos(el) * std::cos(az),
                                  std::cos(el) * std::sin(az), std::sin(el));
    point.doppler = rng.uniform(-kGhostDopplerSpan, kGhostDopplerSpan);
    point.intensity = rng.uniform(0.0, kGhostIntensityMax);
    point.time_offset = tau;
    out.scan.points.push_back(point);
    out.truth.push_back(
        {PointKind::kGhost, apply(sensor_pose_at(tau), point.position), -1});
  }

  if (out.scan.points.empty()) {
    throw Error("simulate_scan: no visible geometry in the field of view");
  }
  return out;
}

std::vector<FrameState> sample_trajectory(const TrajectorySpec& spec) {
  if (spec.waypoints.size() < 2) {
    throw Error("trajectory needs at least 2 waypoints");
  }
  if (spec.speed <= 0.0 || spec.rate <= 0.0) {
    throw Error("trajectory speed and rate must be positive");
  }

  struct Segment {
    bool arc = false;
    // line
    Vec2 start = Vec2::Zero();
    Vec2 dir = Vec2::UnitX();
    // arc
    Vec2 center = Vec2::Zero();
    double radius = 0.0;
    double angle0 = 0.0;
    double side = 1.0;  // +1 left turn, -1 right
    double length = 0.0;
  };

  const double z = spec.waypoints.front().z();
  std::vector<Vec2> wp(spec.waypoints.size());
  for (std::size_t i = 0; i < wp.size(); ++i) {
    wp[i] = spec.waypoints[i].head<2>();
  }

  std::vector<Segment> segments;
  Vec2 cursor = wp.front();
  for (std::size_t i = 1; i + 1 <= wp.size() - 1; ++i) {
    const Vec2 incoming = (wp[i] - wp[i - 1]).normalized();
    const Vec2 outgoing = (wp[i + 1] - wp[i]).normalized();
    const double cross = incoming.x() * outgoing.y() - incoming.y() * outgoing.x();
    const double turn = std::atan2(std::abs(cross), incoming.dot(outgoing));
    double setback = 0.0;
    double radius = spec.turn_radius;
    if (radius > 0.0 && turn > 1e-6) {
      setback = radius * std::tan(0.5 * turn);
      const double cap = 0.45 * std::min((wp[i] - cursor).norm(),
                                         (wp[i + 1] - wp[i]).norm());
      if (setback > cap) {
        setback = cap;
        radius = setback / std::tan(0.5 * turn);
      }
    }
    const Vec2 entry = wp[i] - incoming * setback;

    Segment line;
    line.start = cursor;
    line.length = (entry - cursor).norm();
    line.dir = line.length > 1e-12 ? Vec2((entry - cursor) / line.length)
                                   : incoming;
    if (line.length > 1e-12) segments.push_back(line);

    if (setback > 0.0 && turn > 1e-6) {
      Segment arc;
      arc.arc = true;
      arc.side = cross >= 0.0 ? 1.0 : -1.0;
      const Vec2 normal(-incoming.y(), incoming.x());
      arc.center = entry + arc.side * radius * normal;
      arc.radius = radius;
      arc.angle0 = std::atan2(entry.y() - arc.center.y(),
                              entry.x() - arc.center.x());
      arc.length = radius * turn;
      segments.push_back(arc);
      cursor = wp[i] + outgoing * setback;
    } else {
      cursor = wp[i];
    }
  }
  {
    Segment line;
    line.start = cursor;
    line.length = (wp.back() - cursor).norm();
    if (line.length > 1e-12) {
      line.dir = (wp.back() - cursor) / line.length;
      segments.push_back(line);
    }
  }
  if (segments.empty()) throw Error("trajectory has zero length");

  double total = 0.0;
  for (const auto& seg : segments) total += seg.length;

  std::vector<FrameState> frames;
  const double dt = 1.0 / spec.rate;
  const int n_frames = static_cast<int>(std::floor(total / spec.speed * spec.rate)) + 1;
  for (int k = 0; k < n_frames; ++k) {
    const double t = k * dt;
    double s = std::min(spec.speed * t, total);
    std::size_t si = 0;
    while (si + 1 < segments.size() && s > segments[si].length) {
      s -= segments[si].length;
      ++si;
    }
    const Segment& seg = segments[si];
    s = std::min(s, seg.length);

    Vec2 position;
    double heading;
    double omega_z = 0.0;
    if (!seg.arc) {
      position = seg.start + seg.dir * s;
      heading = std::atan2(seg.dir.y(), seg.dir.x());
    } else {
      const double angle = seg.angle0 + seg.side * s / seg.radius;
      position = seg.center + seg.radius * Vec2(std::cos(angle), std::sin(angle));
      heading = angle + seg.side * M_PI / 2.0;
      omega_z = seg.side * spec.speed / seg.radius;
    }

    FrameState frame;
    frame.pose.rotation = so3_exp(Vec3(0.0, 0.0, heading));
    frame.pose.translation = Vec3(position.x(), position.y(), z);
    frame.pose.time = t;
    frame.velocity_world =
        spec.speed * Vec3(std::cos(heading), std::sin(heading), 0.0);
    frame.angular_rate_body = Vec3(0.0, 0.0, omega_z);
    frames.push_back(frame);
  }
  return frames;
}

void simulate_sequence(const SceneModel& scene, const TrajectorySpec& traj,
                       const SensorSpec& spec,
                       const std::filesystem::path& out_dir,
                       std::uint64_t seed) {
  std::filesystem::create_directories(out_dir / "scans");
  const auto frames = sample_trajectory(traj);

  std::ofstream labels(out_dir / "labels.csv");
  if (!labels) throw IoError("cannot open labels.csv under " + out_dir.string());
  labels << "frame,point,kind\n";

  Trajectory gt;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& frame = frames[i];
    SceneModel at_time = scene;
    for (auto& mover : at_time.movers) {
      mover.position += frame.pose.time * mover.velocity;
    }
    const auto sim =
        simulate_scan(at_time, frame.pose, frame.velocity_world,
                      frame.angular_rate_body, spec, derive_seed(seed, i));

    char name[64];
    std::snprintf(name, sizeof(name), "%06zu_%lld.csv", i,
                  static_cast<long long>(std::llround(frame.pose.time * 1e9)));
    write_scan_file(sim.scan, out_dir / "scans" / name);

    for (std::size_t p = 0; p < sim.truth.size(); ++p) {
      const char* kind = sim.truth[p].kind == PointKind::kStatic ? "static"
                         : sim.truth[p].kind == PointKind::kDynamic
                             ? "dynamic"
                             : "ghost";
      labels << i << ',' << p << ',' << kind << '\n';
    }
    gt.push_back(frame.pose);
  }
  write_trajectory_tum(gt, out_dir / "gt.tum");

  std::ofstream config(out_dir / "sim_config.txt");
  if (!config) throw IoError("cannot open sim_config.txt under " + out_dir.string());
  config << "# generation parameters\n";
  config << "seed = " << seed << '\n';
  config << "speed = " << format_double(traj.speed) << '\n';
  config << "rate = " << format_double(traj.rate) << '\n';
  config << "turn_radius = " << format_double(traj.turn_radius) << '\n';
  for (const auto& w : traj.waypoints) {
    config << "waypoint = " << format_double(w.x()) << ' '
           << format_double(w.y()) << ' ' << format_double(w.z()) << '\n';
  }
  config << "fov_azimuth_deg = " << format_double(spec.fov_azimuth_deg) << '\n';
  config << "fov_elevation_deg = " << format_double(spec.fov_elevation_deg)
         << '\n';
  config << "max_range = " << format_double(spec.max_range) << '\n';
  config << "range_noise_sigma = " << format_double(spec.range_noise_sigma)
         << '\n';
  config << "doppler_noise_sigma = " << format_double(spec.doppler_noise_sigma)
         << '\n';
  config << "intensity_noise_sigma = "
         << format_double(spec.intensity_noise_sigma) << '\n';
  config << "points_per_scan = " << spec.points_per_scan << '\n';
  config << "doppler_sign = " << spec.doppler_sign << '\n';
  config << "scan_duration = " << format_double(spec.scan_duration) << '\n';
  config << "ghost_fraction = " << format_double(spec.ghost_fraction) << '\n';
  config << "ground = " << (scene.ground_plane ? "true" : "false") << '\n';
  config << "ground_size = " << format_double(scene.ground_size) << '\n';
  config << "ground_reflectivity = "
         << format_double(scene.ground_reflectivity) << '\n';
  for (const auto& p : scene.patches) {
    config << "patch = " << format_double(p.corner.x()) << ' '
           << format_double(p.corner.y()) << ' ' << format_double(p.corner.z())
           << ' ' << format_double(p.edge1.x()) << ' '
           << format_double(p.edge1.y()) << ' ' << format_double(p.edge1.z())
           << ' ' << format_double(p.edge2.x()) << ' '
           << format_double(p.edge2.y()) << ' ' << format_double(p.edge2.z())
           << ' ' << format_double(p.reflectivity) << '\n';
  }
  for (const auto& m : scene.movers) {
    config << "mover = " << format_double(m.position.x()) << ' '
           << format_double(m.position.y()) << ' '
           << format_double(m.position.z()) << ' '
           << format_double(m.velocity.x()) << ' '
           << format_double(m.velocity.y()) << ' '
           << format_double(m.velocity.z()) << ' ' << format_double(m.extent)
           << ' ' << format_double(m.reflectivity) << '\n';
  }
}

namespace {

struct KeyValue {
  std::string key;
  std::string value;
  int line = 0;
};

std::vector<KeyValue> parse_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path.string());
  std::vector<KeyValue> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r\n");
    const std::string body = line.substr(first, last - first + 1);
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("expected 'key = value' at " + path.string() + ":" +
                        std::to_string(line_no));
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      if (b == std::string::npos) return std::string{};
      const auto e = s.find_last_not_of(" \t");
      return s.substr(b, e - b + 1);
    };
    out.push_back({trim(body.substr(0, eq)), trim(body.substr(eq + 1)), line_no});
  }
  return out;
}

std::vector<double> parse_numbers(const KeyValue& kv, std::size_t expected,
                                  const std::filesystem::path& path) {
  std::istringstream in(kv.value);
  std::vector<double> values;
  double v;
  while (in >> v) values.push_back(v);
  std::string extra;
  if (!in.eof() || (in >> extra)) values.clear();
  if (values.size() != expected) {
    throw ConfigError("key '" + kv.key + "' expects " +
                      std::to_string(expected) + " numbers at " +
                      path.string() + ":" + std::to_string(kv.line));
  }
  return values;
}

double parse_number(const KeyValue& kv, const std::filesystem::path& path) {
  return parse_numbers(kv, 1, path)[0];
}

bool parse_flag(const KeyValue& kv, const std::filesystem::path& path) {
  if (kv.value == "true" || kv.value == "on" || kv.value == "1") return true;
  if (kv.value == "false" || kv.value == "off" || kv.value == "0") return false;
  throw ConfigError("key '" + kv.key + "' expects a boolean at " +
                    path.string() + ":" + std::to_string(kv.line));
}

}  // namespace

SceneFile read_scene_file(const std::filesystem::path& path) {
  SceneFile out;
  for (const auto& kv : parse_key_values(path)) {
    if (kv.key == "patch") {
      const auto v = parse_numbers(kv, 10, path);
      out.scene.patches.push_back({Vec3(v[0], v[1], v[2]),
                                   Vec3(v[3], v[4], v[5]),
                                   Vec3(v[6], v[7], v[8]), v[9]});
    } else if (kv.key == "mover") {
      const auto v = parse_numbers(kv, 8, path);
      out.scene.movers.push_back({Vec3(v[0], v[1], v[2]),
                                  Vec3(v[3], v[4], v[5]), v[6], v[7]});
    } else if (kv.key == "ground") {
      out.scene.ground_plane = parse_flag(kv, path);
    } else if (kv.key == "ground_size") {
      out.scene.ground_size = parse_number(kv, path);
    } else if (kv.key == "ground_reflectivity") {
      out.scene.ground_reflectivity = parse_number(kv, path);
    } else if (kv.key == "fov_azimuth_deg") {
      out.sensor.fov_azimuth_deg = parse_number(kv, path);
    } else if (kv.key == "fov_elevation_deg") {
      out.sensor.fov_elevation_deg = parse_number(kv, path);
    } else if (kv.key == "max_range") {
      out.sensor.max_range = parse_number(kv, path);
    } else if (kv.key == "range_noise_sigma") {
      out.sensor.range_noise_sigma = parse_number(kv, path);
    } else if (kv.key == "doppler_noise_sigma") {
      out.sensor.doppler_noise_sigma = parse_number(kv, path);
    } else if (kv.key == "intensity_noise_sigma") {
      out.sensor.intensity_noise_sigma = parse_number(kv, path);
    } else if (kv.key == "points_per_scan") {
      out.sensor.points_per_scan = static_cast<int>(parse_number(kv, path));
    } else if (kv.key == "doppler_sign") {
      out.sensor.doppler_sign = static_cast<int>(parse_number(kv, path));
    } else if (kv.key == "scan_duration") {
      out.sensor.scan_duration = parse_number(kv, path);
    } else if (kv.key == "ghost_fraction") {
      out.sensor.ghost_fraction = parse_number(kv, path);
    } else if (kv.key == "seed" || kv.key == "speed" || kv.key == "rate" ||
               kv.key == "turn_radius" || kv.key == "waypoint") {
      // trajectory keys are legal here so a sim_config.txt can be re-read
    } else {
      throw ConfigError("unknown scene key '" + kv.key + "' at " +
                        path.string() + ":" + std::to_string(kv.line));
    }
  }
  if (out.scene.patches.empty() && !out.scene.ground_plane &&
      out.scene.movers.empty()) {
    throw ConfigError("scene file defines no geometry: " + path.string());
  }
  return out;
}

TrajectorySpec read_trajectory_spec(const std::filesystem::path& path) {
  TrajectorySpec out;
  for (const auto& kv : parse_key_values(path)) {
    if (kv.key == "waypoint") {
      const auto v = parse_numbers(kv, 3, path);
      out.waypoints.push_back(Vec3(v[0], v[1], v[2]));
    } else if (kv.key == "speed") {
      out.speed = parse_number(kv, path);
    } else if (kv.key == "rate") {
      out.rate = parse_number(kv, path);
    } else if (kv.key == "turn_radius") {
      out.turn_radius = parse_number(kv, path);
    } else {
      throw ConfigError("unknown trajectory key '" + kv.key + "' at " +
                        path.string() + ":" + std::to_string(kv.line));
    }
  }
  if (out.waypoints.size() < 2) {
    throw ConfigError("trajectory file needs at least 2 waypoints: " +
                      path.string());
  }
  return out;
}

}  // namespace dro::sim
