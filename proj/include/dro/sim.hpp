#pragma once

#include "dro/geometry.hpp"
#include "dro/io.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace dro::sim {

struct Patch {
  Vec3 corner = Vec3::Zero();
  Vec3 edge1 = Vec3::UnitX();  // must be linearly independent of edge2
  Vec3 edge2 = Vec3::UnitY();
  double reflectivity = 1.0;
};

struct Mover {
  Vec3 position = Vec3::Zero();   // at the scan timestamp
  Vec3 velocity = Vec3::Zero();   // world frame, constant
  double extent = 1.0;            // sampling ball radius, m
  double reflectivity = 1.0;
};

struct SceneModel {
  std::vector<Patch> patches;
  std::vector<Mover> movers;
  bool ground_plane = false;
  double ground_size = 200.0;         // side length of the z=0 ground patch
  double ground_reflectivity = 1.0;
};

struct SensorSpec {
  double fov_azimuth_deg = 120.0;
  double fov_elevation_deg = 40.0;
  double max_range = 80.0;            // m
  double range_noise_sigma = 0.0;     // m, along the ray
  double doppler_noise_sigma = 0.0;   // m/s
  double intensity_noise_sigma = 0.0;
  int points_per_scan = 350;
  int doppler_sign = +1;
  double scan_duration = 0.0;         // s; 0 -> no per-point offsets
  double ghost_fraction = 0.0;        // share of uniform-random ghost returns
};

enum class PointKind { kStatic, kDynamic, kGhost };

struct PointTruth {
  PointKind kind = PointKind::kStatic;
  Vec3 world_point = Vec3::Zero();  // at the point's acquisition time
  int mover_index = -1;
};

struct SimulatedScan {
  RadarScan scan;
  std::vector<PointTruth> truth;
};

/// Renders one scan from `pose` (stamped with the scan timestamp). Doppler is
/// doppler_sign times the radial component of (target velocity - sensor
/// velocity) along the sensor-to-point ray; points are rendered at their
/// individual times assuming a constant body twist over scan_duration.
/// Mover::position is taken at the scan timestamp.
SimulatedScan simulate_scan(const SceneModel& scene, const Pose& pose,
                            const Vec3& velocity_world,
                            const Vec3& angular_rate_body,
                            const SensorSpec& spec, std::uint64_t seed);

struct TrajectorySpec {
  std::vector<Vec3> waypoints;  // z = sensor height
  double speed = 10.0;          // m/s along the path
  double rate = 10.0;           // frames per second
  double turn_radius = 3.0;     // corner fillet radius, m (0 = sharp)
};

struct FrameState {
  Pose pose;                 // world, stamped
  Vec3 velocity_world = Vec3::Zero();
  Vec3 angular_rate_body = Vec3::Zero();
};

/// Constant-speed traversal of the waypoint polyline with circular corner
/// fillets; heading follows the path tangent.
std::vector<FrameState> sample_trajectory(const TrajectorySpec& spec);

/// Writes scans/, gt.tum, labels.csv, and sim_config.txt under out_dir.
/// Per-frame seeds derive from `seed`, so output is reproducible byte for
/// byte.
void simulate_sequence(const SceneModel& scene, const TrajectorySpec& traj,
                       const SensorSpec& spec,
                       const std::filesystem::path& out_dir,
                       std::uint64_t seed);

/// Scene file: `key = value` dialect with repeated `patch = ...` /
/// `mover = ...` entries plus the sensor keys (see README for the grammar).
struct SceneFile {
  SceneModel scene;
  SensorSpec sensor;
};
SceneFile read_scene_file(const std::filesystem::path& path);
TrajectorySpec read_trajectory_spec(const std::filesystem::path& path);

/// Deterministic, platform-independent RNG used by the simulator.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next_u64();
  double uniform();                      // [0, 1)
  double uniform(double lo, double hi);  // [lo, hi)
  double normal(double sigma);           // Box-Muller, no caching
  int uniform_int(int bound);            // [0, bound)

 private:
  std::uint64_t state_;
};

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace dro::sim
