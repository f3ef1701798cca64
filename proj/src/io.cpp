#include "dro/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <regex>
#include <sstream>

namespace dro {

namespace {

constexpr const char* kScanHeader =
    "timestamp_s,x_m,y_m,z_m,doppler_mps,intensity,time_offset_s";

std::string trim(const std::string& s) {
  auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

bool parse_double(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  char* end = nullptr;
  out = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open file for writing: " + path.string());
  return out;
}

bool parse_bool(const std::string& value, const std::string& key, int line) {
  const std::string v = trim(value);
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  throw ConfigError("config key '" + key + "' expects a boolean, got '" + v +
                    "' (line " + std::to_string(line) + ")");
}

double parse_config_double(const std::string& value, const std::string& key,
                           int line) {
  double d = 0.0;
  if (!parse_double(value, d) || !std::isfinite(d)) {
    throw ConfigError("config key '" + key + "' expects a number, got '" +
                      trim(value) + "' (line " + std::to_string(line) + ")");
  }
  return d;
}

int parse_config_int(const std::string& value, const std::string& key,
                     int line) {
  const double d = parse_config_double(value, key, line);
  if (d != std::floor(d)) {
    throw ConfigError("config key '" + key + "' expects an integer (line " +
                      std::to_string(line) + ")");
  }
  return static_cast<int>(d);
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

RadarScan read_scan_file(const std::filesystem::path& path,
                         ScanReadStats* stats) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) {
    throw IoError("scan file is empty: " + path.string());
  }
  if (trim(line) != kScanHeader) {
    throw IoError("malformed scan header in " + path.string() + ": '" + line +
                  "'");
  }

  RadarScan scan;
  bool have_timestamp = false;
  int dropped = 0;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 7) {
      throw IoError("scan row with " + std::to_string(fields.size()) +
                    " fields (expected 7) at " + path.string() + ":" +
                    std::to_string(line_no));
    }
    double v[7];
    bool parse_ok = true;
    for (int i = 0; i < 7; ++i) {
      parse_ok = parse_ok && parse_double(fields[i], v[i]);
    }
    if (!parse_ok) {
      throw IoError("unparseable scan row at " + path.string() + ":" +
                    std::to_string(line_no));
    }
    if (!have_timestamp) {
      if (!std::isfinite(v[0])) {
        throw IoError("non-finite timestamp at " + path.string() + ":" +
                      std::to_string(line_no));
      }
      scan.timestamp = v[0];
      have_timestamp = true;
    } else if (v[0] != scan.timestamp) {
      throw IoError("inconsistent timestamp_s within " + path.string() + ":" +
                    std::to_string(line_no));
    }

    bool finite = true;
    for (int i = 1; i < 7; ++i) finite = finite && std::isfinite(v[i]);
    const Vec3 position(v[1], v[2], v[3]);
    if (!finite || position.norm() <= 0.0 || v[5] < 0.0) {
      ++dropped;
      continue;
    }
    scan.points.push_back({position, v[4], v[5], v[6]});
  }
  if (stats) stats->rows_dropped = dropped;
  if (scan.points.empty()) {
    throw IoError("scan empty after filtering: " + path.string());
  }
  return scan;
}

void write_scan_file(const RadarScan& scan, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << kScanHeader << '\n';
  const std::string ts = format_double(scan.timestamp);
  for (const auto& p : scan.points) {
    out << ts << ',' << format_double(p.position.x()) << ','
        << format_double(p.position.y()) << ',' << format_double(p.position.z())
        << ',' << format_double(p.doppler) << ',' << format_double(p.intensity)
        << ',' << format_double(p.time_offset) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

SequenceReader::SequenceReader(const std::filesystem::path& dir) {
  const auto scans_dir = dir / "scans";
  if (!std::filesystem::is_directory(scans_dir)) {
    throw IoError("sequence directory has no scans/ subdirectory: " +
                  dir.string());
  }
  static const std::regex name_re(R"((\d{6})_(\d+)\.csv)");
  struct Entry {
    long index;
    long long stamp_ns;
    std::filesystem::path path;
  };
  std::vector<Entry> entries;
  for (const auto& item : std::filesystem::directory_iterator(scans_dir)) {
    if (!item.is_regular_file()) continue;
    const std::string name = item.path().filename().string();
    std::smatch m;
    if (!std::regex_match(name, m, name_re)) {
      if (item.path().extension() == ".csv") {
        throw IoError("scan file name does not match <index:06>_<timestamp_ns>.csv: " +
                      name);
      }
      continue;
    }
    entries.push_back({std::stol(m[1]), std::stoll(m[2]), item.path()});
  }
  if (entries.empty()) {
    throw IoError("no scan files found under " + scans_dir.string());
  }
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.index < b.index; });
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].index != static_cast<long>(i)) {
      throw IoError("missing scan index " + std::to_string(i) + " in " +
                    scans_dir.string());
    }
    if (i > 0 && entries[i].stamp_ns <= entries[i - 1].stamp_ns) {
      throw IoError("non-monotonic scan timestamps at index " +
                    std::to_string(i));
    }
    files_.push_back(entries[i].path);
  }
}

RadarScan SequenceReader::next() {
  if (done()) throw IoError("sequence exhausted");
  RadarScan scan = read_scan_file(files_[pos_++]);
  if (have_last_ && scan.timestamp <= last_timestamp_) {
    throw IoError("non-monotonic scan content timestamp in " +
                  files_[pos_ - 1].string());
  }
  last_timestamp_ = scan.timestamp;
  have_last_ = true;
  return scan;
}

Trajectory read_trajectory_tum(const std::filesystem::path& path) {
  auto in = open_input(path);
  Trajectory traj;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::istringstream ls(t);
    double v[8];
    for (int i = 0; i < 8; ++i) {
      if (!(ls >> v[i])) {
        throw IoError("malformed TUM line at " + path.string() + ":" +
                      std::to_string(line_no));
      }
    }
    std::string extra;
    if (ls >> extra) {
      throw IoError("trailing fields on TUM line at " + path.string() + ":" +
                    std::to_string(line_no));
    }
    Eigen::Quaterniond q(v[7], v[4], v[5], v[6]);  // w, x, y, z
    if (std::abs(q.norm() - 1.0) > 1e-3) {
      throw IoError("non-unit quaternion (norm " + format_double(q.norm()) +
                    ") at " + path.string() + ":" + std::to_string(line_no));
    }
    q.normalize();
    Pose pose;
    pose.time = v[0];
    pose.translation = Vec3(v[1], v[2], v[3]);
    pose.rotation = q.toRotationMatrix();
    if (!traj.empty() && pose.time <= traj.back().time) {
      throw IoError("non-increasing timestamp at " + path.string() + ":" +
                    std::to_string(line_no));
    }
    traj.push_back(pose);
  }
  if (traj.empty()) {
    throw IoError("empty trajectory file: " + path.string());
  }
  return traj;
}

void write_trajectory_tum(const Trajectory& traj,
                          const std::filesystem::path& path) {
  auto out = open_output(path);
  for (const auto& pose : traj) {
    Eigen::Quaterniond q(pose.rotation);
    q.normalize();
    if (q.w() < 0.0) q.coeffs() = -q.coeffs();
    out << format_double(pose.time) << ' ' << format_double(pose.translation.x())
        << ' ' << format_double(pose.translation.y()) << ' '
        << format_double(pose.translation.z()) << ' ' << format_double(q.x())
        << ' ' << format_double(q.y()) << ' ' << format_double(q.z()) << ' '
        << format_double(q.w()) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void OdomConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) {
      throw ConfigError(std::string("config key '") + name +
                        "' must be positive");
    }
  };
  positive(voxel_size, "voxel_size");
  positive(dbscan_eps, "dbscan_eps");
  positive(huber_delta, "huber_delta");
  positive(keyframe_trans_thresh, "keyframe_trans_thresh");
  positive(keyframe_rot_thresh_deg, "keyframe_rot_thresh_deg");
  positive(assoc_radius, "assoc_radius");
  positive(gaussian_k_sigma, "gaussian_k_sigma");
  if (!w_thre_auto && w_thre < 0.0) {
    throw ConfigError("config key 'w_thre' must be >= 0 or 'auto'");
  }
  if (z_thre < 0.0 || z_thre > 1.0) {
    throw ConfigError("config key 'z_thre' must be within [0, 1]");
  }
  if (dbscan_min_pts < 1) throw ConfigError("dbscan_min_pts must be >= 1");
  if (window_size < 1) throw ConfigError("window_size must be >= 1");
  if (doppler_sign != 1 && doppler_sign != -1) {
    throw ConfigError("doppler_sign must be +1 or -1");
  }
  if (max_gn_iters < 1) throw ConfigError("max_gn_iters must be >= 1");
  if (max_outer_iters < 1) throw ConfigError("max_outer_iters must be >= 1");
  if (min_neighbors < 1) throw ConfigError("min_neighbors must be >= 1");
}

OdomConfig parse_config_text(const std::string& text,
                             const std::string& origin) {
  OdomConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("expected 'key = value' at " + origin + ":" +
                        std::to_string(line_no));
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));

    if (key == "voxel_size") {
      cfg.voxel_size = parse_config_double(value, key, line_no);
    } else if (key == "dbscan_eps") {
      cfg.dbscan_eps = parse_config_double(value, key, line_no);
    } else if (key == "dbscan_min_pts") {
      cfg.dbscan_min_pts = parse_config_int(value, key, line_no);
    } else if (key == "w_thre") {
      if (value == "auto") {
        cfg.w_thre_auto = true;
      } else {
        cfg.w_thre = parse_config_double(value, key, line_no);
        cfg.w_thre_auto = false;
      }
    } else if (key == "z_thre") {
      cfg.z_thre = parse_config_double(value, key, line_no);
    } else if (key == "huber_delta") {
      cfg.huber_delta = parse_config_double(value, key, line_no);
    } else if (key == "keyframe_trans_thresh") {
      cfg.keyframe_trans_thresh = parse_config_double(value, key, line_no);
    } else if (key == "keyframe_rot_thresh_deg") {
      cfg.keyframe_rot_thresh_deg = parse_config_double(value, key, line_no);
    } else if (key == "window_size") {
      cfg.window_size = parse_config_int(value, key, line_no);
    } else if (key == "assoc_radius") {
      cfg.assoc_radius = parse_config_double(value, key, line_no);
    } else if (key == "doppler_sign") {
      cfg.doppler_sign = parse_config_int(value, key, line_no);
    } else if (key == "max_gn_iters") {
      cfg.max_gn_iters = parse_config_int(value, key, line_no);
    } else if (key == "max_outer_iters") {
      cfg.max_outer_iters = parse_config_int(value, key, line_no);
    } else if (key == "min_neighbors") {
      cfg.min_neighbors = parse_config_int(value, key, line_no);
    } else if (key == "gaussian_k_sigma") {
      cfg.gaussian_k_sigma = parse_config_double(value, key, line_no);
    } else if (key == "fit_mode") {
      if (value == "general") {
        cfg.fit_mode = FitMode::kGeneral;
      } else if (value == "fixed_axis") {
        cfg.fit_mode = FitMode::kFixedAxis;
      } else {
        throw ConfigError("fit_mode must be 'general' or 'fixed_axis' (line " +
                          std::to_string(line_no) + ")");
      }
    } else if (key == "enable_ego_velocity") {
      cfg.enable_ego_velocity = parse_bool(value, key, line_no);
    } else if (key == "enable_dynamic_removal") {
      cfg.enable_dynamic_removal = parse_bool(value, key, line_no);
    } else {
      throw ConfigError("unknown config key '" + key + "' at " + origin + ":" +
                        std::to_string(line_no));
    }
  }
  cfg.validate();
  return cfg;
}

OdomConfig read_config(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path.string());
}

}  // namespace dro
