#include "dro/evaluation.hpp"

#include "dro/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace dro {

namespace {

Pose relative_motion(const Pose& a, const Pose& b) {
  return compose(inverse(a), b);
}

// Accumulated ground-truth path length from pairs[0] to each pair.
std::vector<double> gt_arc_length(const std::vector<PosePair>& pairs) {
  std::vector<double> cumulative(pairs.size(), 0.0);
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    cumulative[i] =
        cumulative[i - 1] +
        (pairs[i].gt.translation - pairs[i - 1].gt.translation).norm();
  }
  return cumulative;
}

struct SpanError {
  double rel_error = 0.0;  // translational error / nominal length
  double mean_speed = 0.0;
};

std::vector<SpanError> span_errors(const std::vector<PosePair>& pairs,
                                   double length) {
  std::vector<SpanError> out;
  const auto cumulative = gt_arc_length(pairs);
  for (std::size_t start = 0; start + 1 < pairs.size(); ++start) {
    std::size_t end = start + 1;
    while (end < pairs.size() &&
           cumulative[end] - cumulative[start] < length) {
      ++end;
    }
    if (end >= pairs.size()) break;
    const Pose gt_motion = relative_motion(pairs[start].gt, pairs[end].gt);
    const Pose est_motion = relative_motion(pairs[start].est, pairs[end].est);
    const Pose error = relative_motion(gt_motion, est_motion);
    SpanError span;
    span.rel_error = error.translation.norm() / length;
    const double duration = pairs[end].gt.time - pairs[start].gt.time;
    span.mean_speed = duration > 0.0
                          ? (cumulative[end] - cumulative[start]) / duration
                          : 0.0;
    out.push_back(span);
  }
  return out;
}

}  // namespace

std::vector<PosePair> associate_by_time(const Trajectory& est,
                                        const Trajectory& gt, double max_dt,
                                        int* dropped) {
  if (est.empty() || gt.empty()) {
    throw Error("associate_by_time: empty trajectory");
  }
  std::vector<PosePair> pairs;
  int miss = 0;
  std::size_t cursor = 0;
  for (const auto& pose : est) {
    while (cursor + 1 < gt.size() &&
           std::abs(gt[cursor + 1].time - pose.time) <=
               std::abs(gt[cursor].time - pose.time)) {
      ++cursor;
    }
    if (std::abs(gt[cursor].time - pose.time) <= max_dt) {
      pairs.push_back({pose, gt[cursor]});
    } else {
      ++miss;
    }
  }
  if (dropped) *dropped = miss;
  if (pairs.empty()) {
    throw Error("associate_by_time: no pose pairs within max_dt");
  }
  return pairs;
}

Pose align_rigid(const std::vector<Vec3>& est_positions,
                 const std::vector<Vec3>& gt_positions) {
  if (est_positions.size() != gt_positions.size() ||
      est_positions.size() < 3) {
    throw Error("align_rigid: need >= 3 position pairs");
  }
  const double n = static_cast<double>(est_positions.size());
  Vec3 est_centroid = Vec3::Zero();
  Vec3 gt_centroid = Vec3::Zero();
  for (std::size_t i = 0; i < est_positions.size(); ++i) {
    est_centroid += est_positions[i];
    gt_centroid += gt_positions[i];
  }
  est_centroid /= n;
  gt_centroid /= n;

  Mat3 cross = Mat3::Zero();
  Mat3 est_scatter = Mat3::Zero();
  Mat3 gt_scatter = Mat3::Zero();
  for (std::size_t i = 0; i < est_positions.size(); ++i) {
    const Vec3 e = est_positions[i] - est_centroid;
    const Vec3 g = gt_positions[i] - gt_centroid;
    cross += g * e.transpose();
    est_scatter += e * e.transpose();
    gt_scatter += g * g.transpose();
  }

  // When both clouds are collinear the problem carries no rotational
  // information at all; a straight ground truth against a noisy estimate is
  // fine (every Kabsch minimizer gives the same residuals).
  const auto plane_rank_deficient = [](const Mat3& scatter) {
    Eigen::SelfAdjointEigenSolver<Mat3> eig(scatter);
    return eig.eigenvalues()(1) <= 1e-12 * std::max(eig.eigenvalues()(2), 1.0);
  };
  if (plane_rank_deficient(est_scatter) && plane_rank_deficient(gt_scatter)) {
    throw Error("align_rigid: degenerate (collinear) configuration");
  }

  Eigen::JacobiSVD<Mat3> svd(cross,
                             Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 correction = Mat3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) {
    correction(2, 2) = -1.0;
  }
  Pose alignment;
  alignment.rotation = svd.matrixU() * correction * svd.matrixV().transpose();
  alignment.translation = gt_centroid - alignment.rotation * est_centroid;
  return alignment;
}

double ate_rmse(const std::vector<PosePair>& pairs, const Pose& alignment) {
  if (pairs.empty()) throw Error("ate_rmse: no pairs");
  double sum_sq = 0.0;
  for (const auto& pair : pairs) {
    sum_sq +=
        (pair.gt.translation - apply(alignment, pair.est.translation))
            .squaredNorm();
  }
  return std::sqrt(sum_sq / static_cast<double>(pairs.size()));
}

RpeResult rpe(const std::vector<PosePair>& pairs, int delta) {
  if (delta < 1) throw Error("rpe: delta must be >= 1");
  if (static_cast<int>(pairs.size()) < delta + 1) {
    throw Error("rpe: need at least delta + 1 pairs");
  }
  RpeResult out;
  double trans_sq = 0.0;
  double rot_sq = 0.0;
  double trans_per_m_sq = 0.0;
  double rot_per_m_sq = 0.0;
  int n_per_m = 0;
  for (std::size_t i = 0; i + delta < pairs.size(); ++i) {
    const Pose gt_motion =
        relative_motion(pairs[i].gt, pairs[i + delta].gt);
    const Pose est_motion =
        relative_motion(pairs[i].est, pairs[i + delta].est);
    const Pose error = relative_motion(gt_motion, est_motion);
    const double trans = error.translation.norm();
    const double rot = rotation_angle(error.rotation);
    trans_sq += trans * trans;
    rot_sq += rot * rot;
    const double span = gt_motion.translation.norm();
    if (span >= 0.01) {
      trans_per_m_sq += (trans / span) * (trans / span);
      rot_per_m_sq += (rot / span) * (rot / span);
      ++n_per_m;
    }
    ++out.n;
  }
  out.trans_rmse = std::sqrt(trans_sq / out.n);
  out.rot_rmse = std::sqrt(rot_sq / out.n);
  if (n_per_m > 0) {
    out.trans_per_meter = std::sqrt(trans_per_m_sq / n_per_m);
    out.rot_per_meter = std::sqrt(rot_per_m_sq / n_per_m);
  }
  return out;
}

std::map<double, double> relative_error_by_length(
    const std::vector<PosePair>& pairs, const std::vector<double>& lengths) {
  std::map<double, double> out;
  for (double length : lengths) {
    if (length <= 0.0) continue;
    const auto spans = span_errors(pairs, length);
    if (spans.empty()) continue;
    double sum = 0.0;
    for (const auto& span : spans) sum += span.rel_error;
    out[length] = sum / static_cast<double>(spans.size());
  }
  return out;
}

std::map<double, double> relative_error_by_speed(
    const std::vector<PosePair>& pairs, const std::vector<double>& lengths,
    double bucket_width) {
  if (bucket_width <= 0.0) {
    throw Error("relative_error_by_speed: bucket_width must be positive");
  }
  std::map<double, std::pair<double, int>> buckets;
  for (double length : lengths) {
    if (length <= 0.0) continue;
    for (const auto& span : span_errors(pairs, length)) {
      const double bucket =
          std::round(span.mean_speed / bucket_width) * bucket_width;
      auto& acc = buckets[bucket];
      acc.first += span.rel_error;
      acc.second += 1;
    }
  }
  std::map<double, double> out;
  for (const auto& [bucket, acc] : buckets) {
    out[bucket] = acc.first / acc.second;
  }
  return out;
}

MetricReport evaluate_trajectories(const Trajectory& est, const Trajectory& gt,
                                   double max_dt, int rpe_delta,
                                   const std::vector<double>& lengths) {
  MetricReport report;
  const auto pairs = associate_by_time(est, gt, max_dt, &report.n_dropped);
  report.n_pairs = static_cast<int>(pairs.size());

  std::vector<Vec3> est_positions(pairs.size());
  std::vector<Vec3> gt_positions(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    est_positions[i] = pairs[i].est.translation;
    gt_positions[i] = pairs[i].gt.translation;
  }
  report.ate = ate_rmse(pairs, align_rigid(est_positions, gt_positions));
  report.rpe = rpe(pairs, rpe_delta);
  report.rel_error_by_length = relative_error_by_length(pairs, lengths);
  report.rel_error_by_speed = relative_error_by_speed(pairs, lengths);
  return report;
}

std::string report_to_text(const MetricReport& report) {
  std::ostringstream out;
  out << "pose pairs:            " << report.n_pairs << " (" << report.n_dropped
      << " unmatched)\n";
  out << "ATE RMSE (aligned):    " << format_double(report.ate) << " m\n";
  out << "RPE trans:             " << format_double(report.rpe.trans_rmse)
      << " m/frame-pair (RMSE over " << report.rpe.n << ")\n";
  out << "RPE rot:               " << format_double(report.rpe.rot_rmse)
      << " rad/frame-pair\n";
  out << "RPE trans per meter:   " << format_double(report.rpe.trans_per_meter)
      << " m/m\n";
  out << "RPE rot per meter:     " << format_double(report.rpe.rot_per_meter)
      << " rad/m\n";
  for (const auto& [length, err] : report.rel_error_by_length) {
    out << "rel. error @ " << format_double(length)
        << " m:     " << format_double(err * 100.0) << " %\n";
  }
  for (const auto& [speed, err] : report.rel_error_by_speed) {
    out << "rel. error @ " << format_double(speed)
        << " m/s:   " << format_double(err * 100.0) << " %\n";
  }
  return out.str();
}

void write_report_csv(const MetricReport& report,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open file for writing: " + path.string());
  out << "metric,key,value\n";
  out << "ate_rmse_m,," << format_double(report.ate) << '\n';
  out << "rpe_trans_m_per_pair,," << format_double(report.rpe.trans_rmse)
      << '\n';
  out << "rpe_rot_rad_per_pair,," << format_double(report.rpe.rot_rmse) << '\n';
  out << "rpe_trans_per_m,," << format_double(report.rpe.trans_per_meter)
      << '\n';
  out << "rpe_rot_per_m,," << format_double(report.rpe.rot_per_meter) << '\n';
  out << "n_pairs,," << report.n_pairs << '\n';
  out << "n_dropped,," << report.n_dropped << '\n';
  for (const auto& [length, err] : report.rel_error_by_length) {
    out << "rel_error_by_length_pct," << format_double(length) << ','
        << format_double(err * 100.0) << '\n';
  }
  for (const auto& [speed, err] : report.rel_error_by_speed) {
    out << "rel_error_by_speed_pct," << format_double(speed) << ','
        << format_double(err * 100.0) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace dro
