#include "dro/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace dro {

namespace {

constexpr double kTransStep = 1e-4;  // m, inner convergence threshold
constexpr double kRotStep = 1e-5;    // rad
constexpr int kMaxHalvings = 5;

// Reciprocal filter used inside register_scan: keep a pair only when its map
// cell prefers this scan cell over every other one. Scan cells whose true
// counterpart is missing from the submap otherwise latch onto a neighboring
// cell with a large residual, and the squared-norm Huber amplifies exactly
// those pairs.
std::vector<Correspondence> mutual_filter(
    const std::vector<Correspondence>& corr) {
  std::unordered_map<int, std::pair<double, std::size_t>> best;
  for (std::size_t i = 0; i < corr.size(); ++i) {
    const double d_sq =
        (corr[i].map_cell.mean - corr[i].scan_cell.mean).squaredNorm();
    const auto it = best.find(corr[i].map_index);
    if (it == best.end() || d_sq < it->second.first) {
      best[corr[i].map_index] = {d_sq, i};
    }
  }
  std::vector<Correspondence> kept;
  kept.reserve(best.size());
  for (std::size_t i = 0; i < corr.size(); ++i) {
    if (best[corr[i].map_index].second == i) kept.push_back(corr[i]);
  }
  return kept;
}

// Range-compensated reflector strength is viewpoint-invariant, so pairs whose
// strengths disagree badly bind different physical structure. Cells without a
// strength reading pass through.
std::vector<Correspondence> rcs_gate(std::vector<Correspondence> corr,
                                     double min_ratio) {
  std::vector<Correspondence> kept;
  kept.reserve(corr.size());
  for (auto& c : corr) {
    const double a = c.scan_cell.rcs;
    const double b = c.map_cell.rcs;
    if (a > 0.0 && b > 0.0 &&
        std::min(a, b) / std::max(a, b) < min_ratio) {
      continue;
    }
    kept.push_back(std::move(c));
  }
  return kept;
}

// Trimmed-ICP style gate: drop the worst pairs by residual, but never a pair
// already inside the inlier band. Cells that exist in only one of the two
// feature sets pair up with each other at cell-spacing distance; under
// L_delta(||e||^2) their gradient is orders of magnitude above the inlier
// pairs', so they must go before the solve. Pairs trimmed while the pose is
// still far re-enter through the next re-association.
std::vector<Correspondence> trim_outliers(std::vector<Correspondence> corr,
                                          double keep_fraction) {
  constexpr double kInlierBandSq = 0.0225;  // (0.15 m)^2
  if (corr.size() < 8) return corr;
  std::vector<double> s(corr.size());
  for (std::size_t i = 0; i < corr.size(); ++i) {
    s[i] = (corr[i].map_cell.mean - corr[i].scan_cell.mean).squaredNorm();
  }
  std::vector<double> sorted = s;
  const std::size_t keep = std::min(
      corr.size() - 1, static_cast<std::size_t>(keep_fraction * corr.size()));
  std::nth_element(sorted.begin(), sorted.begin() + keep, sorted.end());
  const double cutoff = std::max(sorted[keep], kInlierBandSq);
  std::vector<Correspondence> kept;
  kept.reserve(corr.size());
  for (std::size_t i = 0; i < corr.size(); ++i) {
    if (s[i] <= cutoff) kept.push_back(std::move(corr[i]));
  }
  return kept;
}

struct NormalEquations {
  Mat6 h = Mat6::Zero();
  Vec6 g = Vec6::Zero();
};

// use_loss_chain: reweight by L'(||e||^2) per the objective; otherwise plain
// weighted least squares (used for the coarse rounds, where the squared-norm
// loss would concentrate all pull on the worst pairs).
NormalEquations accumulate(const std::vector<Correspondence>& corr,
                           const std::vector<FeatureCell>& scan_cells,
                           const Pose& pose, double huber_delta,
                           bool use_loss_chain) {
  NormalEquations eq;
  for (const auto& c : corr) {
    const Vec3 moved = apply(pose, scan_cells[c.scan_index].mean);
    const Vec3 e = c.map_cell.mean - moved;
    const double phi =
        use_loss_chain
            ? c.weight * huber(e.squaredNorm(), huber_delta).derivative
            : c.weight;
    Mat3x6 jac;
    jac.block<3, 3>(0, 0) = -Mat3::Identity();
    jac.block<3, 3>(0, 3) = skew(moved);
    eq.h.noalias() += phi * jac.transpose() * jac;
    eq.g.noalias() += phi * jac.transpose() * e;
  }
  return eq;
}

double plain_objective(const std::vector<Correspondence>& corr,
                       const std::vector<FeatureCell>& scan_cells,
                       const Pose& pose) {
  double cost = 0.0;
  for (const auto& c : corr) {
    const Vec3 e = c.map_cell.mean - apply(pose, scan_cells[c.scan_index].mean);
    cost += c.weight * e.squaredNorm();
  }
  return cost;
}

}  // namespace

FeatureCell transform_cell(const FeatureCell& cell, const Pose& pose) {
  FeatureCell out = cell;
  out.mean = apply(pose, cell.mean);
  out.normal = (pose.rotation * cell.normal).normalized();
  return out;
}

std::vector<FeatureCell> flatten_cells(const FeatureSet& features) {
  std::vector<FeatureCell> out;
  out.reserve(features.cells.size());
  for (const auto& [key, cell] : features.cells) out.push_back(cell);
  return out;
}

Submap build_submap(const std::vector<Keyframe>& window) {
  if (window.empty()) throw Error("build_submap: empty keyframe window");
  Submap map;
  for (const auto& kf : window) {
    for (const auto& [key, cell] : kf.features.cells) {
      map.cells.push_back(transform_cell(cell, kf.pose));
      map.source_ids.push_back(kf.id);
    }
  }
  return map;
}

std::vector<Correspondence> associate(
    const std::vector<FeatureCell>& scan_cells, const Submap& submap,
    const Pose& estimate, double assoc_radius, double z_thre) {
  if (assoc_radius <= 0.0) throw Error("associate: assoc_radius must be positive");
  std::vector<Correspondence> corr;
  if (submap.cells.empty()) return corr;

  std::vector<Vec3> map_means(submap.cells.size());
  for (std::size_t i = 0; i < submap.cells.size(); ++i) {
    map_means[i] = submap.cells[i].mean;
  }
  const KdTree3 tree(std::move(map_means));

  const double radius_sq = assoc_radius * assoc_radius;
  for (std::size_t i = 0; i < scan_cells.size(); ++i) {
    const FeatureCell moved = transform_cell(scan_cells[i], estimate);
    double d_sq = 0.0;
    const int j = tree.nearest(moved.mean, &d_sq);
    if (j < 0 || d_sq > radius_sq) continue;
    const FeatureCell& map_cell = submap.cells[j];
    if (std::abs(moved.normal.dot(map_cell.normal)) < z_thre) continue;
    corr.push_back({moved, map_cell, pair_weight(moved, map_cell),
                    static_cast<int>(i), j});
  }
  return corr;
}

double pair_weight(const FeatureCell& a, const FeatureCell& b) {
  const double w_vec = std::min(1.0, std::abs(a.normal.dot(b.normal)));
  const double w_con = std::min(a.kappa, b.kappa) / std::max(a.kappa, b.kappa);
  const double w_num =
      static_cast<double>(std::min(a.n_points, b.n_points)) /
      static_cast<double>(std::max(a.n_points, b.n_points));
  return w_vec + w_con + w_num;
}

HuberResult huber(double s, double delta) {
  if (s < 0.0 || delta <= 0.0) throw Error("huber: need s >= 0 and delta > 0");
  if (s <= delta) return {0.5 * s * s, s};
  return {delta * (s - 0.5 * delta), delta};
}

double registration_objective(const std::vector<Correspondence>& corr,
                              const std::vector<FeatureCell>& scan_cells,
                              const Pose& pose, double huber_delta) {
  double cost = 0.0;
  for (const auto& c : corr) {
    const Vec3 e = c.map_cell.mean - apply(pose, scan_cells[c.scan_index].mean);
    cost += c.weight * huber(e.squaredNorm(), huber_delta).loss;
  }
  return cost;
}

Vec6 registration_gradient(const std::vector<Correspondence>& corr,
                           const std::vector<FeatureCell>& scan_cells,
                           const Pose& pose, double huber_delta) {
  Vec6 grad = Vec6::Zero();
  for (const auto& c : corr) {
    const Vec3 moved = apply(pose, scan_cells[c.scan_index].mean);
    const Vec3 e = c.map_cell.mean - moved;
    const double phi = c.weight * huber(e.squaredNorm(), huber_delta).derivative;
    grad.head<3>() += -2.0 * phi * e;
    grad.tail<3>() += -2.0 * phi * moved.cross(e);
  }
  return grad;
}

RegistrationResult register_scan(const FeatureSet& scan_features,
                                 const Submap& submap,
                                 const Pose& initial_guess,
                                 const OdomConfig& config) {
  const auto scan_cells = flatten_cells(scan_features);
  RegistrationResult res;
  res.pose = initial_guess;
  if (scan_cells.empty() || submap.cells.empty()) {
    res.infeasible = true;
    return res;
  }

  Pose current = initial_guess;
  Pose best_pose = initial_guess;
  double best_mass = -1.0;  // total correspondence weight of the best iterate
  double best_mean_cost = std::numeric_limits<double>::infinity();
  double best_cost = 0.0;
  int best_n_corr = 0;
  double prev_mean_cost = std::numeric_limits<double>::infinity();
  int stalled_outers = 0;

  // Uniform yardstick across outer iterations: the strict correspondence set
  // at the pose, its weight mass, and the objective mean.
  const auto evaluate = [&](const Pose& pose) {
    struct Snapshot {
      double mass = 0.0;
      double cost = 0.0;
      double mean_cost = std::numeric_limits<double>::infinity();
      int n = 0;
    } snap;
    const auto corr = trim_outliers(
        mutual_filter(rcs_gate(
            associate(scan_cells, submap, pose, config.assoc_radius,
                      config.z_thre),
            0.5)),
        0.75);
    if (corr.empty()) return snap;
    for (const auto& c : corr) snap.mass += c.weight;
    snap.cost =
        registration_objective(corr, scan_cells, pose, config.huber_delta);
    snap.mean_cost = snap.cost / static_cast<double>(corr.size());
    snap.n = static_cast<int>(corr.size());
    return snap;
  };

  for (int outer = 0; outer < config.max_outer_iters; ++outer) {
    // Coarse to fine: the first rounds keep contested and far pairs (their
    // pull is right on average while the pose is off) and run plain weighted
    // least squares; the endgame runs strict reciprocity, trimming, and the
    // loss chain rule.
    const bool endgame = outer >= 2;
    auto raw = associate(scan_cells, submap, current, config.assoc_radius,
                         config.z_thre);
    if (!endgame && raw.size() < scan_cells.size() / 2) {
      // starved association (bad initial guess): widen the search once
      raw = associate(scan_cells, submap, current, 2.0 * config.assoc_radius,
                      config.z_thre);
    }
    const auto corr =
        endgame
            ? trim_outliers(mutual_filter(rcs_gate(std::move(raw), 0.5)), 0.75)
            : trim_outliers(rcs_gate(std::move(raw), 0.3), 0.95);
    if (corr.empty()) {
      if (outer == 0) {
        res.infeasible = true;
        res.pose = initial_guess;
        return res;
      }
      break;
    }
    res.outer_iters = outer + 1;

    const auto objective = [&](const Pose& pose) {
      return endgame ? registration_objective(corr, scan_cells, pose,
                                              config.huber_delta)
                     : plain_objective(corr, scan_cells, pose);
    };
    double cost = objective(current);
    bool tiny_first_step = false;
    for (int gn = 0; gn < config.max_gn_iters; ++gn) {
      const auto eq = accumulate(corr, scan_cells, current, config.huber_delta,
                                 endgame);
      if (eq.g.norm() < 1e-14) {
        tiny_first_step = gn == 0;
        break;
      }
      Vec6 step = eq.h.ldlt().solve(-eq.g);
      if (!step.allFinite()) break;

      double scale = 1.0;
      Pose candidate = current;
      double candidate_cost = cost;
      bool improved = false;
      for (int halving = 0; halving <= kMaxHalvings; ++halving) {
        const Pose trial =
            compose(se3_exp(Twist::from_vector(scale * step)), current);
        const double trial_cost = objective(trial);
        if (trial_cost <= cost) {
          candidate = trial;
          candidate_cost = trial_cost;
          improved = true;
          break;
        }
        scale *= 0.5;
      }
      if (!improved) break;
      current = candidate;
      cost = candidate_cost;
      const Vec6 applied = scale * step;
      if (applied.head<3>().norm() < kTransStep &&
          applied.tail<3>().norm() < kRotStep) {
        tiny_first_step = gn == 0;
        break;
      }
    }

    const auto snap = evaluate(current);
    // An alignment that binds more weighted correspondences wins; cost breaks
    // near-ties. A wrong cell-to-cell lock shows a deceptively small cost over
    // far fewer pairs.
    const bool better = snap.mass > 1.05 * best_mass ||
                        (snap.mass > 0.95 * best_mass &&
                         snap.mean_cost < best_mean_cost);
    if (better) {
      best_mass = std::max(snap.mass, best_mass);
      best_mean_cost = snap.mean_cost;
      best_pose = current;
      best_cost = snap.cost;
      best_n_corr = snap.n;
    }
    if (snap.mean_cost >= prev_mean_cost - 1e-15) {
      if (++stalled_outers >= 3) {
        res.diverged = true;
        break;
      }
    } else {
      stalled_outers = 0;
    }
    prev_mean_cost = snap.mean_cost;
    if (tiny_first_step && endgame) break;  // association reached a fixed point
  }

  res.pose = best_pose;
  res.pose.time = initial_guess.time;
  res.final_cost = best_cost;
  res.n_correspondences = best_n_corr;
  return res;
}

}  // namespace dro
