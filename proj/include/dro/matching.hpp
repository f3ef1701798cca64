#pragma once

#include "dro/features.hpp"
#include "dro/geometry.hpp"
#include "dro/io.hpp"

#include <vector>

namespace dro {

struct Keyframe {
  Pose pose;            // world frame
  FeatureSet features;  // body frame
  int id = 0;
};

struct Submap {
  std::vector<FeatureCell> cells;  // world frame, union over the window
  std::vector<int> source_ids;     // keyframe id per cell
};

struct Correspondence {
  FeatureCell scan_cell;  // transformed by the estimate at association time
  FeatureCell map_cell;
  double weight = 0.0;  // in (0, 3]
  int scan_index = -1;  // index into the flattened body-frame scan cells
  int map_index = -1;   // index into Submap::cells
};

/// Rigid transform of a cell; the normal is renormalized after rotation,
/// eigenvalues / kappa / counts are frame-invariant.
FeatureCell transform_cell(const FeatureCell& cell, const Pose& pose);

/// Cells in voxel-key order; the indexing used by Correspondence::scan_index.
std::vector<FeatureCell> flatten_cells(const FeatureSet& features);

Submap build_submap(const std::vector<Keyframe>& window);

/// Each scan cell, moved by `estimate`, matches its nearest submap cell within
/// assoc_radius; pairs with |n.n'| < z_thre are discarded (absolute value:
/// normal signs are eigenvector artifacts). Returns the empty set as the
/// registration-infeasible signal.
std::vector<Correspondence> associate(
    const std::vector<FeatureCell>& scan_cells, const Submap& submap,
    const Pose& estimate, double assoc_radius, double z_thre);

/// w = |n.n'| + min(k,k')/max(k,k') + min(N,N')/max(N,N'), in (0, 3].
double pair_weight(const FeatureCell& a, const FeatureCell& b);

struct HuberResult {
  double loss = 0.0;
  double derivative = 0.0;
};

/// Huber applied to the squared residual norm s = ||e||^2:
///   L = s^2/2 for s <= delta, L = delta * (s - delta/2) above; C1 at the knee.
HuberResult huber(double s, double delta);

/// Objective sum w_i L_delta(||p_map - T p_scan||^2) over a frozen
/// correspondence set, and its gradient with respect to a left-multiplied
/// twist at T. Exposed for the finite-difference check.
double registration_objective(const std::vector<Correspondence>& corr,
                              const std::vector<FeatureCell>& scan_cells,
                              const Pose& pose, double huber_delta);
Vec6 registration_gradient(const std::vector<Correspondence>& corr,
                           const std::vector<FeatureCell>& scan_cells,
                           const Pose& pose, double huber_delta);

struct RegistrationResult {
  Pose pose;
  double final_cost = 0.0;
  int n_correspondences = 0;
  int outer_iters = 0;
  bool infeasible = false;  // no correspondences at the initial guess
  bool diverged = false;    // objective refused to decrease; best-so-far pose
};

/// Scan-to-map registration: re-associate in the outer loop, damped
/// Gauss-Newton (left-multiplied exp increments, reweighted by w_i L') in the
/// inner loop. Returns the best iterate by mean correspondence cost.
RegistrationResult register_scan(const FeatureSet& scan_features,
                                 const Submap& submap,
                                 const Pose& initial_guess,
                                 const OdomConfig& config);

}  // namespace dro
