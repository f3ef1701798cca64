#pragma once

#include "dro/geometry.hpp"
#include "dro/io.hpp"
#include "dro/kdtree.hpp"

#include <compare>
#include <map>
#include <span>
#include <vector>

namespace dro {

struct VoxelKey {
  int ix = 0;
  int iy = 0;
  int iz = 0;
  auto operator<=>(const VoxelKey&) const = default;
};

struct FeatureCell {
  Vec3 mean = Vec3::Zero();         // feature point (weighted mean, or the
                                    // promoted max-intensity point)
  Vec3 normal = Vec3::UnitZ();      // unit, sign: largest component positive
  Vec3 eigenvalues = Vec3::Zero();  // descending
  double kappa = 1.0;               // lambda1 / lambda3
  int n_points = 0;                 // |P_i| of the gathered neighborhood
  double max_intensity = 0.0;
  double rcs = 0.0;  // peak intensity compensated to a 10 m reference range;
                     // viewpoint-invariant reflector strength
  bool is_intensity_peak = false;
};

struct FeatureSet {
  std::map<VoxelKey, FeatureCell> cells;
  double timestamp = 0.0;
};

VoxelKey voxel_key_of(const Vec3& p, double voxel_size);
Vec3 voxel_center(const VoxelKey& key, double voxel_size);

/// Floor-division partition; empty voxels absent.
std::map<VoxelKey, std::vector<int>> voxelize(std::span<const Vec3> points,
                                              double voxel_size);

/// All point indices within `radius` of the voxel center (inclusive).
std::vector<int> gather_neighbors(const VoxelKey& voxel, double voxel_size,
                                  const KdTree3& tree, double radius);

struct WeightedMoments {
  Vec3 mean = Vec3::Zero();
  Mat3 cov = Mat3::Zero();
};

/// Intensity-weighted mean and reliability-weighted unbiased covariance:
///   w_i = intensity_i / sum intensity,
///   cov = sum w_i (p_i - mean)(p_i - mean)^T / (1 - sum w_i^2).
/// Falls back to uniform weights when intensities are all zero or one weight
/// dominates to the point of a vanishing denominator.
WeightedMoments weighted_moments(std::span<const Vec3> points,
                                 std::span<const double> intensities);

struct PcaResult {
  Vec3 normal = Vec3::UnitZ();
  Vec3 eigenvalues = Vec3::Zero();  // descending
  Mat3 eigenvectors = Mat3::Identity();  // columns, same order
  double kappa = 1.0;
};

/// Eigen-decomposition of a symmetric PSD matrix; the normal is the
/// eigenvector of the smallest eigenvalue, kappa = lambda1 / max(lambda3, 1e-12).
PcaResult pca_normal(const Mat3& cov);

/// Region-wise features of a (dynamic-removed) scan. Voxels whose gathered
/// neighborhood is smaller than min_neighbors are skipped; zero surviving
/// cells is an error.
FeatureSet extract_features(const RadarScan& scan, const OdomConfig& config);

/// Nearest-rank percentile of intensity pooled over the given scans; used to
/// resolve `w_thre = auto` from the head of a sequence.
double auto_intensity_threshold(std::span<const RadarScan> scans,
                                double percentile = 0.99);

}  // namespace dro
