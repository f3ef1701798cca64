#include "dro/features.hpp"

#include <algorithm>
#include <cmath>

namespace dro {

VoxelKey voxel_key_of(const Vec3& p, double voxel_size) {
  return {static_cast<int>(std::floor(p.x() / voxel_size)),
          static_cast<int>(std::floor(p.y() / voxel_size)),
          static_cast<int>(std::floor(p.z() / voxel_size))};
}

Vec3 voxel_center(const VoxelKey& key, double voxel_size) {
  return {(key.ix + 0.5) * voxel_size, (key.iy + 0.5) * voxel_size,
          (key.iz + 0.5) * voxel_size};
}

std::map<VoxelKey, std::vector<int>> voxelize(std::span<const Vec3> points,
                                              double voxel_size) {
  if (voxel_size <= 0.0) throw Error("voxelize: voxel_size must be positive");
  std::map<VoxelKey, std::vector<int>> buckets;
  for (std::size_t i = 0; i < points.size(); ++i) {
    buckets[voxel_key_of(points[i], voxel_size)].push_back(
        static_cast<int>(i));
  }
  return buckets;
}

std::vector<int> gather_neighbors(const VoxelKey& voxel, double voxel_size,
                                  const KdTree3& tree, double radius) {
  return tree.radius_search(voxel_center(voxel, voxel_size), radius);
}

WeightedMoments weighted_moments(std::span<const Vec3> points,
                                 std::span<const double> intensities) {
  if (points.empty() || points.size() != intensities.size()) {
    throw Error("weighted_moments: empty or mismatched inputs");
  }
  const std::size_t n = points.size();
  double total = 0.0;
  for (double w : intensities) total += w;

  std::vector<double> weights(n);
  if (total <= 0.0) {
    std::fill(weights.begin(), weights.end(), 1.0 / static_cast<double>(n));
  } else {
    for (std::size_t i = 0; i < n; ++i) weights[i] = intensities[i] / total;
  }

  double sum_w_sq = 0.0;
  for (double w : weights) sum_w_sq += w * w;
  if (1.0 - sum_w_sq < 1e-12) {
    // One weight swallows the neighborhood; covariance would be 0/0.
    std::fill(weights.begin(), weights.end(), 1.0 / static_cast<double>(n));
    sum_w_sq = 1.0 / static_cast<double>(n);
  }

  WeightedMoments out;
  for (std::size_t i = 0; i < n; ++i) out.mean += weights[i] * points[i];
  Mat3 scatter = Mat3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 d = points[i] - out.mean;
    scatter += weights[i] * (d * d.transpose());
  }
  out.cov = scatter / (1.0 - sum_w_sq);
  out.cov = 0.5 * (out.cov + out.cov.transpose().eval());
  return out;
}

PcaResult pca_normal(const Mat3& cov) {
  Eigen::SelfAdjointEigenSolver<Mat3> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw Error("pca_normal: eigen decomposition failed");
  }
  // Eigen returns eigenvalues ascending.
  PcaResult out;
  out.eigenvalues = Vec3(solver.eigenvalues()(2), solver.eigenvalues()(1),
                         solver.eigenvalues()(0));
  out.eigenvectors.col(0) = solver.eigenvectors().col(2);
  out.eigenvectors.col(1) = solver.eigenvectors().col(1);
  out.eigenvectors.col(2) = solver.eigenvectors().col(0);
  Vec3 normal = solver.eigenvectors().col(0);
  int largest = 0;
  normal.cwiseAbs().maxCoeff(&largest);
  if (normal[largest] < 0.0) normal = -normal;
  out.normal = normal.normalized();
  out.kappa = out.eigenvalues(0) / std::max(out.eigenvalues(2), 1e-12);
  return out;
}

FeatureSet extract_features(const RadarScan& scan, const OdomConfig& config) {
  if (scan.points.empty()) throw Error("extract_features: empty scan");
  if (config.w_thre_auto) {
    throw Error("extract_features: w_thre must be resolved before use");
  }

  std::vector<Vec3> positions(scan.points.size());
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    positions[i] = scan.points[i].position;
  }
  const KdTree3 tree(positions);
  const auto buckets = voxelize(positions, config.voxel_size);
  const double radius = config.voxel_size;  // neighborhood radius default

  FeatureSet set;
  set.timestamp = scan.timestamp;
  for (const auto& [key, indices] : buckets) {
    const auto neighborhood =
        gather_neighbors(key, config.voxel_size, tree, radius);
    if (static_cast<int>(neighborhood.size()) < config.min_neighbors) continue;

    std::vector<Vec3> pts;
    std::vector<double> weights;
    pts.reserve(neighborhood.size());
    weights.reserve(neighborhood.size());
    int peak_index = neighborhood.front();
    double peak_intensity = -1.0;
    for (int idx : neighborhood) {
      pts.push_back(scan.points[idx].position);
      weights.push_back(scan.points[idx].intensity);
      if (scan.points[idx].intensity > peak_intensity) {
        peak_intensity = scan.points[idx].intensity;
        peak_index = idx;
      }
    }

    const auto moments = weighted_moments(pts, weights);
    const auto pca = pca_normal(moments.cov);

    FeatureCell cell;
    cell.mean = moments.mean;
    cell.normal = pca.normal;
    cell.eigenvalues = pca.eigenvalues;
    cell.kappa = pca.kappa;
    cell.n_points = static_cast<int>(neighborhood.size());
    cell.max_intensity = peak_intensity;
    const double peak_range = scan.points[peak_index].position.norm();
    cell.rcs = peak_intensity * (peak_range / 10.0) * (peak_range / 10.0);
    if (peak_intensity > config.w_thre) {
      cell.mean = scan.points[peak_index].position;
      cell.is_intensity_peak = true;
    }
    set.cells.emplace(key, cell);
  }
  if (set.cells.empty()) {
    throw Error("extract_features: no voxel met the neighbor minimum");
  }
  return set;
}

double auto_intensity_threshold(std::span<const RadarScan> scans,
                                double percentile) {
  std::vector<double> pooled;
  for (const auto& scan : scans) {
    for (const auto& p : scan.points) pooled.push_back(p.intensity);
  }
  if (pooled.empty()) throw Error("auto_intensity_threshold: no points");
  std::sort(pooled.begin(), pooled.end());
  const auto n = pooled.size();
  const std::size_t rank = static_cast<std::size_t>(
      std::clamp(std::ceil(percentile * static_cast<double>(n)), 1.0,
                 static_cast<double>(n)));
  return pooled[rank - 1];
}

}  // namespace dro
