#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

namespace dro {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat3x6 = Eigen::Matrix<double, 3, 6>;

/// Base error type for everything this library signals.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// se(3) tangent element: translational part first, rotational part second.
struct Twist {
  Vec3 rho = Vec3::Zero();  // meters
  Vec3 phi = Vec3::Zero();  // axis-angle, radians

  Vec6 vector() const {
    Vec6 v;
    v << rho, phi;
    return v;
  }
  static Twist from_vector(const Vec6& v) { return {v.head<3>(), v.tail<3>()}; }
};

/// Rigid transform in SE(3). Rotation is kept orthonormal (det +1); compose()
/// re-orthonormalizes when accumulated drift exceeds 1e-12.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  double time = 0.0;  // seconds; meaningful only for stamped poses
};

using Trajectory = std::vector<Pose>;

Mat3 skew(const Vec3& v);

Mat3 so3_exp(const Vec3& phi);
/// Throws Error when the rotation angle is within 1e-6 of pi (axis extraction
/// is ill-conditioned there).
Vec3 so3_log(const Mat3& rotation);

double rotation_angle(const Mat3& rotation);

/// Nearest orthonormal matrix with det +1.
Mat3 orthonormalized(const Mat3& rotation);

Pose se3_exp(const Twist& xi);
Twist se3_log(const Pose& pose);

Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& pose);
Vec3 apply(const Pose& pose, const Vec3& point);

bool is_valid_rotation(const Mat3& rotation, double tol = 1e-9);

}  // namespace dro
