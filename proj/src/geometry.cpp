#include "dro/geometry.hpp"

#include <cmath>

namespace dro {

namespace {

constexpr double kSmallAngle = 1e-8;

// Left Jacobian of SO(3): J = I + (1-cos t)/t^2 [phi]x + (t-sin t)/t^3 [phi]x^2
Mat3 so3_left_jacobian(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 hat = skew(phi);
  if (theta < kSmallAngle) {
    return Mat3::Identity() + 0.5 * hat + hat * hat / 6.0;
  }
  const double t2 = theta * theta;
  return Mat3::Identity() + (1.0 - std::cos(theta)) / t2 * hat +
         (theta - std::sin(theta)) / (t2 * theta) * hat * hat;
}

Mat3 so3_left_jacobian_inverse(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 hat = skew(phi);
  if (theta < kSmallAngle) {
    return Mat3::Identity() - 0.5 * hat + hat * hat / 12.0;
  }
  const double t2 = theta * theta;
  const double coeff =
      1.0 / t2 - (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
  return Mat3::Identity() - 0.5 * hat + coeff * hat * hat;
}

}  // namespace

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Mat3 so3_exp(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 hat = skew(phi);
  if (theta < kSmallAngle) {
    return Mat3::Identity() + hat + 0.5 * hat * hat;
  }
  const double t2 = theta * theta;
  return Mat3::Identity() + std::sin(theta) / theta * hat +
         (1.0 - std::cos(theta)) / t2 * hat * hat;
}

Vec3 so3_log(const Mat3& rotation) {
  const double cos_angle =
      std::clamp((rotation.trace() - 1.0) * 0.5, -1.0, 1.0);
  const double angle = std::acos(cos_angle);
  if (angle > M_PI - 1e-6) {
    throw Error("so3_log: rotation angle within 1e-6 of pi, axis ill-conditioned");
  }
  const Vec3 vee(rotation(2, 1) - rotation(1, 2),
                 rotation(0, 2) - rotation(2, 0),
                 rotation(1, 0) - rotation(0, 1));
  if (angle < kSmallAngle) {
    return 0.5 * vee;
  }
  return angle / (2.0 * std::sin(angle)) * vee;
}

double rotation_angle(const Mat3& rotation) {
  return std::acos(std::clamp((rotation.trace() - 1.0) * 0.5, -1.0, 1.0));
}

Mat3 orthonormalized(const Mat3& rotation) {
  Eigen::Quaterniond q(rotation);
  q.normalize();
  return q.toRotationMatrix();
}

bool is_valid_rotation(const Mat3& rotation, double tol) {
  const Mat3 gram = rotation.transpose() * rotation;
  return (gram - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
         std::abs(rotation.determinant() - 1.0) <= tol;
}

Pose se3_exp(const Twist& xi) {
  Pose out;
  out.rotation = so3_exp(xi.phi);
  out.translation = so3_left_jacobian(xi.phi) * xi.rho;
  return out;
}

Twist se3_log(const Pose& pose) {
  Twist xi;
  xi.phi = so3_log(pose.rotation);
  xi.rho = so3_left_jacobian_inverse(xi.phi) * pose.translation;
  return xi;
}

Pose compose(const Pose& a, const Pose& b) {
  Pose out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  out.time = b.time;
  const Mat3 gram = out.rotation.transpose() * out.rotation;
  if ((gram - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-12) {
    out.rotation = orthonormalized(out.rotation);
  }
  return out;
}

Pose inverse(const Pose& pose) {
  Pose out;
  out.rotation = pose.rotation.transpose();
  out.translation = -(out.rotation * pose.translation);
  out.time = pose.time;
  return out;
}

Vec3 apply(const Pose& pose, const Vec3& point) {
  return pose.rotation * point + pose.translation;
}

}  // namespace dro
