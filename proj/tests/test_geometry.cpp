#include "dro/geometry.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace dro;

namespace {

Mat3 rot_z(double angle) { return so3_exp(Vec3(0.0, 0.0, angle)); }

Pose make_pose(const Mat3& rotation, const Vec3& translation) {
  Pose p;
  p.rotation = rotation;
  p.translation = translation;
  return p;
}

}  // namespace

TEST_CASE("compose: identity and inverse") {
  const Pose t = make_pose(rot_z(0.73), Vec3(1.5, -2.0, 0.25));
  const Pose left = compose(Pose{}, t);
  CHECK((left.rotation - t.rotation).norm() == doctest::Approx(0.0));
  CHECK((left.translation - t.translation).norm() == doctest::Approx(0.0));

  const Pose round = compose(t, inverse(t));
  CHECK((round.rotation - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(round.translation.norm() < 1e-12);
}

TEST_CASE("compose: two quarter turns with offsets") {
  const Pose quarter = make_pose(rot_z(M_PI / 2.0), Vec3(1.0, 0.0, 0.0));
  const Pose result = compose(quarter, quarter);
  CHECK((result.rotation - rot_z(M_PI)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((result.translation - Vec3(1.0, 1.0, 0.0)).norm() < 1e-12);
}

TEST_CASE("apply") {
  CHECK((apply(Pose{}, Vec3(1, 2, 3)) - Vec3(1, 2, 3)).norm() == 0.0);

  const Pose quarter = make_pose(rot_z(M_PI / 2.0), Vec3::Zero());
  CHECK((apply(quarter, Vec3(1, 0, 0)) - Vec3(0, 1, 0)).norm() < 1e-12);

  const Pose lifted = make_pose(rot_z(M_PI / 2.0), Vec3(0, 0, 5));
  CHECK((apply(lifted, Vec3(1, 1, 0)) - Vec3(-1, 1, 5)).norm() < 1e-12);
}

TEST_CASE("exp/log: identity and pure rotation") {
  const Pose id = se3_exp(Twist{});
  CHECK((id.rotation - Mat3::Identity()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(id.translation.norm() == 0.0);

  const Pose quarter = se3_exp(Twist{Vec3::Zero(), Vec3(0, 0, M_PI / 2.0)});
  CHECK((quarter.rotation - rot_z(M_PI / 2.0)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(quarter.translation.norm() < 1e-15);
}

TEST_CASE("exp/log round trip at 0.3 rad") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Vec3 axis(unit(rng), unit(rng), unit(rng));
  axis.normalize();
  const Twist xi{Vec3(0.4, -1.2, 2.0), 0.3 * axis};
  const Twist back = se3_log(se3_exp(xi));
  CHECK((back.rho - xi.rho).norm() < 1e-9);
  CHECK((back.phi - xi.phi).norm() < 1e-9);
}

TEST_CASE("exp/log round trip over random twists, angle in (0, 3)") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> angle_dist(1e-6, 3.0);
  for (int i = 0; i < 1000; ++i) {
    Vec3 axis(unit(rng), unit(rng), unit(rng));
    if (axis.norm() < 1e-6) axis = Vec3::UnitX();
    axis.normalize();
    const Twist xi{Vec3(unit(rng), unit(rng), unit(rng)) * 5.0,
                   angle_dist(rng) * axis};
    const Pose pose = se3_exp(xi);
    CHECK(is_valid_rotation(pose.rotation));
    const Twist back = se3_log(pose);
    CHECK((back.rho - xi.rho).norm() < 1e-9);
    CHECK((back.phi - xi.phi).norm() < 1e-9);
  }
}

TEST_CASE("log near pi is rejected") {
  const Mat3 nearly_pi = rot_z(M_PI - 1e-9);
  CHECK_THROWS_AS(so3_log(nearly_pi), Error);
}

TEST_CASE("compose is compatible with apply") {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    Vec3 axis_a(unit(rng), unit(rng), unit(rng));
    Vec3 axis_b(unit(rng), unit(rng), unit(rng));
    if (axis_a.norm() < 1e-6) axis_a = Vec3::UnitX();
    if (axis_b.norm() < 1e-6) axis_b = Vec3::UnitY();
    const Pose a = se3_exp(Twist{Vec3(unit(rng), unit(rng), unit(rng)),
                                 axis_a.normalized() * 1.1});
    const Pose b = se3_exp(Twist{Vec3(unit(rng), unit(rng), unit(rng)),
                                 axis_b.normalized() * 0.7});
    const Vec3 p(unit(rng), unit(rng), unit(rng));
    const Vec3 lhs = apply(compose(a, b), p);
    const Vec3 rhs = apply(a, apply(b, p));
    CHECK((lhs - rhs).norm() < 1e-10);
  }
}

TEST_CASE("small-angle branches agree with the generic path") {
  const Vec3 tiny(3e-9, -2e-9, 1e-9);
  const Mat3 r = so3_exp(tiny);
  CHECK(is_valid_rotation(r));
  CHECK((so3_log(r) - tiny).norm() < 1e-15);

  const Twist xi{Vec3(1.0, 2.0, 3.0), tiny};
  const Twist back = se3_log(se3_exp(xi));
  CHECK((back.rho - xi.rho).norm() < 1e-12);
}

TEST_CASE("orthonormalized repairs drift") {
  Mat3 drifted = rot_z(0.4);
  drifted(0, 0) += 1e-7;
  const Mat3 fixed = orthonormalized(drifted);
  CHECK(is_valid_rotation(fixed));
  CHECK((fixed - rot_z(0.4)).cwiseAbs().maxCoeff() < 1e-6);
}
