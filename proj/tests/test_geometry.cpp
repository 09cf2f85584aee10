#include <doctest.h>

#include "rbl/geometry.hpp"
#include "test_utils.hpp"

using namespace rbl;
using rbl::testing::deg;

namespace {

// Independent oracle: the rotation as the explicit product of the three
// elementary matrices (the implementation uses the expanded closed form).
Mat3 elementary_product(double alpha, double beta, double gamma) {
  Mat3 qz, qy, qx;
  qz << std::cos(gamma), -std::sin(gamma), 0, std::sin(gamma),
      std::cos(gamma), 0, 0, 0, 1;
  qy << std::cos(beta), 0, std::sin(beta), 0, 1, 0, -std::sin(beta), 0,
      std::cos(beta);
  qx << 1, 0, 0, 0, std::cos(alpha), -std::sin(alpha), 0, std::sin(alpha),
      std::cos(alpha);
  return qz * qy * qx;
}

}  // namespace

TEST_CASE("rotation_from_euler basics") {
  CHECK((rotation_from_euler({0, 0, 0}).matrix() - Mat3::Identity()).norm() ==
        doctest::Approx(0.0).epsilon(1e-15));

  Mat3 z90;
  z90 << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  CHECK((rotation_from_euler({0, 0, M_PI / 2}).matrix() - z90).norm() <
        1e-15);
}

TEST_CASE("rotation_from_euler matches the elementary-matrix product") {
  // Frozen high-precision values for (10, 20, 45) degrees.
  Mat3 expected;
  expected << 0.66446302438867470, -0.65436833800790673, 0.36095840125009615,
      0.66446302438867470, 0.73836014263213115, 0.11538279331215046,
      -0.34202014332566873, 0.16317591116653483, 0.92541657839832335;
  const Mat3 q =
      rotation_from_euler(EulerAngles::from_degrees(10, 20, 45)).matrix();
  CHECK((q - expected).norm() < 1e-14);
  CHECK((q - elementary_product(deg(10), deg(20), deg(45))).norm() < 1e-15);

  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-M_PI, M_PI);
  for (int i = 0; i < 500; ++i) {
    const double a = u(rng), b = u(rng) / 2.0, g = u(rng);
    CHECK((rotation_from_euler({a, b, g}).matrix() -
           elementary_product(a, b, g))
              .norm() < 1e-14);
  }
}

TEST_CASE("rotation_from_euler always lands in SO(3)") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-M_PI, M_PI);
  for (int i = 0; i < 2000; ++i) {
    const Mat3 q = rotation_from_euler({u(rng), u(rng), u(rng)}).matrix();
    CHECK(is_so3(q, 1e-12));
  }
}

TEST_CASE("euler round trip") {
  CHECK(euler_from_rotation(RotationMatrix::identity()).angles.alpha == 0.0);
  CHECK(euler_from_rotation(RotationMatrix::identity()).angles.beta == 0.0);
  CHECK(euler_from_rotation(RotationMatrix::identity()).angles.gamma == 0.0);

  const EulerAngles in = EulerAngles::from_degrees(10, 20, 45);
  const EulerResult out = euler_from_rotation(rotation_from_euler(in));
  CHECK(!out.gimbal_lock);
  CHECK(out.angles.alpha == doctest::Approx(in.alpha).epsilon(1e-12));
  CHECK(out.angles.beta == doctest::Approx(in.beta).epsilon(1e-12));
  CHECK(out.angles.gamma == doctest::Approx(in.gamma).epsilon(1e-12));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-M_PI, M_PI);
  for (int i = 0; i < 2000; ++i) {
    // Keep pitch away from the gimbal-lock poles.
    const EulerAngles angles(u(rng), 0.49 * u(rng), u(rng));
    const RotationMatrix q = rotation_from_euler(angles);
    const EulerResult back = euler_from_rotation(q);
    CHECK(!back.gimbal_lock);
    const Mat3 q2 = rotation_from_euler(back.angles).matrix();
    CHECK((q2 - q.matrix()).norm() < 1e-9);
  }
}

TEST_CASE("gimbal lock is flagged with the alpha = 0 branch") {
  const EulerAngles in(deg(25), M_PI / 2, deg(40));
  const EulerResult out = euler_from_rotation(rotation_from_euler(in));
  CHECK(out.gimbal_lock);
  CHECK(out.angles.alpha == 0.0);
  CHECK(out.angles.beta == doctest::Approx(M_PI / 2));
  // q31 = -1 forces beta = +pi/2.
  CHECK(rotation_from_euler(in).matrix()(2, 0) == doctest::Approx(-1.0));
  // The returned branch still reproduces the same rotation matrix.
  CHECK((rotation_from_euler(out.angles).matrix() -
         rotation_from_euler(in).matrix())
            .norm() < 1e-9);

  const EulerResult down =
      euler_from_rotation(rotation_from_euler({deg(25), -M_PI / 2, deg(40)}));
  CHECK(down.gimbal_lock);
  CHECK(down.angles.beta == doctest::Approx(-M_PI / 2));
}

TEST_CASE("apply_pose") {
  Conformation c(3, 2);
  c << 1, 0, 0, 2, 0, -1;
  Pose identity;
  CHECK((apply_pose(identity, c) - c).norm() == 0.0);

  Pose z90{rotation_from_euler({0, 0, M_PI / 2}), Vec3::Zero()};
  Conformation single(3, 1);
  single << 1, 0, 0;
  const Conformation moved = apply_pose(z90, single);
  CHECK(moved.col(0).isApprox(Vec3(0, 1, 0), 1e-12));
}

TEST_CASE("apply_pose on the demo cube matches the frozen oracle") {
  Conformation c1(3, 8);
  c1 << -0.5, 0.5, 0.5, -0.5, -0.5, 0.5, -0.5, 0.5,
        -0.5, -0.5, 0.5, 0.5, -0.5, -0.5, 0.5, 0.5,
        -0.5, -0.5, -0.5, -0.5, 0.5, 0.5, 0.5, 0.5;
  Pose pose{rotation_from_euler(EulerAngles::from_degrees(10, 20, 45)),
            Vec3(-3, 0.5, 7)};
  Conformation expected(3, 8);
  expected << -3.1855265438154321, -2.5210635194267574, -3.1754318574346641,
      -3.8398948818233388, -2.8245681425653359, -2.1601051181766612,
      -3.4789364805732426, -2.8144734561845679,
      -0.25910298016647815, 0.40536004422219654, 1.1437201868543277,
      0.479257162465653, -0.1437201868543277, 0.520742837534347,
      0.59463995577780346, 1.2591029801664782,
      6.6267138268804053, 6.2846936835547365, 6.4478695947212714,
      6.7898897380469401, 7.5521304052787286, 7.2101102619530599,
      7.7153063164452635, 7.3732861731195947;
  CHECK((apply_pose(pose, c1) - expected).norm() < 1e-13);
}

TEST_CASE("apply_pose preserves inter-landmark distances") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    Conformation c(3, 6);
    for (int j = 0; j < 6; ++j) c.col(j) = testing::random_box(rng, 5.0);
    Pose pose{testing::random_rotation(rng), testing::random_box(rng, 10.0)};
    const Conformation moved = apply_pose(pose, c);
    for (int i = 0; i < 6; ++i) {
      for (int j = i + 1; j < 6; ++j) {
        const double before = (c.col(i) - c.col(j)).norm();
        const double after = (moved.col(i) - moved.col(j)).norm();
        CHECK(std::abs(after - before) <= 1e-12 * std::max(1.0, before));
      }
    }
  }
}

TEST_CASE("is_so3") {
  CHECK(is_so3(Mat3::Identity(), 1e-9));
  Mat3 reflection = Mat3::Identity();
  reflection(2, 2) = -1.0;
  CHECK(!is_so3(reflection, 1e-9));
  CHECK(is_so3(rotation_from_euler(EulerAngles::from_degrees(10, 20, 45))
                   .matrix(),
               1e-9));
  CHECK(!is_so3(2.0 * Mat3::Identity(), 1e-9));
}

TEST_CASE("RotationMatrix::from_matrix validates") {
  CHECK_THROWS_AS(RotationMatrix::from_matrix(2.0 * Mat3::Identity()), Error);
  try {
    RotationMatrix::from_matrix(2.0 * Mat3::Identity());
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotRotation);
  }
}

TEST_CASE("kron_landmark block structure") {
  const auto k1 = kron_landmark(Vec3(1, 0, 0));
  CHECK((k1.block<3, 3>(0, 0) - Mat3::Identity()).norm() == 0.0);
  CHECK(k1.block<6, 3>(3, 0).norm() == 0.0);

  const auto k3 = kron_landmark(Vec3(0, 0, 1));
  CHECK((k3.block<3, 3>(6, 0) - Mat3::Identity()).norm() == 0.0);
  CHECK(k3.block<6, 3>(0, 0).norm() == 0.0);

  const auto k = kron_landmark(Vec3(2, -1, 3));
  CHECK((k.block<3, 3>(0, 0) - 2.0 * Mat3::Identity()).norm() == 0.0);
  CHECK((k.block<3, 3>(3, 0) + Mat3::Identity()).norm() == 0.0);
  CHECK((k.block<3, 3>(6, 0) - 3.0 * Mat3::Identity()).norm() == 0.0);
}

TEST_CASE("kron_landmark vectorization identity") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    const Vec3 c = testing::random_box(rng, 3.0);
    const RotationMatrix q = testing::random_rotation(rng);
    const Vec3 via_kron = kron_landmark(c).transpose() * q.vec();
    CHECK((via_kron - q.matrix() * c).norm() < 1e-14);
  }
}

TEST_CASE("wrap_angle canonical range") {
  CHECK(wrap_angle(M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_angle(-M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_angle(3 * M_PI / 2) == doctest::Approx(-M_PI / 2));
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 1000; ++i) {
    const double w = wrap_angle(u(rng));
    CHECK(w > -M_PI);
    CHECK(w <= M_PI);
  }
}
