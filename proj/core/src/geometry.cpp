#include "rbl/geometry.hpp"

#include <cmath>

namespace rbl {

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * M_PI);  // [-pi, pi]
  if (a <= -M_PI) a = M_PI;
  return a;
}

EulerAngles::EulerAngles(double alpha_, double beta_, double gamma_)
    : alpha(wrap_angle(alpha_)), beta(wrap_angle(beta_)),
      gamma(wrap_angle(gamma_)) {}

EulerAngles EulerAngles::from_degrees(double alpha_deg, double beta_deg,
                                      double gamma_deg) {
  constexpr double kDeg = M_PI / 180.0;
  return EulerAngles(alpha_deg * kDeg, beta_deg * kDeg, gamma_deg * kDeg);
}

bool is_so3(const Mat3& q, double tol) {
  if (!q.allFinite()) return false;
  const double orth = (q.transpose() * q - Mat3::Identity()).norm();
  const double det = q.determinant();
  return orth <= tol && std::abs(det - 1.0) <= tol;
}

RotationMatrix RotationMatrix::from_matrix(const Mat3& q, double tol) {
  if (!is_so3(q, tol)) {
    throw Error(ErrorCode::NotRotation,
                "matrix fails SO(3) checks (orthogonality/determinant)");
  }
  return RotationMatrix(q);
}

Vec9 RotationMatrix::vec() const {
  return Eigen::Map<const Vec9>(q_.data());  // column-major storage
}

RotationMatrix rotation_from_euler(const EulerAngles& angles) {
  const double ca = std::cos(angles.alpha), sa = std::sin(angles.alpha);
  const double cb = std::cos(angles.beta), sb = std::sin(angles.beta);
  const double cg = std::cos(angles.gamma), sg = std::sin(angles.gamma);
  Mat3 q;
  q << cb * cg, sa * sb * cg - ca * sg, ca * sb * cg + sa * sg,
       cb * sg, sa * sb * sg + ca * cg, ca * sb * sg - sa * cg,
       -sb,     sa * cb,                ca * cb;
  return RotationMatrix::unchecked(q);
}

EulerResult euler_from_rotation(const RotationMatrix& rot) {
  const Mat3& q = rot.matrix();
  EulerResult out;
  const double s_beta = -q(2, 0);
  if (std::abs(s_beta) >= 1.0 - 1e-12) {
    // beta = +-pi/2: alpha and gamma are coupled; fix alpha = 0.
    out.gimbal_lock = true;
    const double beta = std::copysign(M_PI / 2.0, s_beta);
    // With alpha = 0: q12 = -sin(gamma), q13 = sign(beta) * cos(gamma).
    const double gamma =
        std::atan2(-q(0, 1), s_beta > 0 ? q(0, 2) : -q(0, 2));
    out.angles = EulerAngles(0.0, beta, gamma);
    return out;
  }
  const double beta = std::asin(s_beta);
  const double alpha = std::atan2(q(2, 1), q(2, 2));
  const double gamma = std::atan2(q(1, 0), q(0, 0));
  out.angles = EulerAngles(alpha, beta, gamma);
  return out;
}

Conformation apply_pose(const Pose& pose, const Conformation& c) {
  return (pose.rotation.matrix() * c).colwise() + pose.translation;
}

Eigen::Matrix<double, 9, 3> kron_landmark(const Vec3& c) {
  Eigen::Matrix<double, 9, 3> k = Eigen::Matrix<double, 9, 3>::Zero();
  for (int i = 0; i < 3; ++i) {
    k.block<3, 3>(3 * i, 0) = c(i) * Mat3::Identity();
  }
  return k;
}

}  // namespace rbl
