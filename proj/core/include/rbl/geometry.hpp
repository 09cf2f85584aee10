#pragma once

#include <Eigen/Dense>

#include "rbl/errors.hpp"

namespace rbl {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec9 = Eigen::Matrix<double, 9, 1>;
using Mat9 = Eigen::Matrix<double, 9, 9>;

/// Columns are landmark positions c_n in meters.
using Conformation = Eigen::Matrix3Xd;

/// Wraps an angle into the canonical range (-pi, pi].
double wrap_angle(double a);

/// Intrinsic Z-Y-X rotation angles in radians: alpha = roll about x,
/// beta = pitch about y, gamma = yaw about z. Stored wrapped to (-pi, pi].
struct EulerAngles {
  double alpha{0.0};
  double beta{0.0};
  double gamma{0.0};

  EulerAngles() = default;
  EulerAngles(double alpha_, double beta_, double gamma_);
  static EulerAngles from_degrees(double alpha_deg, double beta_deg,
                                  double gamma_deg);
};

/// True iff Q'Q = I within `tol` (Frobenius) and |det(Q) - 1| <= tol.
bool is_so3(const Mat3& q, double tol);

/// A validated member of SO(3).
class RotationMatrix {
 public:
  static constexpr double kSo3Tol = 1e-9;

  RotationMatrix() : q_(Mat3::Identity()) {}

  /// Validating factory; throws NotRotation if `q` fails the SO(3) checks.
  static RotationMatrix from_matrix(const Mat3& q, double tol = kSo3Tol);

  /// For matrices that are rotations by construction (no validation).
  static RotationMatrix unchecked(const Mat3& q) { return RotationMatrix(q); }

  static RotationMatrix identity() { return RotationMatrix(); }

  const Mat3& matrix() const { return q_; }
  Vec9 vec() const;  // column-stacking vectorization

 private:
  explicit RotationMatrix(const Mat3& q) : q_(q) {}
  Mat3 q_;
};

struct Pose {
  RotationMatrix rotation;
  Vec3 translation{Vec3::Zero()};
};

/// Z*Y*X elementary-rotation product evaluated in closed form.
RotationMatrix rotation_from_euler(const EulerAngles& angles);

struct EulerResult {
  EulerAngles angles;
  bool gimbal_lock{false};  // |q31| >= 1 - 1e-12; alpha fixed to 0
};

/// Inverse of rotation_from_euler. At gimbal lock (beta = +-pi/2) the
/// decomposition is not unique; the alpha = 0 branch is returned and flagged.
EulerResult euler_from_rotation(const RotationMatrix& q);

/// Column n of the result is Q * c_n + t.
Conformation apply_pose(const Pose& pose, const Conformation& c);

/// c (x) I3, the 9x3 matrix of stacked blocks c_i * I3. Its transpose maps
/// vec(Q) to Q*c; multiplying a coordinate gradient by it lifts the gradient
/// to vec(Q).
Eigen::Matrix<double, 9, 3> kron_landmark(const Vec3& c);

}  // namespace rbl
