#pragma once

#include "rbl/fim.hpp"

namespace rbl {

/// Scalar bounds and conditioning diagnostics for one scenario evaluation.
/// crlb_t is in m^2 per coordinate; the rotation bounds are dimensionless.
struct BoundReport {
  double crlb_t{0.0};
  double crlb_t_approx{0.0};
  double crlb_q{0.0};
  double crlb_q_approx{0.0};
  double ccrb_q{0.0};
  double cond_ft{0.0};
  double cond_fq{0.0};
  bool pseudo_inverse_used{false};
  bool rank_deficient{false};
};

/// tr(F^-1) / 3. Throws SingularFimError (with the null-space basis) when
/// the FIM is rank deficient or its condition number reaches 1e12.
double crlb_translation(const FisherMatrix& f_t);

/// Inversion-free estimate 3 / tr(F). Throws ZeroTrace when tr(F) <= 0.
/// Lies at or below the exact bound (arithmetic-harmonic mean ordering).
double crlb_translation_approx(const FisherMatrix& f_t);

struct RotationCrlb {
  double value{0.0};
  double condition{0.0};
  int rank{0};
  bool pseudo_inverse_used{false};
  bool rank_deficient{false};
};

/// tr(F^-1) / 9 for the 9x9 rotation FIM. Falls back to the pseudo-inverse
/// (flagged) when 3 <= rank < 9; throws SingularFimError when rank < 3.
RotationCrlb crlb_rotation(const FisherMatrix& f_q);

/// Inversion-free estimate 9 / tr(F).
double crlb_rotation_approx(const FisherMatrix& f_q);

/// Orthonormality residual h(Q): zero iff the columns of Q are orthonormal.
Eigen::Matrix<double, 6, 1> constraint_vector(const Mat3& q);

/// Constraining matrix M with G(Q) M = 0 and M'M = 2 I3, where G is the
/// Jacobian of constraint_vector. Throws NotRotation for invalid input.
Eigen::Matrix<double, 9, 3> constraint_matrix(const Mat3& q);

struct ConstrainedCrlb {
  Mat9 matrix;
  double average{0.0};  // trace / 9, comparable with crlb_rotation
};

/// Constrained rotation bound M (M' F M)^-1 M'. Throws SingularProjectedFim
/// when the projected 3x3 FIM carries no information.
ConstrainedCrlb constrained_crlb_rotation(const FisherMatrix& f_q,
                                          const Mat3& q);

/// Full report for one scenario: translation + rotation bounds with
/// condition numbers and fallback flags.
BoundReport evaluate_bounds(const FisherMatrix& f_t, const FisherMatrix& f_q,
                            const Mat3& q);

}  // namespace rbl
