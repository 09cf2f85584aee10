#include "rbl/bounds.hpp"

#include <cmath>
#include <limits>

namespace rbl {

namespace {

constexpr double kMaxCondition = 1e12;
constexpr double kRankTol = 1e-12;  // relative eigenvalue cutoff

struct EigenSplit {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;
  int rank{0};
  double cutoff{0.0};
};

EigenSplit eigen_split(const Eigen::MatrixXd& f) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(f);
  EigenSplit split;
  split.values = eig.eigenvalues();
  split.vectors = eig.eigenvectors();
  const double lmax = split.values.maxCoeff();
  split.cutoff = std::max(lmax, 0.0) * kRankTol;
  for (int i = 0; i < split.values.size(); ++i) {
    if (split.values(i) > split.cutoff) ++split.rank;
  }
  return split;
}

Eigen::MatrixXd null_space_of(const EigenSplit& split) {
  const int null_dim = static_cast<int>(split.values.size()) - split.rank;
  return split.vectors.leftCols(null_dim);
}

}  // namespace

double crlb_translation(const FisherMatrix& f_t) {
  if (f_t.dim() != 3) {
    throw Error(ErrorCode::InvalidParameter, "translation FIM must be 3x3");
  }
  const EigenSplit split = eigen_split(f_t.matrix);
  const double lmax = split.values(2);
  const double lmin = split.values(0);
  if (split.rank < 3 || !(lmin > 0.0) || lmax / lmin >= kMaxCondition) {
    throw SingularFimError(
        "translation FIM is singular or ill-conditioned; unobservable "
        "directions attached",
        null_space_of(split));
  }
  return split.values.cwiseInverse().sum() / 3.0;
}

double crlb_translation_approx(const FisherMatrix& f_t) {
  const double trace = f_t.matrix.trace();
  if (!(trace > 0.0)) {
    throw Error(ErrorCode::ZeroTrace, "translation FIM has nonpositive trace");
  }
  return 3.0 / trace;
}

RotationCrlb crlb_rotation(const FisherMatrix& f_q) {
  if (f_q.dim() != 9) {
    throw Error(ErrorCode::InvalidParameter, "rotation FIM must be 9x9");
  }
  const EigenSplit split = eigen_split(f_q.matrix);
  if (split.rank < 3) {
    throw SingularFimError("rotation FIM has rank below 3",
                           null_space_of(split));
  }
  RotationCrlb out;
  out.rank = split.rank;
  double inv_trace = 0.0;
  double lmin_kept = 0.0;
  for (int i = 0; i < 9; ++i) {
    if (split.values(i) > split.cutoff) {
      if (lmin_kept == 0.0) lmin_kept = split.values(i);
      inv_trace += 1.0 / split.values(i);
    }
  }
  out.condition = split.values(8) / lmin_kept;
  out.value = inv_trace / 9.0;
  if (split.rank < 9) {
    out.pseudo_inverse_used = true;
    out.rank_deficient = true;
  }
  return out;
}

double crlb_rotation_approx(const FisherMatrix& f_q) {
  const double trace = f_q.matrix.trace();
  if (!(trace > 0.0)) {
    throw Error(ErrorCode::ZeroTrace, "rotation FIM has nonpositive trace");
  }
  return 9.0 / trace;
}

Eigen::Matrix<double, 6, 1> constraint_vector(const Mat3& q) {
  const Vec3 q1 = q.col(0), q2 = q.col(1), q3 = q.col(2);
  Eigen::Matrix<double, 6, 1> h;
  h << q1.squaredNorm() - 1.0, q2.dot(q1), q3.dot(q1),
       q2.squaredNorm() - 1.0, q2.dot(q3), q3.squaredNorm() - 1.0;
  return h;
}

Eigen::Matrix<double, 9, 3> constraint_matrix(const Mat3& q) {
  if (!is_so3(q, RotationMatrix::kSo3Tol)) {
    throw Error(ErrorCode::NotRotation,
                "constraint matrix requires a valid rotation");
  }
  const Vec3 q1 = q.col(0), q2 = q.col(1), q3 = q.col(2);
  Eigen::Matrix<double, 9, 3> m = Eigen::Matrix<double, 9, 3>::Zero();
  m.block<3, 1>(0, 0) = -q3;
  m.block<3, 1>(0, 2) = q2;
  m.block<3, 1>(3, 1) = -q3;
  m.block<3, 1>(3, 2) = -q1;
  m.block<3, 1>(6, 0) = q1;
  m.block<3, 1>(6, 1) = q2;
  return m;
}

ConstrainedCrlb constrained_crlb_rotation(const FisherMatrix& f_q,
                                          const Mat3& q) {
  if (f_q.dim() != 9) {
    throw Error(ErrorCode::InvalidParameter, "rotation FIM must be 9x9");
  }
  const Eigen::Matrix<double, 9, 3> m = constraint_matrix(q);
  const Mat3 projected = m.transpose() * f_q.matrix * m;
  Eigen::SelfAdjointEigenSolver<Mat3> eig(projected);
  const double lmin = eig.eigenvalues()(0);
  const double lmax = eig.eigenvalues()(2);
  if (!(lmin > 0.0) || lmax / lmin >= kMaxCondition) {
    throw Error(ErrorCode::SingularProjectedFim,
                "no information in the SO(3) tangent directions");
  }
  ConstrainedCrlb out;
  out.matrix = m * projected.ldlt().solve(m.transpose());
  out.average = out.matrix.trace() / 9.0;
  return out;
}

BoundReport evaluate_bounds(const FisherMatrix& f_t, const FisherMatrix& f_q,
                            const Mat3& q) {
  BoundReport report;
  {
    const EigenSplit split = eigen_split(f_t.matrix);
    report.cond_ft =
        split.rank == 3 ? split.values(2) / split.values(0)
                        : std::numeric_limits<double>::infinity();
  }
  report.crlb_t = crlb_translation(f_t);
  report.crlb_t_approx = crlb_translation_approx(f_t);

  const RotationCrlb rot = crlb_rotation(f_q);
  report.crlb_q = rot.value;
  report.cond_fq = rot.condition;
  report.pseudo_inverse_used = rot.pseudo_inverse_used;
  report.rank_deficient = rot.rank_deficient;
  report.crlb_q_approx = crlb_rotation_approx(f_q);
  report.ccrb_q = constrained_crlb_rotation(f_q, q).average;
  return report;
}

}  // namespace rbl
