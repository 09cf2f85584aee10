#include "rbl/dissimilarity.hpp"

#include <cmath>

namespace rbl {

namespace {

double checked_acos_arg(double x, const GeometryTolerances& tol) {
  if (x > 1.0 + tol.acos_slack || x < -1.0 - tol.acos_slack) {
    throw Error(ErrorCode::ArgOutOfRange,
                "acos argument " + std::to_string(x) + " outside [-1, 1]");
  }
  return std::clamp(x, -1.0, 1.0);
}

void require_distance(double d, const GeometryTolerances& tol,
                      const char* what) {
  if (!(d > tol.geometry)) {
    throw Error(ErrorCode::DegenerateGeometry,
                std::string(what) + " below tolerance");
  }
}

const Vec3& require_third_node(const std::optional<Vec3>& theta_k) {
  if (!theta_k) {
    throw Error(ErrorCode::InvalidParameter,
                "Adoa evaluation requires a third-node position");
  }
  return *theta_k;
}

// AoA auxiliary quantities: u = theta_n - theta_a, P = I - aa', x = cos(g).
struct AoaParts {
  Vec3 u;
  Vec3 pu;       // P * u
  double pu_norm;
  double x;
};

AoaParts aoa_parts(const AoaFrame& frame, const Vec3& theta_n,
                   const Vec3& theta_a, const GeometryTolerances& tol) {
  AoaParts parts;
  parts.u = theta_n - theta_a;
  require_distance(parts.u.norm(), tol, "target-anchor distance");
  parts.pu = parts.u - frame.plane_normal.dot(parts.u) * frame.plane_normal;
  parts.pu_norm = parts.pu.norm();
  require_distance(parts.pu_norm, tol, "in-plane projection of d_na");
  parts.x = checked_acos_arg(parts.u.dot(frame.reference) / parts.pu_norm, tol);
  return parts;
}

// ADoA auxiliary quantities: u = theta_n - theta_a, v = theta_n - theta_k,
// d = |theta_k - theta_a|, x = cos(g) via the law of cosines.
struct AdoaParts {
  Vec3 u;
  Vec3 v;
  double u_norm;
  double d;
  double x;
};

AdoaParts adoa_parts(const Vec3& theta_n, const Vec3& theta_a,
                     const Vec3& theta_k, const GeometryTolerances& tol) {
  AdoaParts parts;
  parts.u = theta_n - theta_a;
  parts.v = theta_n - theta_k;
  parts.u_norm = parts.u.norm();
  parts.d = (theta_k - theta_a).norm();
  require_distance(parts.u_norm, tol, "target-anchor distance");
  require_distance(parts.d, tol, "anchor-third-node distance");
  require_distance(parts.v.norm(), tol, "target-third-node distance");
  parts.x = checked_acos_arg(
      (parts.u_norm * parts.u_norm + parts.d * parts.d -
       parts.v.squaredNorm()) /
          (2.0 * parts.u_norm * parts.d),
      tol);
  return parts;
}

// 1 / sqrt(1 - x^2) guard shared by both angle kinds.
double inv_sin_factor(double x, const GeometryTolerances& tol) {
  if (std::abs(x) >= 1.0 - tol.angle) {
    throw Error(ErrorCode::AngleSingularity,
                "angle gradient unbounded: |cos g| = " + std::to_string(x));
  }
  return 1.0 / std::sqrt(1.0 - x * x);
}

}  // namespace

void AoaFrame::validate() const {
  constexpr double kTol = 1e-12;
  if (std::abs(plane_normal.norm() - 1.0) > kTol ||
      std::abs(reference.norm() - 1.0) > kTol) {
    throw Error(ErrorCode::InvalidParameter, "AoA frame vectors must be unit");
  }
  if (std::abs(plane_normal.dot(reference)) > kTol) {
    throw Error(ErrorCode::InvalidParameter,
                "AoA frame vectors must be orthogonal");
  }
}

const char* to_string(Dissimilarity kind) {
  switch (kind) {
    case Dissimilarity::Distance: return "distance";
    case Dissimilarity::SquaredDistance: return "squared_distance";
    case Dissimilarity::Aoa: return "aoa";
    case Dissimilarity::Adoa: return "adoa";
  }
  return "unknown";
}

DissimilaritySpec DissimilaritySpec::distance() {
  return {Dissimilarity::Distance, {}, {}};
}

DissimilaritySpec DissimilaritySpec::squared_distance() {
  return {Dissimilarity::SquaredDistance, {}, {}};
}

DissimilaritySpec DissimilaritySpec::aoa(const AoaFrame& frame) {
  frame.validate();
  return {Dissimilarity::Aoa, frame, {}};
}

DissimilaritySpec DissimilaritySpec::adoa(int third_anchor) {
  return {Dissimilarity::Adoa, {}, third_anchor};
}

double eval_g(const DissimilaritySpec& spec, const Vec3& theta_n,
              const Vec3& theta_a, const std::optional<Vec3>& theta_k,
              const GeometryTolerances& tol) {
  switch (spec.kind) {
    case Dissimilarity::Distance: {
      const double d = (theta_n - theta_a).norm();
      require_distance(d, tol, "target-anchor distance");
      return d;
    }
    case Dissimilarity::SquaredDistance: {
      const double d = (theta_n - theta_a).norm();
      require_distance(d, tol, "target-anchor distance");
      return d * d;
    }
    case Dissimilarity::Aoa: {
      const AoaParts parts = aoa_parts(*spec.frame, theta_n, theta_a, tol);
      return std::acos(parts.x);
    }
    case Dissimilarity::Adoa: {
      const AdoaParts parts =
          adoa_parts(theta_n, theta_a, require_third_node(theta_k), tol);
      return std::acos(parts.x);
    }
  }
  throw Error(ErrorCode::InvalidParameter, "unknown dissimilarity kind");
}

Vec3 grad_coords(const DissimilaritySpec& spec, const Vec3& theta_n,
                 const Vec3& theta_a, const std::optional<Vec3>& theta_k,
                 const GeometryTolerances& tol) {
  switch (spec.kind) {
    case Dissimilarity::Distance: {
      const Vec3 u = theta_n - theta_a;
      const double d = u.norm();
      require_distance(d, tol, "target-anchor distance");
      return u / d;
    }
    case Dissimilarity::SquaredDistance: {
      const Vec3 u = theta_n - theta_a;
      require_distance(u.norm(), tol, "target-anchor distance");
      return 2.0 * u;
    }
    case Dissimilarity::Aoa: {
      const AoaFrame& frame = *spec.frame;
      const AoaParts parts = aoa_parts(frame, theta_n, theta_a, tol);
      const double scale = inv_sin_factor(parts.x, tol);
      const double pu3 = parts.pu_norm * parts.pu_norm * parts.pu_norm;
      const Vec3 w = (parts.u.dot(parts.pu) * frame.reference -
                      parts.u.dot(frame.reference) * parts.pu) /
                     pu3;
      return -scale * w;
    }
    case Dissimilarity::Adoa: {
      const Vec3& tk = require_third_node(theta_k);
      const AdoaParts parts = adoa_parts(theta_n, theta_a, tk, tol);
      if (parts.v.cross(parts.u).norm() <= tol.geometry) {
        throw Error(ErrorCode::DegenerateGeometry,
                    "Adoa rays are collinear");
      }
      const double scale = inv_sin_factor(parts.x, tol);
      const double nu = parts.u_norm;
      const double nu3 = nu * nu * nu;
      const double d = parts.d;
      const Vec3 w = parts.u / (2.0 * nu * d) - parts.u * d / (2.0 * nu3) +
                     parts.v.squaredNorm() * parts.u / (2.0 * nu3 * d) -
                     parts.v / (nu * d);
      return -scale * w;
    }
  }
  throw Error(ErrorCode::InvalidParameter, "unknown dissimilarity kind");
}

Vec3 grad_translation(const DissimilaritySpec& spec, const Pose& pose,
                      const Vec3& c_n, const Vec3& theta_a,
                      const std::optional<Vec3>& theta_k,
                      const GeometryTolerances& tol) {
  const Vec3 theta_n = pose.rotation.matrix() * c_n + pose.translation;
  return grad_coords(spec, theta_n, theta_a, theta_k, tol);
}

Vec9 grad_rotation(const DissimilaritySpec& spec, const Pose& pose,
                   const Vec3& c_n, const Vec3& theta_a,
                   const std::optional<Vec3>& theta_k,
                   const GeometryTolerances& tol) {
  return kron_landmark(c_n) *
         grad_translation(spec, pose, c_n, theta_a, theta_k, tol);
}

}  // namespace rbl
