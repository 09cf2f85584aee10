#pragma once

#include <optional>

#include "rbl/geometry.hpp"

namespace rbl {

/// Numerical guards for the measurement-model evaluators.
struct GeometryTolerances {
  double geometry{1e-12};  // minimum distance / in-plane projection norm
  double angle{1e-9};      // 1 - |x| below this is an angle singularity
  double acos_slack{1e-12};  // |x| may exceed 1 by at most this (clamped)
};

/// Reference frame for angle-of-arrival measurements, anchored at the
/// measuring node: `plane_normal` (a) defines the projection plane and
/// `reference` (b) is the in-plane direction the angle is measured against.
struct AoaFrame {
  Vec3 plane_normal{Vec3::UnitZ()};
  Vec3 reference{Vec3::UnitX()};

  /// Throws InvalidParameter unless both vectors are unit length and
  /// mutually orthogonal within 1e-12.
  void validate() const;
};

enum class Dissimilarity { Distance, SquaredDistance, Aoa, Adoa };

const char* to_string(Dissimilarity kind);

/// One measurement model: what quantity an edge observes and, for the angle
/// kinds, the auxiliary geometry it needs.
struct DissimilaritySpec {
  Dissimilarity kind{Dissimilarity::Distance};
  std::optional<AoaFrame> frame;      // Aoa only
  std::optional<int> third_anchor;    // Adoa only; must differ from the edge anchor

  static DissimilaritySpec distance();
  static DissimilaritySpec squared_distance();
  static DissimilaritySpec aoa(const AoaFrame& frame);
  static DissimilaritySpec adoa(int third_anchor);
};

/// Dissimilarity value g(theta_n | theta_a): meters for Distance, square
/// meters for SquaredDistance, radians in [0, pi] for the angle kinds.
/// `theta_k` is the third-node position, required for Adoa.
double eval_g(const DissimilaritySpec& spec, const Vec3& theta_n,
              const Vec3& theta_a, const std::optional<Vec3>& theta_k = {},
              const GeometryTolerances& tol = {});

/// Gradient of g with respect to the target coordinates theta_n.
Vec3 grad_coords(const DissimilaritySpec& spec, const Vec3& theta_n,
                 const Vec3& theta_a, const std::optional<Vec3>& theta_k = {},
                 const GeometryTolerances& tol = {});

/// Gradient of g with respect to the translation vector, evaluated at
/// theta_n = Q * c_n + t. Identical to grad_coords at that point.
Vec3 grad_translation(const DissimilaritySpec& spec, const Pose& pose,
                      const Vec3& c_n, const Vec3& theta_a,
                      const std::optional<Vec3>& theta_k = {},
                      const GeometryTolerances& tol = {});

/// Gradient with respect to vec(Q): kron_landmark(c_n) * grad_translation.
Vec9 grad_rotation(const DissimilaritySpec& spec, const Pose& pose,
                   const Vec3& c_n, const Vec3& theta_a,
                   const std::optional<Vec3>& theta_k = {},
                   const GeometryTolerances& tol = {});

}  // namespace rbl
