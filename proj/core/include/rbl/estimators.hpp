#pragma once

#include <vector>

#include "rbl/bounds.hpp"
#include "rbl/scenario.hpp"

namespace rbl {

/// One noisy measurement per scenario edge, in edge order.
std::vector<double> simulate_measurements(const Scenario& scenario,
                                          std::mt19937_64& rng);

/// Classical multidimensional scaling over the N x N distance matrix
/// (targets first, then anchors), followed by an orthogonal alignment onto
/// the known anchor coordinates. When the target-target block is not
/// available (NaN entries) each target falls back to linear multilateration
/// from the anchor distances. Needs at least 4 non-coplanar anchors.
Eigen::Matrix3Xd mds_positions(const Eigen::MatrixXd& distances,
                               const Conformation& anchors);

/// Optimal rigid alignment of the estimated landmark positions onto the body
/// conformation (SVD with determinant sign correction). Throws
/// DegenerateConformation for fewer than 3 non-collinear landmarks.
Pose procrustes_fit(const Conformation& estimated_targets,
                    const Conformation& body);

struct AffineFit {
  Mat3 linear;       // generally not a rotation
  Vec3 translation;
};

/// Same residual minimized without the SO(3) constraint; needs >= 4
/// landmarks with a full-rank centered conformation.
AffineFit unconstrained_ls_fit(const Conformation& estimated_targets,
                               const Conformation& body);

/// Weighted Levenberg-Marquardt refinement of the pose over all scenario
/// edges; works with incomplete graphs and heterogeneous measurements.
Pose nls_refine_pose(const Scenario& scenario,
                     const std::vector<double>& measurements,
                     const Pose& initial);

enum class Estimator { MdsProcrustes, MdsUnconstrainedLs, NlsRefine };

const char* to_string(Estimator estimator);

struct EstimatorStats {
  double mse_t{0.0};
  double se_t{0.0};
  double mse_q{0.0};  // E ||Q_hat - Q||_F^2
  double se_q{0.0};
  double fail_rate{0.0};
  std::size_t failures{0};
};

struct MonteCarloOptions {
  std::size_t n_trials{1000};
  std::uint64_t seed{0};
  int threads{0};
  std::size_t chunk{64};
  std::vector<Estimator> estimators{Estimator::MdsProcrustes,
                                    Estimator::MdsUnconstrainedLs};
};

struct MonteCarloSummary {
  std::vector<std::pair<Estimator, EstimatorStats>> stats;
  BoundReport bounds;
  std::size_t n_trials{0};
};

/// Runs the estimator chains over seeded measurement draws and reports MSEs
/// with standard errors next to the matching bounds. Deterministic given the
/// seed for any thread count.
MonteCarloSummary run_monte_carlo(const Scenario& scenario,
                                  const MonteCarloOptions& options);

}  // namespace rbl
