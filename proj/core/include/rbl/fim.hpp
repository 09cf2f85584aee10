#pragma once

#include <Eigen/Dense>

#include "rbl/scenario.hpp"

namespace rbl {

enum class FimTarget { Translation, Rotation, Landmarks };

const char* to_string(FimTarget target);

/// Fisher information matrix with provenance: what parameter it bounds and
/// how many measurement edges contributed.
struct FisherMatrix {
  Eigen::MatrixXd matrix;
  FimTarget target{FimTarget::Translation};
  int edge_count{0};

  int dim() const { return static_cast<int>(matrix.rows()); }

  /// Checks symmetry (1e-12 relative) and positive semidefiniteness
  /// (min eigenvalue >= -1e-9 * ||F||); throws ValidationError on failure.
  void validate() const;
};

/// One edge's rank-one FIM contribution F_e = lambda * v v': the intensity
/// at the true dissimilarity and the information gradient in the chosen
/// parameterization (3 for translation, 9 for vec(Q), 3 n_T for landmarks
/// with the gradient embedded at the target's block).
struct EdgeContribution {
  double lambda{0.0};
  Eigen::VectorXd gradient;
};

EdgeContribution edge_contribution(const Scenario& scenario,
                                   const MeasurementEdge& edge,
                                   FimTarget target);

/// Sum of rank-one contributions over the edge set, in edge order.
/// Geometry errors are rethrown with the offending edge identified.
FisherMatrix fim_landmarks(const Scenario& scenario);
FisherMatrix fim_translation(const Scenario& scenario);
FisherMatrix fim_rotation(const Scenario& scenario);

struct McFimOptions {
  double fd_step{1e-5};    // per-coordinate central-difference step
  int threads{0};          // 0 = hardware concurrency
  std::size_t chunk{256};  // trials per RNG stream; fixes the reduction order
};

struct McFimResult {
  Eigen::MatrixXd estimate;
  Eigen::MatrixXd std_error;  // per-entry Monte Carlo standard errors
  std::size_t n_trials{0};
};

/// Element-centric construction E[s s'] of the FIM: samples full measurement
/// vectors and differentiates the log-likelihood in the chosen parameter by
/// central finite differences. Deterministic given the seed for any thread
/// count.
McFimResult mc_fim_oracle(const Scenario& scenario, FimTarget target,
                          std::size_t n_trials, std::uint64_t seed,
                          const McFimOptions& options = {});

}  // namespace rbl
