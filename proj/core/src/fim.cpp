#include "rbl/fim.hpp"

#include <cmath>
#include <string>

#include "rbl/parallel.hpp"

namespace rbl {

namespace {

std::string edge_label(const MeasurementEdge& edge) {
  return std::string(to_string(edge.spec.kind)) + " edge (" +
         std::to_string(edge.target) + ", " + std::to_string(edge.anchor) + ")";
}

int fim_dim(const Scenario& scenario, FimTarget target) {
  switch (target) {
    case FimTarget::Translation: return 3;
    case FimTarget::Rotation: return 9;
    case FimTarget::Landmarks: return 3 * scenario.num_targets();
  }
  return 0;
}

FisherMatrix assemble(const Scenario& scenario, FimTarget target) {
  scenario.validate();
  const int dim = fim_dim(scenario, target);
  FisherMatrix fim;
  fim.target = target;
  fim.matrix = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& edge : scenario.edges) {
    const EdgeContribution c = edge_contribution(scenario, edge, target);
    fim.matrix.noalias() += c.lambda * c.gradient * c.gradient.transpose();
    ++fim.edge_count;
  }
  return fim;
}

}  // namespace

const char* to_string(FimTarget target) {
  switch (target) {
    case FimTarget::Translation: return "translation";
    case FimTarget::Rotation: return "rotation";
    case FimTarget::Landmarks: return "landmarks";
  }
  return "unknown";
}

void FisherMatrix::validate() const {
  const double scale = std::max(1.0, matrix.norm());
  if ((matrix - matrix.transpose()).norm() > 1e-12 * scale) {
    throw Error(ErrorCode::ValidationError, "Fisher matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(matrix);
  if (eig.eigenvalues().minCoeff() < -1e-9 * scale) {
    throw Error(ErrorCode::ValidationError,
                "Fisher matrix is not positive semidefinite");
  }
}

EdgeContribution edge_contribution(const Scenario& scenario,
                                   const MeasurementEdge& edge,
                                   FimTarget target) {
  try {
    const Vec3 theta_a = scenario.anchors.col(edge.anchor);
    const auto theta_k = scenario.third_node(edge);
    const double g = scenario.edge_g(edge);
    EdgeContribution out;
    const double sqrt_f =
        intensity(edge.noise, g, scenario.intensity_options);
    out.lambda = sqrt_f * sqrt_f;
    switch (target) {
      case FimTarget::Translation:
        out.gradient = grad_translation(edge.spec, scenario.pose,
                                        scenario.targets.col(edge.target),
                                        theta_a, theta_k, scenario.tolerances);
        break;
      case FimTarget::Rotation:
        out.gradient = grad_rotation(edge.spec, scenario.pose,
                                     scenario.targets.col(edge.target),
                                     theta_a, theta_k, scenario.tolerances);
        break;
      case FimTarget::Landmarks: {
        out.gradient = Eigen::VectorXd::Zero(3 * scenario.num_targets());
        out.gradient.segment<3>(3 * edge.target) =
            grad_coords(edge.spec, scenario.target_position(edge.target),
                        theta_a, theta_k, scenario.tolerances);
        break;
      }
    }
    return out;
  } catch (const Error& e) {
    throw Error(e.code(), edge_label(edge) + ": " + e.what());
  }
}

FisherMatrix fim_landmarks(const Scenario& scenario) {
  return assemble(scenario, FimTarget::Landmarks);
}

FisherMatrix fim_translation(const Scenario& scenario) {
  return assemble(scenario, FimTarget::Translation);
}

FisherMatrix fim_rotation(const Scenario& scenario) {
  return assemble(scenario, FimTarget::Rotation);
}

namespace {

// Pre-resolved geometry for fast log-likelihood evaluation in the oracle.
struct OracleEdge {
  DissimilaritySpec spec;
  NoiseModel noise;
  int target;
  Vec3 anchor;
  std::optional<Vec3> third;
};

struct OracleAccum {
  Eigen::MatrixXd sum;     // sum of s s' over trials
  Eigen::MatrixXd sum_sq;  // elementwise sum of (s_i s_j)^2
  std::size_t count{0};
};

// Log-likelihood of the measurement vector r at target positions `theta`
// (columns). Only edges listed in `active` are summed.
double log_likelihood(const std::vector<OracleEdge>& edges,
                      const std::vector<int>& active,
                      const std::vector<double>& r,
                      const Eigen::Matrix3Xd& theta,
                      const GeometryTolerances& tol) {
  double ll = 0.0;
  for (int e : active) {
    const OracleEdge& edge = edges[e];
    const double g =
        eval_g(edge.spec, theta.col(edge.target), edge.anchor, edge.third, tol);
    ll += log_pdf(edge.noise, r[e], g);
  }
  return ll;
}

}  // namespace

McFimResult mc_fim_oracle(const Scenario& scenario, FimTarget target,
                          std::size_t n_trials, std::uint64_t seed,
                          const McFimOptions& options) {
  scenario.validate();
  const int dim = fim_dim(scenario, target);
  const int n_targets = scenario.num_targets();
  const double h = options.fd_step;

  std::vector<OracleEdge> edges;
  edges.reserve(scenario.edges.size());
  std::vector<double> true_g(scenario.edges.size());
  for (std::size_t e = 0; e < scenario.edges.size(); ++e) {
    const auto& edge = scenario.edges[e];
    edges.push_back({edge.spec, edge.noise, edge.target,
                     scenario.anchors.col(edge.anchor),
                     scenario.third_node(edge)});
    true_g[e] = scenario.edge_g(edge);
  }

  // Edges whose likelihood depends on coordinate j of the parameter.
  std::vector<std::vector<int>> active(dim);
  for (int j = 0; j < dim; ++j) {
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const bool affects = target == FimTarget::Landmarks
                               ? edges[e].target == j / 3
                               : true;
      if (affects) active[j].push_back(static_cast<int>(e));
    }
  }

  const Eigen::Matrix3Xd base_theta = scenario.target_positions();
  const Mat3 q0 = scenario.pose.rotation.matrix();
  const Vec3 t0 = scenario.pose.translation;
  const GeometryTolerances tol = scenario.tolerances;

  // Target positions as a function of the perturbed parameter.
  auto positions = [&](int coord, double delta) -> Eigen::Matrix3Xd {
    switch (target) {
      case FimTarget::Translation: {
        Vec3 t = t0;
        t(coord) += delta;
        return (q0 * scenario.targets).colwise() + t;
      }
      case FimTarget::Rotation: {
        Mat3 q = q0;
        q(coord % 3, coord / 3) += delta;  // column-stacking order
        return (q * scenario.targets).colwise() + t0;
      }
      case FimTarget::Landmarks: {
        Eigen::Matrix3Xd theta = base_theta;
        theta(coord % 3, coord / 3) += delta;
        return theta;
      }
    }
    return base_theta;
  };

  auto chunk_fn = [&](std::size_t begin, std::size_t end,
                      std::size_t chunk_idx) {
    OracleAccum acc{Eigen::MatrixXd::Zero(dim, dim),
                    Eigen::MatrixXd::Zero(dim, dim), 0};
    std::mt19937_64 rng = make_stream(seed, chunk_idx);
    std::vector<double> r(edges.size());
    Eigen::VectorXd score(dim);
    for (std::size_t trial = begin; trial < end; ++trial) {
      for (std::size_t e = 0; e < edges.size(); ++e) {
        r[e] = sample(edges[e].noise, true_g[e], rng);
      }
      for (int j = 0; j < dim; ++j) {
        const double lp =
            log_likelihood(edges, active[j], r, positions(j, +h), tol);
        const double lm =
            log_likelihood(edges, active[j], r, positions(j, -h), tol);
        score(j) = (lp - lm) / (2.0 * h);
      }
      const Eigen::MatrixXd outer = score * score.transpose();
      acc.sum += outer;
      acc.sum_sq += outer.cwiseProduct(outer);
      ++acc.count;
    }
    return acc;
  };

  OracleAccum total = chunked_reduce(
      n_trials, options.chunk, options.threads,
      OracleAccum{Eigen::MatrixXd::Zero(dim, dim),
                  Eigen::MatrixXd::Zero(dim, dim), 0},
      chunk_fn, [](OracleAccum& into, const OracleAccum& part) {
        into.sum += part.sum;
        into.sum_sq += part.sum_sq;
        into.count += part.count;
      });

  McFimResult result;
  result.n_trials = total.count;
  const double n = static_cast<double>(std::max<std::size_t>(total.count, 1));
  result.estimate = total.sum / n;
  const Eigen::MatrixXd var =
      (total.sum_sq / n - result.estimate.cwiseProduct(result.estimate))
          .cwiseMax(0.0);
  result.std_error = (var / n).cwiseSqrt();
  return result;
}

}  // namespace rbl
