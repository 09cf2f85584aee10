#include "rbl/estimators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "rbl/parallel.hpp"

namespace rbl {

std::vector<double> simulate_measurements(const Scenario& scenario,
                                          std::mt19937_64& rng) {
  std::vector<double> r(scenario.edges.size());
  for (std::size_t e = 0; e < scenario.edges.size(); ++e) {
    const auto& edge = scenario.edges[e];
    r[e] = sample(edge.noise, scenario.edge_g(edge), rng);
  }
  return r;
}

namespace {

void require_anchor_geometry(const Conformation& anchors) {
  if (anchors.cols() < 4) {
    throw Error(ErrorCode::RankDeficient,
                "at least 4 anchors are required");
  }
  const Vec3 mean = anchors.rowwise().mean();
  const Eigen::Matrix3Xd centered = anchors.colwise() - mean;
  Eigen::JacobiSVD<Eigen::Matrix3Xd> svd(centered);
  if (svd.singularValues()(2) <= 1e-9 * svd.singularValues()(0)) {
    throw Error(ErrorCode::RankDeficient, "anchors are coplanar");
  }
}

// Per-target linear multilateration from anchor distances: differencing the
// squared-range equations against anchor 0 gives a linear system in x.
Eigen::Matrix3Xd multilaterate(const Eigen::MatrixXd& distances,
                               const Conformation& anchors, int n_targets) {
  const int n_anchors = static_cast<int>(anchors.cols());
  Eigen::MatrixXd lhs(n_anchors - 1, 3);
  Eigen::VectorXd rhs(n_anchors - 1);
  Eigen::Matrix3Xd out(3, n_targets);
  for (int n = 0; n < n_targets; ++n) {
    const double d0 = distances(n, n_targets);
    for (int a = 1; a < n_anchors; ++a) {
      const double da = distances(n, n_targets + a);
      lhs.row(a - 1) = 2.0 * (anchors.col(a) - anchors.col(0)).transpose();
      rhs(a - 1) = anchors.col(a).squaredNorm() -
                   anchors.col(0).squaredNorm() + d0 * d0 - da * da;
    }
    out.col(n) = lhs.colPivHouseholderQr().solve(rhs);
  }
  return out;
}

}  // namespace

Eigen::Matrix3Xd mds_positions(const Eigen::MatrixXd& distances,
                               const Conformation& anchors) {
  const int n = static_cast<int>(distances.rows());
  const int n_anchors = static_cast<int>(anchors.cols());
  const int n_targets = n - n_anchors;
  if (distances.cols() != n || n_targets < 1) {
    throw Error(ErrorCode::InvalidParameter,
                "distance matrix must be square and cover targets + anchors");
  }
  require_anchor_geometry(anchors);
  if (!distances.bottomRightCorner(n_anchors, n_anchors).allFinite() ||
      !distances.topRightCorner(n_targets, n_anchors).allFinite()) {
    throw Error(ErrorCode::InvalidParameter,
                "target-anchor and anchor-anchor distances must be finite");
  }

  if (!distances.topLeftCorner(n_targets, n_targets).allFinite()) {
    return multilaterate(distances, anchors, n_targets);
  }

  // Classical MDS: double-center the squared distances, embed with the top
  // three eigenpairs.
  const Eigen::MatrixXd d2 = distances.cwiseProduct(distances);
  const Eigen::VectorXd row_mean = d2.rowwise().mean();
  const double total_mean = row_mean.mean();
  Eigen::MatrixXd b = -0.5 * d2;
  b.colwise() += 0.5 * row_mean;
  b.rowwise() += 0.5 * row_mean.transpose();
  b.array() -= 0.5 * total_mean;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b);
  Eigen::Matrix3Xd coords(3, n);
  for (int k = 0; k < 3; ++k) {
    const int idx = n - 1 - k;  // eigenvalues ascending
    const double lambda = std::max(eig.eigenvalues()(idx), 0.0);
    coords.row(k) = std::sqrt(lambda) * eig.eigenvectors().col(idx).transpose();
  }

  // Rigid alignment (reflections allowed; MDS axes carry arbitrary signs)
  // of the embedded anchors onto the known anchor coordinates.
  const Eigen::Matrix3Xd emb_anchors = coords.rightCols(n_anchors);
  const Vec3 emb_mean = emb_anchors.rowwise().mean();
  const Vec3 true_mean = anchors.rowwise().mean();
  const Mat3 cross = (anchors.colwise() - true_mean) *
                     (emb_anchors.colwise() - emb_mean).transpose();
  Eigen::JacobiSVD<Mat3> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3 rot = svd.matrixU() * svd.matrixV().transpose();
  const Vec3 shift = true_mean - rot * emb_mean;
  return (rot * coords.leftCols(n_targets)).colwise() + shift;
}

namespace {

void require_body_rank(const Conformation& body, int min_rank, int min_cols,
                       ErrorCode code, const char* what) {
  if (static_cast<int>(body.cols()) < min_cols) {
    throw Error(code, std::string(what) + ": too few landmarks");
  }
  const Vec3 mean = body.rowwise().mean();
  const Eigen::Matrix3Xd centered = body.colwise() - mean;
  Eigen::JacobiSVD<Eigen::Matrix3Xd> svd(centered);
  if (svd.singularValues()(min_rank - 1) <=
      1e-12 * svd.singularValues()(0)) {
    throw Error(code, std::string(what) + ": degenerate landmark geometry");
  }
}

}  // namespace

Pose procrustes_fit(const Conformation& estimated_targets,
                    const Conformation& body) {
  if (estimated_targets.cols() != body.cols()) {
    throw Error(ErrorCode::InvalidParameter,
                "estimated positions and conformation sizes differ");
  }
  require_body_rank(body, 2, 3, ErrorCode::DegenerateConformation,
                    "procrustes_fit");
  const Vec3 theta_mean = estimated_targets.rowwise().mean();
  const Vec3 body_mean = body.rowwise().mean();
  const Mat3 cross = (estimated_targets.colwise() - theta_mean) *
                     (body.colwise() - body_mean).transpose();
  Eigen::JacobiSVD<Mat3> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 rot = svd.matrixU() * svd.matrixV().transpose();
  if (rot.determinant() < 0.0) {
    Mat3 flip = Mat3::Identity();
    flip(2, 2) = -1.0;
    rot = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  Pose pose;
  pose.rotation = RotationMatrix::from_matrix(rot);
  pose.translation = theta_mean - rot * body_mean;
  return pose;
}

AffineFit unconstrained_ls_fit(const Conformation& estimated_targets,
                               const Conformation& body) {
  if (estimated_targets.cols() != body.cols()) {
    throw Error(ErrorCode::InvalidParameter,
                "estimated positions and conformation sizes differ");
  }
  require_body_rank(body, 3, 4, ErrorCode::RankDeficient,
                    "unconstrained_ls_fit");
  const Vec3 theta_mean = estimated_targets.rowwise().mean();
  const Vec3 body_mean = body.rowwise().mean();
  const Eigen::Matrix3Xd theta_c = estimated_targets.colwise() - theta_mean;
  const Eigen::Matrix3Xd body_c = body.colwise() - body_mean;
  const Mat3 gram = body_c * body_c.transpose();
  AffineFit fit;
  fit.linear = gram.ldlt().solve(body_c * theta_c.transpose()).transpose();
  fit.translation = theta_mean - fit.linear * body_mean;
  return fit;
}

namespace {

// Per-edge weight for the NLS residual: the information intensity at the
// measured value (constant for Normal / VonMises).
double nls_weight(const Scenario& scenario, const MeasurementEdge& edge,
                  double r) {
  switch (edge.noise.kind) {
    case NoiseKind::Normal:
    case NoiseKind::VonMises:
      return intensity(edge.noise, 1.0, scenario.intensity_options);
    default:
      return intensity(edge.noise, std::max(r, 1e-6),
                       scenario.intensity_options);
  }
}

Eigen::Matrix<double, 6, 1> pack_pose(const Pose& pose) {
  Eigen::Matrix<double, 6, 1> p;
  p.head<3>() = pose.translation;
  const EulerResult euler = euler_from_rotation(pose.rotation);
  p(3) = euler.angles.alpha;
  p(4) = euler.angles.beta;
  p(5) = euler.angles.gamma;
  return p;
}

Pose unpack_pose(const Eigen::Matrix<double, 6, 1>& p) {
  Pose pose;
  pose.translation = p.head<3>();
  pose.rotation = rotation_from_euler(EulerAngles(p(3), p(4), p(5)));
  return pose;
}

}  // namespace

Pose nls_refine_pose(const Scenario& scenario,
                     const std::vector<double>& measurements,
                     const Pose& initial) {
  if (measurements.size() != scenario.edges.size()) {
    throw Error(ErrorCode::InvalidParameter,
                "measurement vector does not match the edge set");
  }
  const int n_edges = static_cast<int>(scenario.edges.size());
  std::vector<double> weights(n_edges);
  for (int e = 0; e < n_edges; ++e) {
    weights[e] = nls_weight(scenario, scenario.edges[e], measurements[e]);
  }

  auto residuals = [&](const Eigen::Matrix<double, 6, 1>& p,
                       Eigen::VectorXd& out) {
    Scenario probe = scenario;
    probe.pose = unpack_pose(p);
    for (int e = 0; e < n_edges; ++e) {
      out(e) = weights[e] *
               (probe.edge_g(probe.edges[e]) - measurements[e]);
    }
  };

  Eigen::Matrix<double, 6, 1> p = pack_pose(initial);
  Eigen::VectorXd res(n_edges), res_try(n_edges);
  Eigen::MatrixXd jac(n_edges, 6);
  residuals(p, res);
  double cost = res.squaredNorm();
  double damping = 1e-6;

  for (int iter = 0; iter < 60; ++iter) {
    for (int j = 0; j < 6; ++j) {
      const double h = 1e-7 * std::max(1.0, std::abs(p(j)));
      Eigen::Matrix<double, 6, 1> pp = p, pm = p;
      pp(j) += h;
      pm(j) -= h;
      Eigen::VectorXd rp(n_edges), rm(n_edges);
      residuals(pp, rp);
      residuals(pm, rm);
      jac.col(j) = (rp - rm) / (2.0 * h);
    }
    const Eigen::Matrix<double, 6, 6> jtj = jac.transpose() * jac;
    const Eigen::Matrix<double, 6, 1> jtr = jac.transpose() * res;
    bool stepped = false;
    for (int attempt = 0; attempt < 12; ++attempt) {
      Eigen::Matrix<double, 6, 6> damped = jtj;
      damped.diagonal().array() += damping;
      const Eigen::Matrix<double, 6, 1> step = damped.ldlt().solve(jtr);
      const Eigen::Matrix<double, 6, 1> p_try = p - step;
      residuals(p_try, res_try);
      const double cost_try = res_try.squaredNorm();
      if (cost_try < cost) {
        p = p_try;
        res = res_try;
        const double improvement = cost - cost_try;
        cost = cost_try;
        damping = std::max(damping * 0.3, 1e-12);
        stepped = true;
        if (improvement < 1e-15 * std::max(cost, 1.0) ||
            step.norm() < 1e-12) {
          return unpack_pose(p);
        }
        break;
      }
      damping *= 10.0;
    }
    if (!stepped) break;
  }
  return unpack_pose(p);
}

const char* to_string(Estimator estimator) {
  switch (estimator) {
    case Estimator::MdsProcrustes: return "mds_procrustes";
    case Estimator::MdsUnconstrainedLs: return "mds_ls";
    case Estimator::NlsRefine: return "nls";
  }
  return "unknown";
}

namespace {

struct TrialAccum {
  // Per estimator: Kahan sums of e_t, e_t^2, e_q, e_q^2 and failure count.
  std::vector<std::array<KahanSum, 4>> sums;
  std::vector<std::size_t> failures;
  std::size_t count{0};
};

// Complete distance matrix for the MDS chain: measured target-anchor
// distances, exact anchor-anchor distances, and the (pose-invariant)
// inter-landmark distances of the body for the target-target block.
struct MdsSupport {
  bool available{false};
  Eigen::MatrixXd base;                      // prefilled known blocks
  std::vector<std::pair<int, int>> slots;    // edge -> (row, col)
  std::vector<int> edge_of_slot;             // edge index per slot entry
};

MdsSupport make_mds_support(const Scenario& scenario) {
  MdsSupport support;
  const int n_t = scenario.num_targets();
  const int n_a = scenario.num_anchors();
  const int n = n_t + n_a;

  // Complete-graph requirement: every (target, anchor) pair measured by a
  // range-type edge.
  Eigen::MatrixXi seen = Eigen::MatrixXi::Zero(n_t, n_a);
  for (std::size_t e = 0; e < scenario.edges.size(); ++e) {
    const auto& edge = scenario.edges[e];
    if (edge.spec.kind == Dissimilarity::Distance ||
        edge.spec.kind == Dissimilarity::SquaredDistance) {
      if (!seen(edge.target, edge.anchor)) {
        seen(edge.target, edge.anchor) = 1;
        support.slots.emplace_back(edge.target, n_t + edge.anchor);
        support.edge_of_slot.push_back(static_cast<int>(e));
      }
    }
  }
  if (seen.sum() != n_t * n_a) return support;  // available stays false

  support.available = true;
  support.base = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n_t; ++i) {
    for (int j = 0; j < n_t; ++j) {
      support.base(i, j) =
          (scenario.targets.col(i) - scenario.targets.col(j)).norm();
    }
  }
  for (int i = 0; i < n_a; ++i) {
    for (int j = 0; j < n_a; ++j) {
      support.base(n_t + i, n_t + j) =
          (scenario.anchors.col(i) - scenario.anchors.col(j)).norm();
    }
  }
  return support;
}

double measured_distance(const MeasurementEdge& edge, double r) {
  if (edge.spec.kind == Dissimilarity::SquaredDistance) {
    return std::sqrt(std::max(r, 0.0));
  }
  return std::max(r, 0.0);
}

// Typical per-measurement standard deviation, used to scale the NLS
// initialization perturbation.
double noise_scale(const Scenario& scenario) {
  double acc = 0.0;
  for (const auto& edge : scenario.edges) {
    const double g = scenario.edge_g(edge);
    acc += 1.0 / intensity(edge.noise, g, scenario.intensity_options);
  }
  return scenario.edges.empty() ? 0.0 : acc / scenario.edges.size();
}

}  // namespace

MonteCarloSummary run_monte_carlo(const Scenario& scenario,
                                  const MonteCarloOptions& options) {
  scenario.validate();
  if (options.n_trials < 1) {
    throw Error(ErrorCode::ValidationError, "trials must be >= 1");
  }
  const auto& estimators = options.estimators;
  const bool needs_mds =
      std::any_of(estimators.begin(), estimators.end(), [](Estimator e) {
        return e == Estimator::MdsProcrustes ||
               e == Estimator::MdsUnconstrainedLs;
      });
  const MdsSupport support = make_mds_support(scenario);
  if (needs_mds && !support.available) {
    throw Error(ErrorCode::ValidationError,
                "MDS estimators require a complete target-anchor distance "
                "graph; use the nls estimator for incomplete scenarios");
  }

  const Mat3 q_true = scenario.pose.rotation.matrix();
  const Vec3 t_true = scenario.pose.translation;
  const double init_scale = noise_scale(scenario);
  const std::size_t n_est = estimators.size();

  auto chunk_fn = [&](std::size_t begin, std::size_t end,
                      std::size_t chunk_idx) {
    TrialAccum acc;
    acc.sums.resize(n_est);
    acc.failures.assign(n_est, 0);
    std::mt19937_64 rng = make_stream(options.seed, chunk_idx);
    Eigen::MatrixXd distances;
    for (std::size_t trial = begin; trial < end; ++trial) {
      const std::vector<double> r = simulate_measurements(scenario, rng);

      Eigen::Matrix3Xd theta_hat;
      bool mds_ok = false;
      if (needs_mds) {
        distances = support.base;
        for (std::size_t s = 0; s < support.slots.size(); ++s) {
          const auto [row, col] = support.slots[s];
          const double d = measured_distance(
              scenario.edges[support.edge_of_slot[s]], r[support.edge_of_slot[s]]);
          distances(row, col) = d;
          distances(col, row) = d;
        }
        try {
          theta_hat = mds_positions(distances, scenario.anchors);
          mds_ok = true;
        } catch (const Error&) {
          mds_ok = false;
        }
      }

      Pose init;  // NLS start: truth perturbed at the noise scale
      if (std::find(estimators.begin(), estimators.end(),
                    Estimator::NlsRefine) != estimators.end()) {
        std::normal_distribution<double> perturb(0.0, init_scale);
        Vec3 dt{perturb(rng), perturb(rng), perturb(rng)};
        EulerResult euler = euler_from_rotation(scenario.pose.rotation);
        init.translation = t_true + dt;
        init.rotation = rotation_from_euler(
            EulerAngles(euler.angles.alpha + perturb(rng),
                        euler.angles.beta + perturb(rng),
                        euler.angles.gamma + perturb(rng)));
      }

      for (std::size_t k = 0; k < n_est; ++k) {
        double err_t = 0.0, err_q = 0.0;
        bool ok = false;
        try {
          switch (estimators[k]) {
            case Estimator::MdsProcrustes: {
              if (!mds_ok) break;
              const Pose pose = procrustes_fit(theta_hat, scenario.targets);
              err_t = (pose.translation - t_true).squaredNorm();
              err_q = (pose.rotation.matrix() - q_true).squaredNorm();
              ok = true;
              break;
            }
            case Estimator::MdsUnconstrainedLs: {
              if (!mds_ok) break;
              const AffineFit fit =
                  unconstrained_ls_fit(theta_hat, scenario.targets);
              err_t = (fit.translation - t_true).squaredNorm();
              err_q = (fit.linear - q_true).squaredNorm();
              ok = true;
              break;
            }
            case Estimator::NlsRefine: {
              const Pose pose = nls_refine_pose(scenario, r, init);
              err_t = (pose.translation - t_true).squaredNorm();
              err_q = (pose.rotation.matrix() - q_true).squaredNorm();
              ok = true;
              break;
            }
          }
        } catch (const Error&) {
          ok = false;
        }
        if (ok) {
          acc.sums[k][0].add(err_t);
          acc.sums[k][1].add(err_t * err_t);
          acc.sums[k][2].add(err_q);
          acc.sums[k][3].add(err_q * err_q);
        } else {
          ++acc.failures[k];
        }
      }
      ++acc.count;
    }
    return acc;
  };

  TrialAccum init_acc;
  init_acc.sums.resize(n_est);
  init_acc.failures.assign(n_est, 0);
  const TrialAccum total = chunked_reduce(
      options.n_trials, options.chunk, options.threads, init_acc, chunk_fn,
      [&](TrialAccum& into, const TrialAccum& part) {
        for (std::size_t k = 0; k < n_est; ++k) {
          for (int j = 0; j < 4; ++j) {
            into.sums[k][j].add(part.sums[k][j].value());
          }
          into.failures[k] += part.failures[k];
        }
        into.count += part.count;
      });

  MonteCarloSummary summary;
  summary.n_trials = total.count;
  for (std::size_t k = 0; k < n_est; ++k) {
    EstimatorStats stats;
    stats.failures = total.failures[k];
    stats.fail_rate =
        static_cast<double>(total.failures[k]) / std::max<std::size_t>(1, total.count);
    const double n_ok =
        static_cast<double>(total.count - total.failures[k]);
    if (n_ok > 0) {
      stats.mse_t = total.sums[k][0].value() / n_ok;
      stats.mse_q = total.sums[k][2].value() / n_ok;
      const double var_t = std::max(
          0.0, total.sums[k][1].value() / n_ok - stats.mse_t * stats.mse_t);
      const double var_q = std::max(
          0.0, total.sums[k][3].value() / n_ok - stats.mse_q * stats.mse_q);
      stats.se_t = std::sqrt(var_t / n_ok);
      stats.se_q = std::sqrt(var_q / n_ok);
    }
    summary.stats.emplace_back(estimators[k], stats);
  }

  summary.bounds = evaluate_bounds(fim_translation(scenario),
                                   fim_rotation(scenario), q_true);
  return summary;
}

}  // namespace rbl
