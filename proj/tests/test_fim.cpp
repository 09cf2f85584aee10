#include <doctest.h>

#include "rbl/fim.hpp"
#include "rbl/parallel.hpp"
#include "test_utils.hpp"

using namespace rbl;

namespace {

// Single target at the origin with unit-intensity distance anchors.
Scenario axis_scenario(const std::vector<Vec3>& anchors, double sigma = 1.0) {
  Scenario s;
  s.targets = Conformation::Zero(3, 1);
  s.anchors.resize(3, anchors.size());
  for (std::size_t a = 0; a < anchors.size(); ++a) s.anchors.col(a) = anchors[a];
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    s.edges.push_back({0, static_cast<int>(a), DissimilaritySpec::distance(),
                       NoiseModel::normal(sigma)});
  }
  return s;
}

Scenario demo_scenario() {
  Scenario s;
  s.targets.resize(3, 8);
  s.targets << -0.5, 0.5, 0.5, -0.5, -0.5, 0.5, -0.5, 0.5,
               -0.5, -0.5, 0.5, 0.5, -0.5, -0.5, 0.5, 0.5,
               -0.5, -0.5, -0.5, -0.5, 0.5, 0.5, 0.5, 0.5;
  s.anchors = 20.0 * s.targets;
  s.pose.rotation = rotation_from_euler(EulerAngles::from_degrees(10, 20, 45));
  s.pose.translation = Vec3(-3, 0.5, 7);
  return s;
}

}  // namespace

TEST_CASE("fim_landmarks single edge") {
  const Scenario s = axis_scenario({Vec3(-5, 0, 0)});
  const FisherMatrix f = fim_landmarks(s);
  CHECK(f.dim() == 3);
  CHECK(f.edge_count == 1);
  Mat3 expected = Mat3::Zero();
  expected(0, 0) = 1.0;
  CHECK((f.matrix - expected).norm() < 1e-14);
  f.validate();
}

TEST_CASE("fim_landmarks two orthogonal edges") {
  const Scenario s = axis_scenario({Vec3(-5, 0, 0), Vec3(0, -7, 0)});
  const FisherMatrix f = fim_landmarks(s);
  CHECK((f.matrix - Vec3(1, 1, 0).asDiagonal().toDenseMatrix()).norm() <
        1e-14);
}

TEST_CASE("fim_landmarks embeds per-target blocks") {
  Scenario s;
  s.targets.resize(3, 2);
  s.targets << 0, 4, 0, 0, 0, 0;
  s.anchors.resize(3, 1);
  s.anchors << 0, 0, -3;
  s.edges.push_back(
      {1, 0, DissimilaritySpec::distance(), NoiseModel::normal(1.0)});
  const FisherMatrix f = fim_landmarks(s);
  CHECK(f.dim() == 6);
  CHECK(f.matrix.topLeftCorner(3, 3).norm() == 0.0);
  CHECK(f.matrix.bottomRightCorner(3, 3).norm() > 0.1);
}

TEST_CASE("fim_translation closed forms") {
  const double sigma = 0.2;
  const Scenario one = axis_scenario({Vec3(-5, 0, 0)}, sigma);
  Mat3 expected = Mat3::Zero();
  expected(0, 0) = 1.0 / (sigma * sigma);
  CHECK((fim_translation(one).matrix - expected).norm() < 1e-12);

  const Scenario three = axis_scenario(
      {Vec3(-5, 0, 0), Vec3(0, -5, 0), Vec3(0, 0, -5)});
  CHECK((fim_translation(three).matrix - Mat3::Identity()).norm() < 1e-14);
}

TEST_CASE("fim_rotation kron structure on a single edge") {
  Scenario s;
  s.targets.resize(3, 1);
  s.targets << 1, 0, 0;  // c = e1
  s.anchors.resize(3, 1);
  s.anchors << -4, 2, 1;
  s.edges.push_back(
      {0, 0, DissimilaritySpec::distance(), NoiseModel::normal(0.5)});
  const FisherMatrix fq = fim_rotation(s);
  const FisherMatrix ft = fim_translation(s);
  // c = e1: only the top-left 3x3 block is populated, equal to F_t.
  CHECK((fq.matrix.topLeftCorner(3, 3) - ft.matrix).norm() < 1e-12);
  CHECK(fq.matrix.norm() ==
        doctest::Approx(ft.matrix.norm()).epsilon(1e-12));

  // General c: block (i,j) equals c_i c_j F_t.
  s.targets << 0.3, -0.8, 0.5;
  const FisherMatrix fq2 = fim_rotation(s);
  const FisherMatrix ft2 = fim_translation(s);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const Mat3 block = fq2.matrix.block<3, 3>(3 * i, 3 * j);
      CHECK((block - s.targets(i, 0) * s.targets(j, 0) * ft2.matrix).norm() <
            1e-12);
    }
  }
}

TEST_CASE("body collapsed at its centroid carries no rotation information") {
  Scenario s;
  s.targets = Conformation::Zero(3, 2);
  s.anchors.resize(3, 2);
  s.anchors << 5, -5, 0, 0, 0, 3;
  for (int n = 0; n < 2; ++n) {
    for (int a = 0; a < 2; ++a) {
      s.edges.push_back(
          {n, a, DissimilaritySpec::distance(), NoiseModel::normal(1.0)});
    }
  }
  CHECK(fim_rotation(s).matrix.norm() == 0.0);
}

TEST_CASE("additivity over disjoint edge subsets") {
  Scenario s = demo_scenario();
  s.edges = complete_edges(8, 8, DissimilaritySpec::distance(),
                           NoiseModel::normal(0.3));
  Scenario odd = s, even = s;
  odd.edges.clear();
  even.edges.clear();
  for (std::size_t e = 0; e < s.edges.size(); ++e) {
    (e % 2 == 0 ? even : odd).edges.push_back(s.edges[e]);
  }
  for (auto assemble : {fim_translation, fim_rotation}) {
    const Eigen::MatrixXd whole = assemble(s).matrix;
    const Eigen::MatrixXd parts = assemble(even).matrix + assemble(odd).matrix;
    CHECK((whole - parts).norm() <= 1e-13 * whole.norm());
  }
}

TEST_CASE("removing edges never increases eigenvalues") {
  std::mt19937_64 rng(5);
  Scenario s = demo_scenario();
  s.edges = complete_edges(8, 8, DissimilaritySpec::distance(),
                           NoiseModel::normal(0.25));
  const FisherMatrix full = fim_translation(s);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> full_eig(full.matrix);
  for (int trial = 0; trial < 20; ++trial) {
    Scenario subset = s;
    subset.edges = subset_edges(s.edges, 0.6, rng());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sub_eig(
        fim_translation(subset).matrix);
    for (int i = 0; i < 3; ++i) {
      CHECK(sub_eig.eigenvalues()(i) <=
            full_eig.eigenvalues()(i) + 1e-12 * full.matrix.norm());
    }
  }
}

TEST_CASE("assembly errors identify the offending edge") {
  Scenario s = axis_scenario({Vec3(-5, 0, 0)});
  s.anchors.col(0) = Vec3::Zero();  // anchor on top of the target
  try {
    fim_translation(s);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateGeometry);
    CHECK(std::string(e.what()).find("(0, 0)") != std::string::npos);
  }
}

TEST_CASE("FisherMatrix::validate rejects asymmetric or indefinite input") {
  FisherMatrix bad;
  bad.matrix = Eigen::MatrixXd::Zero(3, 3);
  bad.matrix(0, 1) = 1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad.matrix = -Eigen::MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("oracle of an empty edge set is the zero matrix") {
  Scenario s = demo_scenario();
  s.edges.clear();
  const McFimResult mc = mc_fim_oracle(s, FimTarget::Translation, 100, 1);
  CHECK(mc.estimate.norm() == 0.0);
}

TEST_CASE("oracle is deterministic across thread counts") {
  Scenario s = demo_scenario();
  s.edges = complete_edges(8, 8, DissimilaritySpec::distance(),
                           NoiseModel::normal(0.5));
  McFimOptions opts;
  opts.threads = 1;
  const McFimResult one = mc_fim_oracle(s, FimTarget::Translation, 2000, 42, opts);
  opts.threads = 4;
  const McFimResult four = mc_fim_oracle(s, FimTarget::Translation, 2000, 42, opts);
  CHECK((one.estimate - four.estimate).norm() == 0.0);
  CHECK((one.std_error - four.std_error).norm() == 0.0);
}

TEST_CASE("rank-one assembly matches the element-centric oracle") {
  // Smaller graph keeps the smoke check quick; the acceptance suite runs the
  // full-scale version.
  Scenario s = demo_scenario();
  s.edges = complete_edges(8, 8, DissimilaritySpec::distance(),
                           NoiseModel::normal(0.4));

  SUBCASE("translation, normal distance edges") {
    const FisherMatrix f = fim_translation(s);
    const McFimResult mc =
        mc_fim_oracle(s, FimTarget::Translation, 20000, 1234);
    const double guard = 1e-9 * f.matrix.cwiseAbs().maxCoeff();
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        CHECK(std::abs(f.matrix(i, j) - mc.estimate(i, j)) <=
              4.0 * mc.std_error(i, j) + guard);
      }
    }
  }

  SUBCASE("rotation, vonmises aoa edges") {
    s.edges = complete_edges(8, 8, DissimilaritySpec::aoa(AoaFrame{}),
                             NoiseModel::von_mises(60.0));
    const FisherMatrix f = fim_rotation(s);
    const McFimResult mc = mc_fim_oracle(s, FimTarget::Rotation, 20000, 99);
    const double guard = 1e-9 * f.matrix.cwiseAbs().maxCoeff();
    for (int i = 0; i < 9; ++i) {
      for (int j = 0; j < 9; ++j) {
        CHECK(std::abs(f.matrix(i, j) - mc.estimate(i, j)) <=
              4.0 * mc.std_error(i, j) + guard);
      }
    }
  }

  SUBCASE("landmarks, gamma distance edges") {
    Scenario small = s;
    small.targets = s.targets.leftCols(2);
    small.edges = complete_edges(2, 8, DissimilaritySpec::distance(),
                                 NoiseModel::gamma_dist(5.0));
    const FisherMatrix f = fim_landmarks(small);
    const McFimResult mc =
        mc_fim_oracle(small, FimTarget::Landmarks, 20000, 7);
    const double guard = 1e-9 * f.matrix.cwiseAbs().maxCoeff();
    for (int i = 0; i < f.dim(); ++i) {
      for (int j = 0; j < f.dim(); ++j) {
        CHECK(std::abs(f.matrix(i, j) - mc.estimate(i, j)) <=
              4.0 * mc.std_error(i, j) + guard);
      }
    }
  }
}

TEST_CASE("demo scenario FIMs validate and have full rank") {
  Scenario s = demo_scenario();
  s.edges = complete_edges(8, 8, DissimilaritySpec::distance(),
                           NoiseModel::normal(0.1));
  const FisherMatrix ft = fim_translation(s);
  const FisherMatrix fq = fim_rotation(s);
  ft.validate();
  fq.validate();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(fq.matrix);
  CHECK(eig.eigenvalues()(0) > 1e-6 * eig.eigenvalues()(8));
}
