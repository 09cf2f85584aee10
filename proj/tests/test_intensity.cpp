#include <doctest.h>

#include <algorithm>
#include <vector>

#include "rbl/intensity.hpp"
#include "rbl/parallel.hpp"
#include "test_utils.hpp"

using namespace rbl;
using rbl::testing::integrate;

TEST_CASE("closed-form intensities") {
  CHECK(intensity(NoiseModel::normal(0.1), 5.0) == doctest::Approx(10.0));
  CHECK(intensity(NoiseModel::normal(0.5), 2.0) == doctest::Approx(2.0));

  IntensityOptions closed;
  closed.von_mises = VonMisesIntensityMode::ClosedForm;
  CHECK(intensity(NoiseModel::von_mises(2.0), 1.0, closed) ==
        doctest::Approx(std::sqrt(2.0)));

  // Exact von Mises value: sqrt(omega I1/I0).
  const double exact = intensity(NoiseModel::von_mises(3.0), 1.0);
  CHECK(exact * exact == doctest::Approx(3.0 * std::exp(log_bessel_i1(3.0) -
                                                        log_bessel_i0(3.0)))
                             .epsilon(1e-12));

  // Pathloss: sqrt(1/(beta g^alpha) + alpha^2 / (2 g^2)).
  const double g = 4.0;
  const double expected =
      std::sqrt(1.0 / (0.5 * g * g) + 4.0 / (2.0 * g * g));
  CHECK(intensity(NoiseModel::normal_pathloss(2.0, 0.5), g) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("normal and vonmises intensities do not depend on g") {
  const NoiseModel normal = NoiseModel::normal(0.3);
  const NoiseModel vm = NoiseModel::von_mises(4.0);
  CHECK(intensity(normal, 1.0) == intensity(normal, 17.5));
  CHECK(intensity(vm, 0.2) == intensity(vm, 2.9));
}

TEST_CASE("nakagami intensity modes") {
  const NoiseModel model = NoiseModel::nakagami(2.0);
  const double g = 2.0, upsilon = g * g;
  IntensityOptions opts;

  opts.nakagami = NakagamiIntensityMode::ClosedFormA;
  CHECK(intensity(model, g, opts) ==
        doctest::Approx(std::sqrt(9.0 / upsilon)));
  opts.nakagami = NakagamiIntensityMode::ClosedFormB;
  CHECK(intensity(model, g, opts) ==
        doctest::Approx(std::sqrt(10.0 / upsilon)));
  opts.nakagami = NakagamiIntensityMode::Calibrated;
  CHECK(intensity(model, g, opts) ==
        doctest::Approx(std::sqrt(4.0 * 2.0 / upsilon)).epsilon(2e-3));
  opts.nakagami = NakagamiIntensityMode::Strict;
  CHECK_THROWS_AS(intensity(model, g, opts), Error);  // forms disagree > 10%

  opts.nakagami = NakagamiIntensityMode::ClosedFormB;
  CHECK_THROWS_AS(intensity(NoiseModel::nakagami(1.0), g, opts), Error);
}

TEST_CASE("gamma intensity modes") {
  const NoiseModel model = NoiseModel::gamma_dist(5.0);
  const double g = 3.0, upsilon = g / 5.0;
  IntensityOptions opts;
  opts.gamma = GammaIntensityMode::ClosedForm;
  CHECK(intensity(model, g, opts) ==
        doctest::Approx(std::sqrt(1.0 / (upsilon * upsilon * 3.0))));
  opts.gamma = GammaIntensityMode::MeanCoupled;
  CHECK(intensity(model, g, opts) ==
        doctest::Approx(std::sqrt(5.0) / g).epsilon(1e-12));
}

TEST_CASE("parameter invariants") {
  CHECK_THROWS_AS(NoiseModel::normal(0.0), Error);
  CHECK_THROWS_AS(NoiseModel::normal(-1.0), Error);
  CHECK_THROWS_AS(NoiseModel::normal_pathloss(-0.1, 1.0), Error);
  CHECK_THROWS_AS(NoiseModel::normal_pathloss(2.0, 0.0), Error);
  CHECK_THROWS_AS(NoiseModel::von_mises(0.0), Error);
  CHECK_THROWS_AS(NoiseModel::nakagami(0.4), Error);
  CHECK_THROWS_AS(NoiseModel::gamma_dist(2.0), Error);
  CHECK_NOTHROW(NoiseModel::nakagami(0.5));
  CHECK_NOTHROW(NoiseModel::gamma_dist(2.01));
}

TEST_CASE("log_pdf closed-form values") {
  CHECK(log_pdf(NoiseModel::normal(1.0), 4.0, 4.0) ==
        doctest::Approx(-0.5 * std::log(2.0 * M_PI)));

  const double omega = 2.5;
  CHECK(log_pdf(NoiseModel::von_mises(omega), 0.7, 0.7) ==
        doctest::Approx(omega - std::log(2.0 * M_PI) - log_bessel_i0(omega)));

  // Gamma kappa = 3, mean coupling g = 3 => upsilon = 1, r = 2:
  // log(2^2 e^-2 / Gamma(3)).
  CHECK(log_pdf(NoiseModel::gamma_dist(3.0), 2.0, 3.0) ==
        doctest::Approx(std::log(4.0 * std::exp(-2.0) / 2.0)));
}

TEST_CASE("log_pdf support errors") {
  CHECK_THROWS_AS(log_pdf(NoiseModel::von_mises(1.0), 3.5, 0.0), Error);
  CHECK_THROWS_AS(log_pdf(NoiseModel::von_mises(1.0), -3.5, 0.0), Error);
  CHECK_THROWS_AS(log_pdf(NoiseModel::nakagami(1.0), -0.1, 2.0), Error);
  CHECK_THROWS_AS(log_pdf(NoiseModel::gamma_dist(3.0), 0.0, 2.0), Error);
  try {
    log_pdf(NoiseModel::gamma_dist(3.0), -1.0, 2.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OutOfSupport);
  }
}

TEST_CASE("log_bessel series and asymptotic branches agree") {
  // Branch crossover at x = 25.
  CHECK(log_bessel_i0(24.999) == doctest::Approx(log_bessel_i0(25.001))
                                     .epsilon(1e-7));
  CHECK(log_bessel_i1(24.999) == doctest::Approx(log_bessel_i1(25.001))
                                     .epsilon(1e-7));
  // Against the standard library implementation where it is finite.
  for (double x : {0.5, 2.0, 10.0, 40.0, 120.0}) {
    CHECK(log_bessel_i0(x) ==
          doctest::Approx(std::log(std::cyl_bessel_i(0.0, x))).epsilon(1e-9));
    CHECK(log_bessel_i1(x) ==
          doctest::Approx(std::log(std::cyl_bessel_i(1.0, x))).epsilon(1e-9));
  }
}

TEST_CASE("sampler moments") {
  std::mt19937_64 rng = make_stream(99, 0);
  constexpr int kN = 1000000;

  SUBCASE("normal mean") {
    const NoiseModel model = NoiseModel::normal(0.5);
    const double g = 7.0;
    double sum = 0.0;
    for (int i = 0; i < kN; ++i) sum += sample(model, g, rng);
    CHECK(std::abs(sum / kN - g) < 4.0 * 0.5 / 1000.0);
  }

  SUBCASE("vonmises circular mean") {
    const NoiseModel model = NoiseModel::von_mises(5.0);
    const double g = 0.9;
    double s = 0.0, c = 0.0;
    for (int i = 0; i < kN; ++i) {
      const double r = sample(model, g, rng);
      CHECK(r > -M_PI);
      CHECK(r <= M_PI);
      s += std::sin(r);
      c += std::cos(r);
    }
    CHECK(std::abs(std::atan2(s, c) - g) < 0.01);
  }

  SUBCASE("nakagami second moment tracks Upsilon = g^2") {
    const NoiseModel model = NoiseModel::nakagami(1.0);
    const double g = 3.0;
    double sum_sq = 0.0;
    for (int i = 0; i < kN; ++i) {
      const double r = sample(model, g, rng);
      sum_sq += r * r;
    }
    CHECK(sum_sq / kN == doctest::Approx(g * g).epsilon(0.01));
  }

  SUBCASE("gamma mean tracks g") {
    const NoiseModel model = NoiseModel::gamma_dist(5.0);
    const double g = 3.0;
    double sum = 0.0;
    for (int i = 0; i < kN; ++i) sum += sample(model, g, rng);
    CHECK(sum / kN == doctest::Approx(g).epsilon(0.005));
  }
}

namespace {

struct Support {
  double lo, hi;
};

Support support_of(const NoiseModel& model, double g) {
  switch (model.kind) {
    case NoiseKind::Normal:
      return {g - 12.0 * model.sigma, g + 12.0 * model.sigma};
    case NoiseKind::NormalPathloss: {
      const double sd = std::sqrt(model.beta * std::pow(g, model.alpha));
      return {g - 12.0 * sd, g + 12.0 * sd};
    }
    case NoiseKind::VonMises:
      return {-M_PI, M_PI};
    case NoiseKind::Nakagami:
      return {1e-12, g * std::sqrt(40.0 / model.m)};
    case NoiseKind::Gamma:
      return {1e-12, g * (1.0 + 40.0 / std::sqrt(model.kappa))};
  }
  return {0.0, 1.0};
}

double quadrature_mass(const NoiseModel& model, double g) {
  const Support s = support_of(model, g);
  return integrate(
      [&](double r) { return std::exp(log_pdf(model, r, g)); }, s.lo, s.hi,
      40000);
}

}  // namespace

TEST_CASE("densities integrate to one") {
  const double g = 2.5;
  std::vector<NoiseModel> models = {
      NoiseModel::normal(0.2),        NoiseModel::normal(1.5),
      NoiseModel::normal_pathloss(2.0, 0.1),
      NoiseModel::von_mises(0.7),     NoiseModel::von_mises(8.0),
      NoiseModel::von_mises(40.0),    NoiseModel::nakagami(0.5),
      NoiseModel::nakagami(1.0),      NoiseModel::nakagami(3.5),
      NoiseModel::gamma_dist(2.5),    NoiseModel::gamma_dist(6.0),
  };
  for (const auto& model : models) {
    CAPTURE(to_string(model.kind));
    CHECK(quadrature_mass(model, g) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("samples follow the density (Kolmogorov-Smirnov)") {
  constexpr int kN = 100000;
  const double g = 2.5;
  const double critical = 1.628 / std::sqrt(static_cast<double>(kN));  // 1%
  std::vector<NoiseModel> models = {
      NoiseModel::normal(0.4), NoiseModel::von_mises(3.0),
      NoiseModel::nakagami(1.5), NoiseModel::gamma_dist(4.0)};
  int stream = 1;
  for (const auto& model : models) {
    CAPTURE(to_string(model.kind));
    std::mt19937_64 rng = make_stream(123, stream++);
    std::vector<double> samples(kN);
    for (int i = 0; i < kN; ++i) samples[i] = sample(model, g, rng);
    std::sort(samples.begin(), samples.end());

    // CDF on a fine grid by cumulative Simpson, interpolated at samples.
    const Support s = support_of(model, g);
    constexpr int kGrid = 20001;
    const double h = (s.hi - s.lo) / (kGrid - 1);
    std::vector<double> cdf(kGrid, 0.0);
    double prev = std::exp(log_pdf(model, s.lo, g));
    for (int i = 1; i < kGrid; ++i) {
      const double x = s.lo + i * h;
      const double cur = std::exp(log_pdf(model, x, g));
      cdf[i] = cdf[i - 1] + 0.5 * h * (prev + cur);
      prev = cur;
    }
    double d_stat = 0.0;
    for (int i = 0; i < kN; ++i) {
      const double x = std::clamp(samples[i], s.lo, s.hi);
      const double pos = (x - s.lo) / h;
      const int j = std::min(static_cast<int>(pos), kGrid - 2);
      const double f = cdf[j] + (pos - j) * (cdf[j + 1] - cdf[j]);
      const double emp_hi = static_cast<double>(i + 1) / kN;
      const double emp_lo = static_cast<double>(i) / kN;
      d_stat = std::max({d_stat, std::abs(emp_hi - f), std::abs(f - emp_lo)});
    }
    CHECK(d_stat < critical);
  }
}

TEST_CASE("mc_fisher reproduces the consistent closed forms") {
  constexpr std::size_t kN = 400000;

  SUBCASE("normal: F = 1/sigma^2") {
    std::mt19937_64 rng = make_stream(7, 0);
    const McFisherResult mc =
        mc_fisher(NoiseModel::normal(0.5), 3.0, kN, 0.0, rng);
    CHECK(std::abs(mc.estimate - 4.0) <= 3.0 * mc.std_error);
  }

  SUBCASE("vonmises: F = omega I1/I0 (the likelihood-consistent value)") {
    std::mt19937_64 rng = make_stream(7, 1);
    const NoiseModel model = NoiseModel::von_mises(3.0);
    const McFisherResult mc = mc_fisher(model, 0.8, kN, 0.0, rng);
    const double exact = intensity(model, 0.8);
    CHECK(std::abs(mc.estimate - exact * exact) <= 3.0 * mc.std_error);
    // The published omega^2/2 = 4.5 is far outside the Monte Carlo band.
    CHECK(std::abs(mc.estimate - 4.5) > 30.0 * mc.std_error);
  }

  SUBCASE("pathloss: F = 1/(beta g^a) + a^2/(2 g^2)") {
    std::mt19937_64 rng = make_stream(7, 2);
    const NoiseModel model = NoiseModel::normal_pathloss(2.0, 0.05);
    const double g = 4.0;
    const McFisherResult mc = mc_fisher(model, g, kN, 0.0, rng);
    const double f = intensity(model, g);
    CHECK(std::abs(mc.estimate - f * f) <= 3.0 * mc.std_error);
  }

  SUBCASE("gamma: mean-coupled form matches, published form does not") {
    std::mt19937_64 rng = make_stream(7, 3);
    const NoiseModel model = NoiseModel::gamma_dist(5.0);
    const double g = 3.0;
    const McFisherResult mc = mc_fisher(model, g, kN, 0.0, rng);
    const double coupled = 5.0 / (g * g);
    const double published = 25.0 / (3.0 * g * g);
    CHECK(std::abs(mc.estimate - coupled) <= 3.0 * mc.std_error);
    CHECK(std::abs(mc.estimate - published) > 30.0 * mc.std_error);
  }
}

TEST_CASE("calibrated nakagami table nodes revalidate against mc_fisher") {
  const double g = 2.0;
  int stream = 10;
  for (double m : {1.0, 2.0, 6.0}) {
    std::mt19937_64 rng = make_stream(17, stream++);
    const NoiseModel model = NoiseModel::nakagami(m);
    const McFisherResult mc = mc_fisher(model, g, 1000000, 0.0, rng);
    const double table = intensity(model, g);  // calibrated default
    CHECK(std::abs(mc.estimate - table * table) <=
          3.0 * mc.std_error + 2e-3 * mc.estimate);
  }
}

TEST_CASE("mc_fisher reports a usable standard error") {
  std::mt19937_64 rng = make_stream(31, 0);
  const McFisherResult mc =
      mc_fisher(NoiseModel::normal(1.0), 2.0, 50000, 0.0, rng);
  CHECK(mc.std_error > 0.0);
  CHECK(mc.std_error < 0.05);
}
