#include "rbl/intensity.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace rbl {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

void require_positive_g(double g, const char* what) {
  if (!(g > 0.0)) {
    throw Error(ErrorCode::InvalidParameter,
                std::string(what) + " requires a positive dissimilarity g");
  }
}

// Frozen mc_fisher calibration of the Nakagami intensity under the
// Upsilon = g^2 coupling: F * Upsilon against the shape m. Produced with
// mc_fisher at 2e7 samples per node (seed 0x6e616b61), linearly
// interpolated; tests/test_intensity.cpp revalidates nodes against a fresh
// mc_fisher run.
constexpr std::array<std::array<double, 2>, 12> kNakagamiFisherTable = {{
    {0.5, 2.0025},
    {0.75, 2.99886},
    {1.0, 3.99989},
    {1.5, 6.00186},
    {2.0, 7.99272},
    {3.0, 11.997},
    {4.0, 16.0002},
    {6.0, 23.9903},
    {8.0, 31.9935},
    {12.0, 48.011},
    {16.0, 64.0124},
    {24.0, 96.0255},
}};

// Interpolated F * Upsilon for the Nakagami shape m (linear extrapolation
// beyond the table ends).
double nakagami_fisher_upsilon(double m) {
  const auto& tab = kNakagamiFisherTable;
  std::size_t hi = 1;
  while (hi + 1 < tab.size() && tab[hi][0] < m) ++hi;
  const double m0 = tab[hi - 1][0], f0 = tab[hi - 1][1];
  const double m1 = tab[hi][0], f1 = tab[hi][1];
  return f0 + (f1 - f0) * (m - m0) / (m1 - m0);
}

double nakagami_intensity(const NoiseModel& model, double upsilon,
                          NakagamiIntensityMode mode) {
  const double m = model.m;
  switch (mode) {
    case NakagamiIntensityMode::ClosedFormA:
      return std::sqrt((4.0 * m + 1.0) / upsilon);
    case NakagamiIntensityMode::ClosedFormB:
      if (m <= 1.0) {
        throw Error(ErrorCode::InvalidParameter,
                    "Nakagami closed form B requires m > 1");
      }
      return std::sqrt(m * (4.0 * m - 3.0) / (upsilon * (m - 1.0)));
    case NakagamiIntensityMode::Calibrated:
      return std::sqrt(nakagami_fisher_upsilon(m) / upsilon);
    case NakagamiIntensityMode::Strict: {
      const double oracle = nakagami_fisher_upsilon(m);
      const double a = 4.0 * m + 1.0;
      const double b =
          m > 1.0 ? m * (4.0 * m - 3.0) / (m - 1.0)
                  : std::numeric_limits<double>::infinity();
      constexpr double kRelTol = 0.10;
      if (std::abs(a - oracle) > kRelTol * oracle ||
          std::abs(b - oracle) > kRelTol * oracle) {
        throw Error(ErrorCode::UnresolvedIntensity,
                    "Nakagami closed forms disagree with the calibrated "
                    "value beyond 10% at m = " +
                        std::to_string(m));
      }
      return std::sqrt(oracle / upsilon);
    }
  }
  throw Error(ErrorCode::InvalidParameter, "unknown Nakagami intensity mode");
}

}  // namespace

const char* to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::Normal: return "normal";
    case NoiseKind::NormalPathloss: return "normal_pathloss";
    case NoiseKind::VonMises: return "vonmises";
    case NoiseKind::Nakagami: return "nakagami";
    case NoiseKind::Gamma: return "gamma";
  }
  return "unknown";
}

NoiseModel NoiseModel::normal(double sigma) {
  NoiseModel model;
  model.kind = NoiseKind::Normal;
  model.sigma = sigma;
  model.validate();
  return model;
}

NoiseModel NoiseModel::normal_pathloss(double alpha, double beta) {
  NoiseModel model;
  model.kind = NoiseKind::NormalPathloss;
  model.alpha = alpha;
  model.beta = beta;
  model.validate();
  return model;
}

NoiseModel NoiseModel::von_mises(double omega) {
  NoiseModel model;
  model.kind = NoiseKind::VonMises;
  model.omega = omega;
  model.validate();
  return model;
}

NoiseModel NoiseModel::nakagami(double m) {
  NoiseModel model;
  model.kind = NoiseKind::Nakagami;
  model.m = m;
  model.validate();
  return model;
}

NoiseModel NoiseModel::gamma_dist(double kappa) {
  NoiseModel model;
  model.kind = NoiseKind::Gamma;
  model.kappa = kappa;
  model.validate();
  return model;
}

void NoiseModel::validate() const {
  switch (kind) {
    case NoiseKind::Normal:
      if (!(sigma > 0.0)) {
        throw Error(ErrorCode::InvalidParameter, "Normal sigma must be > 0");
      }
      return;
    case NoiseKind::NormalPathloss:
      if (!(alpha >= 0.0) || !(beta > 0.0)) {
        throw Error(ErrorCode::InvalidParameter,
                    "NormalPathloss requires alpha >= 0 and beta > 0");
      }
      return;
    case NoiseKind::VonMises:
      if (!(omega > 0.0)) {
        throw Error(ErrorCode::InvalidParameter, "VonMises omega must be > 0");
      }
      return;
    case NoiseKind::Nakagami:
      if (!(m >= 0.5)) {
        throw Error(ErrorCode::InvalidParameter, "Nakagami m must be >= 1/2");
      }
      return;
    case NoiseKind::Gamma:
      if (!(kappa > 2.0)) {
        throw Error(ErrorCode::InvalidParameter, "Gamma kappa must be > 2");
      }
      return;
  }
  throw Error(ErrorCode::InvalidParameter, "unknown noise kind");
}

double intensity(const NoiseModel& model, double g,
                 const IntensityOptions& options) {
  model.validate();
  switch (model.kind) {
    case NoiseKind::Normal:
      return 1.0 / model.sigma;
    case NoiseKind::NormalPathloss: {
      require_positive_g(g, "NormalPathloss");
      const double var = model.beta * std::pow(g, model.alpha);
      return std::sqrt(1.0 / var + model.alpha * model.alpha / (2.0 * g * g));
    }
    case NoiseKind::VonMises:
      switch (options.von_mises) {
        case VonMisesIntensityMode::ClosedForm:
          return model.omega / std::sqrt(2.0);
        case VonMisesIntensityMode::Exact:
          return std::sqrt(model.omega *
                           std::exp(log_bessel_i1(model.omega) -
                                    log_bessel_i0(model.omega)));
      }
      throw Error(ErrorCode::InvalidParameter,
                  "unknown VonMises intensity mode");
    case NoiseKind::Nakagami: {
      require_positive_g(g, "Nakagami");
      return nakagami_intensity(model, g * g, options.nakagami);
    }
    case NoiseKind::Gamma: {
      require_positive_g(g, "Gamma");
      const double upsilon = g / model.kappa;
      switch (options.gamma) {
        case GammaIntensityMode::ClosedForm:
          return std::sqrt(1.0 / (upsilon * upsilon * (model.kappa - 2.0)));
        case GammaIntensityMode::MeanCoupled:
          return std::sqrt(1.0 / (model.kappa * upsilon * upsilon));
      }
      throw Error(ErrorCode::InvalidParameter, "unknown Gamma intensity mode");
    }
  }
  throw Error(ErrorCode::InvalidParameter, "unknown noise kind");
}

double log_bessel_i0(double x) {
  x = std::abs(x);
  if (x <= 25.0) {
    // Power series sum_k (x/2)^(2k) / (k!)^2; converges fast at this range.
    const double q = 0.25 * x * x;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 80; ++k) {
      term *= q / (static_cast<double>(k) * k);
      sum += term;
      if (term < sum * 1e-17) break;
    }
    return std::log(sum);
  }
  // Asymptotic expansion I0(x) ~ e^x / sqrt(2 pi x) * (1 + 1/(8x) + ...).
  const double ix = 1.0 / (8.0 * x);
  const double corr =
      1.0 + ix * (1.0 + ix * (4.5 + ix * (37.5 + ix * 459.375)));
  return x - 0.5 * std::log(kTwoPi * x) + std::log(corr);
}

double log_bessel_i1(double x) {
  x = std::abs(x);
  if (x <= 25.0) {
    // I1(x) = (x/2) sum_k (x^2/4)^k / (k! (k+1)!).
    const double q = 0.25 * x * x;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 80; ++k) {
      term *= q / (static_cast<double>(k) * (k + 1));
      sum += term;
      if (term < sum * 1e-17) break;
    }
    return std::log(0.5 * x) + std::log(sum);
  }
  const double ix = 1.0 / (8.0 * x);
  const double corr =
      1.0 + ix * (-3.0 + ix * (-7.5 + ix * (-52.5 + ix * -590.625)));
  return x - 0.5 * std::log(kTwoPi * x) + std::log(corr);
}

double log_pdf(const NoiseModel& model, double r, double g) {
  model.validate();
  switch (model.kind) {
    case NoiseKind::Normal: {
      const double z = (r - g) / model.sigma;
      return -0.5 * std::log(kTwoPi) - std::log(model.sigma) - 0.5 * z * z;
    }
    case NoiseKind::NormalPathloss: {
      require_positive_g(g, "NormalPathloss");
      const double var = model.beta * std::pow(g, model.alpha);
      const double z = r - g;
      return -0.5 * std::log(kTwoPi * var) - 0.5 * z * z / var;
    }
    case NoiseKind::VonMises: {
      if (r <= -M_PI || r > M_PI) {
        throw Error(ErrorCode::OutOfSupport,
                    "VonMises measurement outside (-pi, pi]");
      }
      return model.omega * std::cos(r - g) - std::log(kTwoPi) -
             log_bessel_i0(model.omega);
    }
    case NoiseKind::Nakagami: {
      require_positive_g(g, "Nakagami");
      if (!(r > 0.0)) {
        throw Error(ErrorCode::OutOfSupport, "Nakagami measurement must be > 0");
      }
      const double upsilon = g * g;
      const double m = model.m;
      return std::log(2.0) + m * std::log(m) - std::lgamma(m) -
             m * std::log(upsilon) + (2.0 * m - 1.0) * std::log(r) -
             m * r * r / upsilon;
    }
    case NoiseKind::Gamma: {
      require_positive_g(g, "Gamma");
      if (!(r > 0.0)) {
        throw Error(ErrorCode::OutOfSupport, "Gamma measurement must be > 0");
      }
      const double upsilon = g / model.kappa;
      return -std::lgamma(model.kappa) - model.kappa * std::log(upsilon) +
             (model.kappa - 1.0) * std::log(r) - r / upsilon;
    }
  }
  throw Error(ErrorCode::InvalidParameter, "unknown noise kind");
}

namespace {

// Best-Fisher rejection sampler for the von Mises distribution centered at
// mu with concentration omega; the result is wrapped into (-pi, pi].
double sample_von_mises(double mu, double omega, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (omega < 1e-8) {
    double theta = mu + M_PI * (2.0 * unif(rng) - 1.0);
    theta = std::remainder(theta, kTwoPi);
    return theta <= -M_PI ? M_PI : theta;
  }
  const double tau = 1.0 + std::sqrt(1.0 + 4.0 * omega * omega);
  const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * omega);
  const double rr = (1.0 + rho * rho) / (2.0 * rho);
  double f = 0.0;
  for (;;) {
    const double u1 = unif(rng);
    const double z = std::cos(M_PI * u1);
    f = (1.0 + rr * z) / (rr + z);
    const double c = omega * (rr - f);
    const double u2 = unif(rng);
    if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) break;
  }
  const double u3 = unif(rng);
  double theta = mu + (u3 > 0.5 ? 1.0 : -1.0) * std::acos(f);
  theta = std::remainder(theta, kTwoPi);
  return theta <= -M_PI ? M_PI : theta;
}

}  // namespace

double sample(const NoiseModel& model, double g, std::mt19937_64& rng) {
  switch (model.kind) {
    case NoiseKind::Normal: {
      std::normal_distribution<double> dist(g, model.sigma);
      return dist(rng);
    }
    case NoiseKind::NormalPathloss: {
      require_positive_g(g, "NormalPathloss");
      std::normal_distribution<double> dist(
          g, std::sqrt(model.beta * std::pow(g, model.alpha)));
      return dist(rng);
    }
    case NoiseKind::VonMises:
      return sample_von_mises(g, model.omega, rng);
    case NoiseKind::Nakagami: {
      require_positive_g(g, "Nakagami");
      std::gamma_distribution<double> dist(model.m, g * g / model.m);
      return std::sqrt(dist(rng));
    }
    case NoiseKind::Gamma: {
      require_positive_g(g, "Gamma");
      std::gamma_distribution<double> dist(model.kappa, g / model.kappa);
      return dist(rng);
    }
  }
  throw Error(ErrorCode::InvalidParameter, "unknown noise kind");
}

McFisherResult mc_fisher(const NoiseModel& model, double g,
                         std::size_t n_samples, double fd_step,
                         std::mt19937_64& rng) {
  if (fd_step <= 0.0) fd_step = 1e-4 * std::max(1.0, std::abs(g));
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double r = sample(model, g, rng);
    const double score =
        (log_pdf(model, r, g + fd_step) - log_pdf(model, r, g - fd_step)) /
        (2.0 * fd_step);
    const double s2 = score * score;
    sum += s2;
    sum_sq += s2 * s2;
  }
  const double n = static_cast<double>(n_samples);
  McFisherResult result;
  result.estimate = sum / n;
  const double var = std::max(0.0, sum_sq / n - result.estimate * result.estimate);
  result.std_error = std::sqrt(var / n);
  return result;
}

}  // namespace rbl
