#include "gradnoise/quad.h"

#include <algorithm>
#include <cmath>

#include "gradnoise/error.h"

namespace gradnoise {

namespace {

constexpr double kDenominatorGuard = 1e-14;

void check_gd_alpha(double alpha, const QuadraticSpectrum& spectrum) {
  if (!(alpha > 0.0) || !(alpha < 2.0 / spectrum.L())) {
    fail(ErrorCode::kOutOfRange, "alpha must lie in (0, 2/L)");
  }
}

void check_mu_L(double mu, double L) {
  if (!(mu > 0.0) || !(L >= mu) || !std::isfinite(L)) {
    fail(ErrorCode::kInvalidArgument, "require 0 < mu <= L");
  }
}

void require_stable(double alpha, double beta, const QuadraticSpectrum& spectrum) {
  if (!in_stability_region(alpha, beta, spectrum.mu(), spectrum.L()).inside) {
    fail(ErrorCode::kNotStable, "(alpha, beta) lies outside the stability region");
  }
}

}  // namespace

const char* region_name(Region region) {
  switch (region) {
    case Region::kS1: return "S1";
    case Region::kS2: return "S2";
    case Region::kS3: return "S3";
    case Region::kOutside: return "OUTSIDE";
  }
  return "OUTSIDE";
}

double gd_rate(double alpha, double mu, double L) {
  return std::max(std::abs(1.0 - alpha * mu), std::abs(1.0 - alpha * L));
}

double gd_robustness(double alpha, const QuadraticSpectrum& spectrum) {
  check_gd_alpha(alpha, spectrum);
  double sum = 0.0;
  for (double lambda : spectrum.eigenvalues()) {
    sum += 1.0 / (2.0 * (2.0 - alpha * lambda));
  }
  return alpha * sum;
}

double gd_robustness_iterates(double alpha, const QuadraticSpectrum& spectrum) {
  check_gd_alpha(alpha, spectrum);
  double sum = 0.0;
  for (double lambda : spectrum.eigenvalues()) {
    sum += 1.0 / (lambda * (2.0 - alpha * lambda));
  }
  return alpha * sum;
}

double gd_lower_bound(double alpha, const QuadraticSpectrum& spectrum) {
  check_gd_alpha(alpha, spectrum);
  const double rho = gd_rate(alpha, spectrum.mu(), spectrum.L());
  double sum = 0.0;
  for (double lambda : spectrum.eigenvalues()) sum += 1.0 / (8.0 * lambda);
  return (1.0 - rho * rho) * sum;
}

AgRateTerm ag_rate_term(double alpha, double beta, double lambda) {
  const double d = 1.0 - alpha * lambda;
  AgRateTerm term;
  term.delta = (1.0 + beta) * (1.0 + beta) * d * d - 4.0 * beta * d;
  if (term.delta >= 0.0) {
    term.rho = 0.5 * std::abs((1.0 + beta) * d) + 0.5 * std::sqrt(term.delta);
  } else {
    term.rho = std::sqrt(beta * d);
  }
  return term;
}

double ag_rate(double alpha, double beta, double mu, double L) {
  return std::max(ag_rate_term(alpha, beta, mu).rho,
                  ag_rate_term(alpha, beta, L).rho);
}

// For lambda in [mu, L], the AG block z^2 - (1+b)d z + b d, d = 1 - a lambda,
// is Schur stable iff -1/(1+2b) < d < 1 and b d < 1. The lower bound binds
// at lambda = L and the upper bounds at lambda = mu.
StabilityVerdict in_stability_region(double alpha, double beta, double mu,
                                     double L) {
  check_mu_L(mu, L);
  StabilityVerdict verdict;
  if (!(alpha >= 0.0) || !(beta >= 0.0)) {
    verdict.margin = std::min(alpha, beta);
    return verdict;
  }
  const double d_mu = 1.0 - alpha * mu;
  const double d_L = 1.0 - alpha * L;
  const double slack_step = 1.0 - d_mu;
  const double slack_low = d_L + 1.0 / (1.0 + 2.0 * beta);
  const double slack_momentum = 1.0 - beta * d_mu;
  verdict.margin = std::min({slack_step, slack_low, slack_momentum});
  if (!(verdict.margin > 0.0)) {
    verdict.margin = std::min(verdict.margin, 0.0);
    return verdict;
  }
  verdict.inside = true;
  if (alpha <= 1.0 / L) {
    verdict.region_label = Region::kS1;
  } else if (alpha <= std::min(2.0 / L, 1.0 / mu)) {
    verdict.region_label = Region::kS2;
  } else {
    verdict.region_label = Region::kS3;
  }
  return verdict;
}

double ag_u(double alpha, double beta, double lambda) {
  const double d = 1.0 - alpha * lambda;
  const double f1 = 1.0 - beta * d;
  const double f2 = 2.0 + 2.0 * beta - alpha * lambda * (1.0 + 2.0 * beta);
  if (!(f1 > kDenominatorGuard) || !(f2 > kDenominatorGuard)) {
    fail(ErrorCode::kDivergent, "robustness denominator is not positive");
  }
  return alpha * (1.0 + beta * d) / (2.0 * f1 * f2);
}

double ag_u_iterates(double alpha, double beta, double lambda) {
  if (!(lambda > kDenominatorGuard)) {
    fail(ErrorCode::kDivergent, "lambda must be positive");
  }
  return 2.0 * ag_u(alpha, beta, lambda) / lambda;
}

double ag_robustness(double alpha, double beta, const QuadraticSpectrum& spectrum) {
  require_stable(alpha, beta, spectrum);
  double sum = 0.0;
  for (double lambda : spectrum.eigenvalues()) sum += ag_u(alpha, beta, lambda);
  return sum;
}

double ag_robustness_iterates(double alpha, double beta,
                              const QuadraticSpectrum& spectrum) {
  require_stable(alpha, beta, spectrum);
  double sum = 0.0;
  for (double lambda : spectrum.eigenvalues()) {
    sum += ag_u_iterates(alpha, beta, lambda);
  }
  return sum;
}

double ag_robustness_upper(double alpha, double beta, double mu, double L, int d) {
  if (d < 1) fail(ErrorCode::kInvalidArgument, "d must be at least 1");
  if (!in_stability_region(alpha, beta, mu, L).inside) {
    fail(ErrorCode::kNotStable, "(alpha, beta) lies outside the stability region");
  }
  return d * std::max(ag_u(alpha, beta, mu), ag_u(alpha, beta, L));
}

double ag_robustness_worst_case(double alpha, double beta, double mu, double L,
                                int d) {
  if (d < 1) fail(ErrorCode::kInvalidArgument, "d must be at least 1");
  if (!in_stability_region(alpha, beta, mu, L).inside) {
    fail(ErrorCode::kNotStable, "(alpha, beta) lies outside the stability region");
  }
  const double a = ag_u(alpha, beta, mu);
  const double b = ag_u(alpha, beta, L);
  return (d - 1) * std::max(a, b) + std::min(a, b);
}

RateRobustnessPoint evaluate_point(const AlgorithmSpec& spec,
                                   const QuadraticSpectrum& spectrum) {
  spec.validate();
  RateRobustnessPoint point;
  point.params = spec;
  if (spec.method == Method::kGD) {
    point.rho = gd_rate(spec.alpha, spectrum.mu(), spectrum.L());
    point.J = gd_robustness(spec.alpha, spectrum);
    point.Jprime = gd_robustness_iterates(spec.alpha, spectrum);
  } else {
    point.rho = ag_rate(spec.alpha, spec.beta, spectrum.mu(), spectrum.L());
    point.J = ag_robustness(spec.alpha, spec.beta, spectrum);
    point.Jprime = ag_robustness_iterates(spec.alpha, spec.beta, spectrum);
  }
  return point;
}

}  // namespace gradnoise
