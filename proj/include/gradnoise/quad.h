#pragma once

#include <optional>

#include "gradnoise/linsys.h"

namespace gradnoise {

struct RateRobustnessPoint {
  double rho = 0.0;
  double J = 0.0;
  std::optional<double> Jprime;
  AlgorithmSpec params;
};

enum class Region { kS1, kS2, kS3, kOutside };

const char* region_name(Region region);

struct StabilityVerdict {
  bool inside = false;
  Region region_label = Region::kOutside;
  /// Smallest slack among the defining strict inequalities; negative outside.
  double margin = 0.0;
};

/// Per-eigenvalue AG rate data: discriminant and spectral radius.
struct AgRateTerm {
  double delta = 0.0;
  double rho = 0.0;
};

double gd_rate(double alpha, double mu, double L);
double gd_robustness(double alpha, const QuadraticSpectrum& spectrum);
double gd_robustness_iterates(double alpha, const QuadraticSpectrum& spectrum);
double gd_lower_bound(double alpha, const QuadraticSpectrum& spectrum);

AgRateTerm ag_rate_term(double alpha, double beta, double lambda);
double ag_rate(double alpha, double beta, double mu, double L);

StabilityVerdict in_stability_region(double alpha, double beta, double mu,
                                     double L);

double ag_u(double alpha, double beta, double lambda);
double ag_u_iterates(double alpha, double beta, double lambda);
double ag_robustness(double alpha, double beta, const QuadraticSpectrum& spectrum);
double ag_robustness_iterates(double alpha, double beta,
                              const QuadraticSpectrum& spectrum);

/// d * max{u(mu), u(L)}, an upper bound over every spectrum in [mu, L]^d.
double ag_robustness_upper(double alpha, double beta, double mu, double L, int d);

/// (d - 1) * max{u(mu), u(L)} + min{u(mu), u(L)}.
double ag_robustness_worst_case(double alpha, double beta, double mu, double L,
                                int d);

/// Rate and both robustness measures for a GD or AG point.
RateRobustnessPoint evaluate_point(const AlgorithmSpec& spec,
                                   const QuadraticSpectrum& spectrum);

}  // namespace gradnoise
