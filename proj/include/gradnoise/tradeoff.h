#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "gradnoise/quad.h"

namespace gradnoise {

/// Roots of c[0] x^n + c[1] x^(n-1) + ... + c[n] by Aberth-Ehrlich iteration.
std::vector<std::complex<double>> poly_roots(const std::vector<double>& coefficients);

struct GdTauResult {
  double alpha_star = 0.0;
  double rho = 0.0;
  double J = 0.0;
};

/// Largest number of distinct eigenvalues handled by the polynomial path.
inline constexpr int kExactPathMaxDistinct = 8;

/// Minimizes J(alpha) + tau / (1 - rho(alpha)^2) over (0, 2/L) by solving the
/// first-order conditions on both branches of rho as polynomial equations.
GdTauResult gd_optimal_stepsize_tau(double tau, const QuadraticSpectrum& spectrum);

/// Smaller stepsize with gd_rate = (1 + eps) (kappa - 1) / (kappa + 1).
double gd_alpha_for_eps(double eps, double mu, double L);

struct AgEpsParams {
  double alpha = 0.0;
  double beta = 0.0;
};

/// Parameters with sqrt(1 - sqrt(alpha mu)) = (1 + eps) sqrt(1 - 1/sqrt(kappa)).
AgEpsParams ag_alpha_for_eps(double eps, double mu, double L);

/// Fastest certified rates used by the eps parameterizations.
double gd_fastest_rate(double mu, double L);
double ag_fastest_rate(double mu, double L);
double gd_eps_max(double mu, double L);
double ag_eps_max(double mu, double L);

struct GridCounts {
  int alpha = 60;
  int beta = 60;
};

struct AgOptimum {
  double alpha = 0.0;
  double beta = 0.0;
  double rho = 0.0;
  /// Robustness term of the objective: exact J or the upper bound Jbar.
  double J = 0.0;
  double objective = 0.0;
};

/// Grid search over the interior of the stability region followed by pattern
/// search refinement. Points where objective returns +inf are skipped.
/// beta_values overrides the default beta grid on [0, 1] when nonempty.
AgOptimum ag_grid_minimize(
    const std::function<double(double, double)>& objective, double mu, double L,
    GridCounts grid, const std::vector<double>& beta_values = {});

AgOptimum ag_optimize_exact(double tau, const QuadraticSpectrum& spectrum,
                            GridCounts grid);

AgOptimum ag_optimize_ubound(double tau, double mu, double L, int d,
                             GridCounts grid);

/// Minimizes exact AG robustness subject to ag_rate <= rho_target.
/// The returned point never has a larger J than the GD point at that rate.
AgOptimum ag_optimize_rate_constrained(double rho_target,
                                       const QuadraticSpectrum& spectrum,
                                       GridCounts grid);

enum class TradeoffMode { kTauPenalized, kEpsConstrained };
enum class Provenance { kExactQuad, kUpperBound, kSdpCert };

const char* provenance_name(Provenance provenance);

struct ParetoCurve {
  std::vector<RateRobustnessPoint> points;
  /// Sweep parameter (tau or eps) for each point.
  std::vector<double> params;
  Method method = Method::kGD;
  Provenance provenance = Provenance::kExactQuad;
};

struct SweepConfig {
  Method method = Method::kGD;
  TradeoffMode mode = TradeoffMode::kTauPenalized;
  /// tau values (kTauPenalized) or eps values (kEpsConstrained).
  std::vector<double> values;
  GridCounts grid;
  /// AG only: optimize the dimension-free upper bound instead of exact J.
  bool upper_bound = false;
};

/// n log-spaced points in [lo, hi].
std::vector<double> log_grid(double lo, double hi, int n);
/// n evenly spaced points in [lo, hi].
std::vector<double> linear_grid(double lo, double hi, int n);
/// 60 log-spaced tau values in [1e-4, 1e4].
std::vector<double> default_tau_grid();

/// Evaluates the sweep and returns the points sorted by rho, unfiltered.
ParetoCurve tradeoff_sweep(const QuadraticSpectrum& spectrum,
                           const SweepConfig& config);

/// Removes dominated points and sorts by rho ascending.
ParetoCurve pareto_filter(const ParetoCurve& curve);

/// tradeoff_sweep followed by pareto_filter.
ParetoCurve pareto_curve(const QuadraticSpectrum& spectrum,
                         const SweepConfig& config);

}  // namespace gradnoise
