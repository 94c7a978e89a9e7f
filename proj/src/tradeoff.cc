#include "gradnoise/tradeoff.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gradnoise/error.h"

namespace gradnoise {

namespace {

using Poly = std::vector<double>;  // Lowest degree first.

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRealTol = 1e-9;

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly out(a.size() + b.size() - 1, 0.0);
  for (size_t i = 0; i < a.size(); ++i) {
    for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

Poly poly_add(const Poly& a, const Poly& b, double scale_b) {
  Poly out(std::max(a.size(), b.size()), 0.0);
  for (size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (size_t i = 0; i < b.size(); ++i) out[i] += scale_b * b[i];
  return out;
}

struct DistinctEigenvalue {
  double lambda;
  int multiplicity;
};

std::vector<DistinctEigenvalue> distinct_eigenvalues(const QuadraticSpectrum& s) {
  std::vector<DistinctEigenvalue> out;
  for (double v : s.eigenvalues()) {
    if (!out.empty() && std::abs(v - out.back().lambda) <= 1e-12 * v) {
      ++out.back().multiplicity;
    } else {
      out.push_back({v, 1});
    }
  }
  return out;
}

// Stationarity of J + tau / (1 - (1 - alpha lambda_b)^2) after clearing the
// denominators prod_k (2 - alpha lambda_k)^2 and alpha^2.
Poly gd_stationarity_poly(const std::vector<DistinctEigenvalue>& eig, size_t b,
                          double tau) {
  std::vector<Poly> q;
  for (const auto& e : eig) {
    q.push_back({4.0, -4.0 * e.lambda, e.lambda * e.lambda});
  }
  auto product_except = [&](size_t skip) {
    Poly p{1.0};
    for (size_t k = 0; k < q.size(); ++k) {
      if (k != skip) p = poly_mul(p, q[k]);
    }
    return p;
  };
  Poly sum{0.0};
  for (size_t j = 0; j < eig.size(); ++j) {
    sum = poly_add(sum, product_except(j), eig[j].multiplicity);
  }
  const double lb = eig[b].lambda;
  const Poly lhs = poly_mul({0.0, 0.0, lb}, sum);
  const Poly rhs = poly_mul({2.0 * tau, -2.0 * tau * lb}, product_except(b));
  return poly_add(lhs, rhs, -1.0);
}

double gd_tau_objective(double alpha, double tau, const QuadraticSpectrum& s) {
  const double rho = gd_rate(alpha, s.mu(), s.L());
  return gd_robustness(alpha, s) + tau / (1.0 - rho * rho);
}

void check_kappa(double mu, double L) {
  if (!(mu > 0.0) || !(L >= mu)) {
    fail(ErrorCode::kInvalidArgument, "require 0 < mu <= L");
  }
  if (L / mu - 1.0 <= 1e-12) {
    fail(ErrorCode::kKappaOne, "eps parameterizations require kappa > 1");
  }
}

void check_grid(GridCounts grid) {
  if (grid.alpha < 8 || grid.beta < 8) {
    fail(ErrorCode::kInvalidArgument, "grid counts must be at least 8");
  }
}

// Pattern search over (alpha, beta) with 8 compass/diagonal directions and
// halving steps; beta is held fixed when hb == 0.
AgOptimum pattern_search(const std::function<double(double, double)>& f,
                         double a, double b, double fa, double ha, double hb) {
  const double ha_min = 1e-13 * std::max(a, ha);
  const double hb_min = 1e-13;
  static const int kDirs[8][2] = {{1, 0},  {-1, 0}, {0, 1},  {0, -1},
                                  {1, 1},  {1, -1}, {-1, 1}, {-1, -1}};
  double f_level = fa;
  int stalled_levels = 0;
  while (ha > ha_min || (hb > hb_min)) {
    double best = fa, best_a = a, best_b = b;
    for (const auto& dir : kDirs) {
      if (hb == 0.0 && dir[1] != 0) continue;
      const double ca = a + dir[0] * ha;
      const double cb = b + dir[1] * hb;
      if (!(ca > 0.0) || cb < 0.0) continue;
      const double fc = f(ca, cb);
      if (fc < best) {
        best = fc;
        best_a = ca;
        best_b = cb;
      }
    }
    if (best < fa) {
      a = best_a;
      b = best_b;
      fa = best;
      continue;
    }
    ha *= 0.5;
    hb *= 0.5;
    const double change = std::abs(f_level - fa) / std::max(std::abs(fa), 1e-300);
    stalled_levels = change < 1e-10 ? stalled_levels + 1 : 0;
    f_level = fa;
    if (stalled_levels >= 8) break;
  }
  AgOptimum out;
  out.alpha = a;
  out.beta = b;
  out.objective = fa;
  return out;
}

double inside_or_inf(double alpha, double beta, double mu, double L) {
  return in_stability_region(alpha, beta, mu, L).inside ? 0.0 : kInf;
}

// Smallest alpha (to bisection precision) with ag_rate <= target, searched
// on a uniform alpha scan; returns +inf when the scan finds none.
double first_feasible_alpha(double beta, double target, double mu, double L,
                            int scan) {
  auto feasible = [&](double a) {
    return in_stability_region(a, beta, mu, L).inside &&
           ag_rate(a, beta, mu, L) <= target;
  };
  const double h = 2.0 / L / (scan + 1);
  double lo = 0.0;
  for (int i = 1; i <= scan; ++i) {
    const double a = i * h;
    if (!feasible(a)) {
      lo = a;
      continue;
    }
    double hi = a;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (feasible(mid) ? hi : lo) = mid;
    }
    return hi;
  }
  return kInf;
}

}  // namespace

GdTauResult gd_optimal_stepsize_tau(double tau, const QuadraticSpectrum& spectrum) {
  if (!std::isfinite(tau) || tau < 0.0) {
    fail(ErrorCode::kInvalidArgument, "tau must be finite and nonnegative");
  }
  if (tau == 0.0) {
    fail(ErrorCode::kNoInteriorCandidate,
         "with tau = 0 the objective decreases toward alpha = 0");
  }
  const auto eig = distinct_eigenvalues(spectrum);
  if (static_cast<int>(eig.size()) > kExactPathMaxDistinct) {
    fail(ErrorCode::kExactPathUnsupported,
         "too many distinct eigenvalues for the polynomial path; use a grid search");
  }
  const double mu = spectrum.mu();
  const double L = spectrum.L();
  const double alpha_bar = 2.0 / (mu + L);

  std::vector<double> candidates{alpha_bar};
  std::vector<size_t> branches{0};
  if (eig.size() > 1) branches.push_back(eig.size() - 1);
  for (size_t b : branches) {
    Poly p = gd_stationarity_poly(eig, b, tau);
    while (p.size() > 1 && p.back() == 0.0) p.pop_back();
    if (p.size() < 2) continue;
    const std::vector<double> highest_first(p.rbegin(), p.rend());
    for (const auto& r : poly_roots(highest_first)) {
      const double a = r.real();
      if (std::abs(r.imag()) > kRealTol * std::max(1.0, std::abs(a))) continue;
      if (!(a > 0.0) || !(a < 2.0 / L)) continue;
      const bool on_mu_branch = a <= alpha_bar * (1.0 + 1e-12);
      const bool on_L_branch = a >= alpha_bar * (1.0 - 1e-12);
      if (b == 0 ? !on_mu_branch : !on_L_branch) continue;
      candidates.push_back(a);
    }
  }
  std::sort(candidates.begin(), candidates.end());
  double best_alpha = 0.0;
  double best_f = kInf;
  for (double a : candidates) {
    const double f = gd_tau_objective(a, tau, spectrum);
    if (!std::isfinite(best_f) ? f < best_f : f < best_f - 1e-14 * std::abs(best_f)) {
      best_f = f;
      best_alpha = a;
    }
  }
  if (!std::isfinite(best_f)) {
    fail(ErrorCode::kNoInteriorCandidate, "no finite candidate stepsize");
  }
  GdTauResult out;
  out.alpha_star = best_alpha;
  out.rho = gd_rate(best_alpha, mu, L);
  out.J = gd_robustness(best_alpha, spectrum);
  return out;
}

double gd_fastest_rate(double mu, double L) {
  const double kappa = L / mu;
  return (kappa - 1.0) / (kappa + 1.0);
}

double ag_fastest_rate(double mu, double L) {
  return std::sqrt(1.0 - 1.0 / std::sqrt(L / mu));
}

double gd_eps_max(double mu, double L) { return 2.0 / (L / mu - 1.0); }

double ag_eps_max(double mu, double L) {
  const double sk = std::sqrt(L / mu);
  return std::sqrt(sk / (sk - 1.0)) - 1.0;
}

double gd_alpha_for_eps(double eps, double mu, double L) {
  check_kappa(mu, L);
  if (!(eps >= 0.0) || !(eps < gd_eps_max(mu, L))) {
    fail(ErrorCode::kEpsOutOfRange, "eps must lie in [0, 2/(kappa-1))");
  }
  const double kappa = L / mu;
  return (2.0 - eps * (kappa - 1.0)) / (L + mu);
}

AgEpsParams ag_alpha_for_eps(double eps, double mu, double L) {
  check_kappa(mu, L);
  if (!(eps >= 0.0) || !(eps < ag_eps_max(mu, L))) {
    fail(ErrorCode::kEpsOutOfRange,
         "eps must lie in [0, sqrt(sqrt(kappa)/(sqrt(kappa)-1)) - 1)");
  }
  const double s = 1.0 - (1.0 + eps) * (1.0 + eps) * (1.0 - 1.0 / std::sqrt(L / mu));
  AgEpsParams out;
  out.alpha = s * s / mu;
  const double r = std::sqrt(out.alpha * mu);
  out.beta = (1.0 - r) / (1.0 + r);
  return out;
}

AgOptimum ag_grid_minimize(const std::function<double(double, double)>& objective,
                           double mu, double L, GridCounts grid,
                           const std::vector<double>& beta_values) {
  check_grid(grid);
  std::vector<double> betas = beta_values;
  if (betas.empty()) betas = linear_grid(0.0, 1.0, grid.beta);
  const double ha = 2.0 / L / (grid.alpha + 1);
  const double hb =
      betas.size() > 1 ? (betas.back() - betas.front()) / (betas.size() - 1) : 0.0;

  auto guarded = [&](double a, double b) {
    if (!std::isfinite(inside_or_inf(a, b, mu, L))) return kInf;
    const double f = objective(a, b);
    return std::isnan(f) ? kInf : f;
  };

  struct Seed {
    double f, a, b;
  };
  std::vector<Seed> seeds;
  for (int i = 0; i < grid.alpha; ++i) {
    const double a = ha * (i + 1);
    for (double b : betas) {
      const double f = guarded(a, b);
      if (std::isfinite(f)) seeds.push_back({f, a, b});
    }
  }
  if (seeds.empty()) {
    fail(ErrorCode::kEmptyGrid, "no grid point lies strictly inside the region");
  }
  std::stable_sort(seeds.begin(), seeds.end(),
                   [](const Seed& x, const Seed& y) { return x.f < y.f; });
  const size_t n_refine = std::min<size_t>(5, seeds.size());
  AgOptimum best;
  best.objective = kInf;
  for (size_t s = 0; s < n_refine; ++s) {
    AgOptimum cand =
        pattern_search(guarded, seeds[s].a, seeds[s].b, seeds[s].f, ha, hb);
    if (cand.objective < best.objective) best = cand;
  }
  best.rho = ag_rate(best.alpha, best.beta, mu, L);
  return best;
}

AgOptimum ag_optimize_exact(double tau, const QuadraticSpectrum& spectrum,
                            GridCounts grid) {
  if (!std::isfinite(tau) || tau < 0.0) {
    fail(ErrorCode::kInvalidArgument, "tau must be finite and nonnegative");
  }
  const double mu = spectrum.mu();
  const double L = spectrum.L();
  auto f = [&](double a, double b) {
    const double rho = ag_rate(a, b, mu, L);
    if (!(rho < 1.0 - kStableTol)) return kInf;
    double J = 0.0;
    for (double lambda : spectrum.eigenvalues()) J += ag_u(a, b, lambda);
    return J + tau / (1.0 - rho * rho);
  };
  AgOptimum out = ag_grid_minimize(f, mu, L, grid);
  out.J = ag_robustness(out.alpha, out.beta, spectrum);
  return out;
}

AgOptimum ag_optimize_ubound(double tau, double mu, double L, int d,
                             GridCounts grid) {
  if (!std::isfinite(tau) || tau < 0.0) {
    fail(ErrorCode::kInvalidArgument, "tau must be finite and nonnegative");
  }
  if (d < 1) fail(ErrorCode::kInvalidArgument, "d must be at least 1");
  auto f = [&](double a, double b) {
    const double rho = ag_rate(a, b, mu, L);
    if (!(rho < 1.0 - kStableTol)) return kInf;
    return d * std::max(ag_u(a, b, mu), ag_u(a, b, L)) + tau / (1.0 - rho * rho);
  };
  AgOptimum out = ag_grid_minimize(f, mu, L, grid);
  out.J = ag_robustness_upper(out.alpha, out.beta, mu, L, d);
  return out;
}

AgOptimum ag_optimize_rate_constrained(double rho_target,
                                       const QuadraticSpectrum& spectrum,
                                       GridCounts grid) {
  check_grid(grid);
  if (!(rho_target > 0.0) || !(rho_target < 1.0)) {
    fail(ErrorCode::kInvalidArgument, "target rate must lie in (0, 1)");
  }
  const double mu = spectrum.mu();
  const double L = spectrum.L();
  const int scan = std::max(grid.alpha, 400);
  auto J_at = [&](double a, double b) {
    double J = 0.0;
    for (double lambda : spectrum.eigenvalues()) J += ag_u(a, b, lambda);
    return J;
  };
  // Robustness along the lower rate boundary alpha_lo(beta).
  auto boundary = [&](double b) {
    if (b < 0.0) return kInf;
    const double a = first_feasible_alpha(b, rho_target, mu, L, scan);
    return std::isfinite(a) ? J_at(a, b) : kInf;
  };

  AgOptimum best;
  best.objective = kInf;
  auto consider = [&](double a, double b) {
    if (!std::isfinite(a) || !in_stability_region(a, b, mu, L).inside) return;
    if (ag_rate(a, b, mu, L) > rho_target) return;
    const double J = J_at(a, b);
    if (J < best.objective) {
      best.objective = J;
      best.alpha = a;
      best.beta = b;
    }
  };

  // GD at the target rate, embedded as beta = 0.
  if (rho_target >= gd_fastest_rate(mu, L)) {
    consider((1.0 - rho_target) / mu, 0.0);
  }
  const std::vector<double> betas = linear_grid(0.0, 1.0, grid.beta);
  const double ha = 2.0 / L / (grid.alpha + 1);
  double best_boundary_b = -1.0, best_boundary_f = kInf;
  for (double b : betas) {
    const double f = boundary(b);
    if (f < best_boundary_f) {
      best_boundary_f = f;
      best_boundary_b = b;
    }
    for (int i = 0; i < grid.alpha; ++i) consider(ha * (i + 1), b);
  }
  if (std::isfinite(best_boundary_f)) {
    // One-dimensional pattern search in beta along the boundary.
    double b = best_boundary_b, fb = best_boundary_f;
    double h = 1.0 / (grid.beta - 1);
    while (h > 1e-13) {
      const double up = boundary(b + h);
      const double down = boundary(b - h);
      if (up < fb && up <= down) {
        b += h;
        fb = up;
      } else if (down < fb) {
        b -= h;
        fb = down;
      } else {
        h *= 0.5;
      }
    }
    consider(first_feasible_alpha(b, rho_target, mu, L, scan), b);
  }
  if (!std::isfinite(best.objective)) {
    fail(ErrorCode::kEmptyGrid, "no stable point attains the target rate");
  }
  best.rho = ag_rate(best.alpha, best.beta, mu, L);
  best.J = best.objective;
  return best;
}

const char* provenance_name(Provenance provenance) {
  switch (provenance) {
    case Provenance::kExactQuad: return "EXACT_QUAD";
    case Provenance::kUpperBound: return "UPPER_BOUND";
    case Provenance::kSdpCert: return "SDP_CERT";
  }
  return "EXACT_QUAD";
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (n < 1 || !(lo > 0.0) || !(hi >= lo)) {
    fail(ErrorCode::kInvalidArgument, "log grid needs 0 < lo <= hi and n >= 1");
  }
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    out[i] = std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)));
  }
  return out;
}

std::vector<double> linear_grid(double lo, double hi, int n) {
  if (n < 1 || !(hi >= lo)) {
    fail(ErrorCode::kInvalidArgument, "linear grid needs lo <= hi and n >= 1");
  }
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    out[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  }
  return out;
}

std::vector<double> default_tau_grid() { return log_grid(1e-4, 1e4, 60); }

ParetoCurve tradeoff_sweep(const QuadraticSpectrum& spectrum,
                           const SweepConfig& config) {
  if (config.values.empty()) {
    fail(ErrorCode::kInvalidArgument, "sweep has no parameter values");
  }
  const double mu = spectrum.mu();
  const double L = spectrum.L();
  ParetoCurve curve;
  curve.method = config.method;
  curve.provenance = config.method == Method::kAG && config.upper_bound
                         ? Provenance::kUpperBound
                         : Provenance::kExactQuad;
  std::vector<std::pair<RateRobustnessPoint, double>> rows;
  for (double v : config.values) {
    RateRobustnessPoint point;
    if (config.method == Method::kGD) {
      const double alpha = config.mode == TradeoffMode::kTauPenalized
                               ? gd_optimal_stepsize_tau(v, spectrum).alpha_star
                               : gd_alpha_for_eps(v, mu, L);
      point = evaluate_point(AlgorithmSpec::gd(alpha), spectrum);
    } else if (config.mode == TradeoffMode::kEpsConstrained) {
      const AgEpsParams p = ag_alpha_for_eps(v, mu, L);
      point = evaluate_point(AlgorithmSpec::ag(p.alpha, p.beta), spectrum);
    } else if (config.upper_bound) {
      const AgOptimum opt = ag_optimize_ubound(v, mu, L, spectrum.d(), config.grid);
      point.rho = opt.rho;
      point.J = opt.J;
      point.params = AlgorithmSpec::ag(opt.alpha, opt.beta);
    } else {
      const AgOptimum opt = ag_optimize_exact(v, spectrum, config.grid);
      point = evaluate_point(AlgorithmSpec::ag(opt.alpha, opt.beta), spectrum);
    }
    rows.emplace_back(point, v);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) {
    return x.first.rho < y.first.rho;
  });
  for (const auto& [point, v] : rows) {
    curve.points.push_back(point);
    curve.params.push_back(v);
  }
  return curve;
}

ParetoCurve pareto_filter(const ParetoCurve& curve) {
  std::vector<size_t> order(curve.points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t i, size_t j) {
    const auto& p = curve.points[i];
    const auto& q = curve.points[j];
    return p.rho < q.rho || (p.rho == q.rho && p.J < q.J);
  });
  ParetoCurve out;
  out.method = curve.method;
  out.provenance = curve.provenance;
  double best_J = kInf;
  for (size_t i : order) {
    if (curve.points[i].J < best_J) {
      best_J = curve.points[i].J;
      out.points.push_back(curve.points[i]);
      if (i < curve.params.size()) out.params.push_back(curve.params[i]);
    }
  }
  return out;
}

ParetoCurve pareto_curve(const QuadraticSpectrum& spectrum,
                         const SweepConfig& config) {
  return pareto_filter(tradeoff_sweep(spectrum, config));
}

}  // namespace gradnoise
