#include "gradnoise/cli/app.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gradnoise/cert.h"
#include "gradnoise/error.h"
#include "gradnoise/quad.h"
#include "gradnoise/sim.h"
#include "gradnoise/tradeoff.h"

namespace gradnoise::cli {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void invalid(const std::string& message) {
  fail(ErrorCode::kInvalidArgument, message);
}

double parse_real(const std::string& token) {
  size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    invalid("not a number: '" + token + "'");
  }
  if (used != token.size()) invalid("not a number: '" + token + "'");
  if (!std::isfinite(v)) invalid("non-finite value: '" + token + "'");
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) invalid("cannot read file '" + path + "'");
  std::ostringstream ss;
  std::string line;
  while (std::getline(in, line)) {
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    ss << line << "\n";
  }
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) invalid("cannot write file '" + path + "'");
  out << content;
}

AlgorithmSpec point_spec(const RunConfig& c, double mu) {
  if (!c.alpha) invalid("--alpha is required");
  if (c.method == Method::kGD) {
    if (c.beta && *c.beta != 0.0) invalid("GD takes no momentum; omit --beta");
    return AlgorithmSpec::gd(*c.alpha);
  }
  double beta = 0.0;
  if (c.beta) {
    beta = *c.beta;
  } else {
    const double r = std::sqrt(*c.alpha * mu);
    beta = (1.0 - r) / (1.0 + r);
  }
  return AlgorithmSpec::ag(*c.alpha, beta);
}

bool is_inside(const AlgorithmSpec& spec, double mu, double L) {
  if (spec.method == Method::kGD) return spec.alpha < 2.0 / L;
  return in_stability_region(spec.alpha, spec.beta, mu, L).inside;
}

QuadraticSpectrum single_eigenvalue(const Problem& p) {
  if (p.L != p.mu) invalid("a quadratic with d = 1 requires mu = L");
  return QuadraticSpectrum({p.mu});
}

// Spectrum with d - 1 copies of the endpoint carrying the larger
// per-eigenvalue robustness and one copy of the other endpoint.
QuadraticSpectrum worst_case_spectrum(const AlgorithmSpec& spec,
                                      const Problem& p) {
  if (p.spectrum) return *p.spectrum;
  if (p.d == 1) return single_eigenvalue(p);
  double worse = p.L;
  double other = p.mu;
  if (is_inside(spec, p.mu, p.L)) {
    const double j_mu = evaluate_point(spec, QuadraticSpectrum({p.mu})).J;
    const double j_L = evaluate_point(spec, QuadraticSpectrum({p.L})).J;
    if (j_mu > j_L) std::swap(worse, other);
  }
  std::vector<double> e(p.d - 1, worse);
  e.push_back(other);
  return QuadraticSpectrum(std::move(e));
}

// Spectrum for sweeps and comparisons on the endpoints-only class.
QuadraticSpectrum sweep_spectrum(const Problem& p) {
  if (p.spectrum) return *p.spectrum;
  if (p.d == 1) return single_eigenvalue(p);
  std::vector<double> e(p.d - 1, p.L);
  e.insert(e.begin(), p.mu);
  return QuadraticSpectrum(std::move(e));
}

void set_problem_fields(Report& r, const Problem& p) {
  r.set("spectrum_source", text(spectrum_source_name(p.source)));
  r.set("mu", number(p.mu));
  r.set("L", number(p.L));
  r.set("d", number(p.d));
}

GridCounts grid_counts(const RunConfig& c, int default_count) {
  GridCounts g{c.grid_alpha.value_or(default_count),
               c.grid_beta.value_or(default_count)};
  if (g.alpha < 2 || g.beta < 2) invalid("grid counts must be at least 2");
  return g;
}

std::vector<double> tau_values(const RunConfig& c) {
  if (c.tau && !c.tau_grid.empty()) invalid("--tau and --tau-grid are exclusive");
  if (c.tau) return {*c.tau};
  if (!c.tau_grid.empty()) return parse_grid(c.tau_grid);
  return default_tau_grid();
}

bool eps_mode(const RunConfig& c) {
  const bool eps = c.eps || !c.eps_grid.empty();
  if (eps && (c.tau || !c.tau_grid.empty())) {
    invalid("tau and eps sweeps are exclusive");
  }
  if (c.eps && !c.eps_grid.empty()) invalid("--eps and --eps-grid are exclusive");
  return eps;
}

std::vector<double> eps_values(const RunConfig& c) {
  if (c.eps) return {*c.eps};
  return parse_grid(c.eps_grid);
}

void add_curve_table(Report& r, const std::string& name, const ParetoCurve& curve) {
  Table& t = r.add_table(name, {"rho", "J", "alpha", "beta", "param"});
  for (size_t i = 0; i < curve.points.size(); ++i) {
    const auto& p = curve.points[i];
    t.add_row({number(p.rho), number(p.J), number(p.params.alpha),
               number(p.params.beta), number(curve.params[i])});
  }
}

CommandResult ok(Report report) { return {std::move(report), 0, {}, {}}; }

CommandResult not_stable_result(Report report, const std::string& message) {
  return {std::move(report), exit_code_for(ErrorCode::kNotStable),
          error_code_name(ErrorCode::kNotStable), message};
}

// ---------------------------------------------------------------- analyze

CommandResult cmd_analyze(const RunConfig& c) {
  const Problem p = resolve_problem(c);
  const AlgorithmSpec spec = point_spec(c, p.mu);
  spec.validate();
  Report r;
  r.command = "analyze";
  r.set("method", text(method_name(spec.method)));
  r.set("alpha", number(spec.alpha));
  r.set("beta", number(spec.beta));
  set_problem_fields(r, p);

  double margin = 0.0;
  std::string region;
  if (spec.method == Method::kGD) {
    margin = spec.alpha < 2.0 / p.L ? 1.0 - gd_rate(spec.alpha, p.mu, p.L)
                                    : 2.0 / p.L - spec.alpha;
  } else {
    const StabilityVerdict v = in_stability_region(spec.alpha, spec.beta, p.mu, p.L);
    margin = v.margin;
    region = region_name(v.region_label);
  }
  const bool inside = is_inside(spec, p.mu, p.L);
  r.set("verdict", text(inside ? "INSIDE" : "OUTSIDE"));
  if (!region.empty()) r.set("region", text(region));
  r.set("margin", number(margin));
  if (!inside) {
    return not_stable_result(std::move(r), "parameters are outside the stability region");
  }

  const QuadraticSpectrum spectrum = worst_case_spectrum(spec, p);
  const RateRobustnessPoint pt = evaluate_point(spec, spectrum);
  r.set("rho", number(pt.rho));
  r.set("J", number(pt.J));
  r.set("Jprime", number(pt.Jprime.value_or(kNaN)));
  if (spec.beta == 0.0) {
    r.set("lower_bound", number(gd_lower_bound(spec.alpha, spectrum)));
  }

  const SystemMatrices sys = build_system(spec, spectrum.d());
  double h2 = 0.0;
  if (sys.state_dim <= 256) {
    h2 = h2_norm_squared(closed_loop_matrix(sys, spectrum), sys.B,
                         output_matrix(sys, spectrum, Output::kFunctionValue));
    r.set("h2_method", text("lyapunov"));
  } else {
    h2 = h2_structured(spec, spectrum, Output::kFunctionValue);
    r.set("h2_method", text("structured"));
  }
  r.set("J_h2", number(h2));
  r.set("h2_residual", number(std::abs(h2 - pt.J) / std::max(1.0, std::abs(pt.J))));
  return ok(std::move(r));
}

// -------------------------------------------------------------- stability

CommandResult cmd_stability(const RunConfig& c) {
  const Problem p = resolve_problem(c);
  Report r;
  r.command = "stability";
  r.set("method", text(method_name(c.method)));
  r.set("mu", number(p.mu));
  r.set("L", number(p.L));

  if (c.alpha) {
    const AlgorithmSpec spec = point_spec(c, p.mu);
    spec.validate();
    r.set("alpha", number(spec.alpha));
    r.set("beta", number(spec.beta));
    bool inside = false;
    if (spec.method == Method::kGD) {
      inside = spec.alpha < 2.0 / p.L;
      r.set("verdict", text(inside ? "INSIDE" : "OUTSIDE"));
      r.set("margin", number(std::min(spec.alpha, 2.0 / p.L - spec.alpha)));
      r.set("rho", number(std::max(std::abs(1 - spec.alpha * p.mu),
                                   std::abs(1 - spec.alpha * p.L))));
    } else {
      const StabilityVerdict v =
          in_stability_region(spec.alpha, spec.beta, p.mu, p.L);
      inside = v.inside;
      r.set("verdict", text(inside ? "INSIDE" : "OUTSIDE"));
      r.set("region", text(region_name(v.region_label)));
      r.set("margin", number(v.margin));
      r.set("rho", number(std::max(ag_rate_term(spec.alpha, spec.beta, p.mu).rho,
                                   ag_rate_term(spec.alpha, spec.beta, p.L).rho)));
    }
    if (!inside) {
      return not_stable_result(std::move(r), "parameters are outside the stability region");
    }
    return ok(std::move(r));
  }

  // Region map over alpha in (0, 2/L] and beta in [0, 1].
  const GridCounts g = grid_counts(c, 40);
  Table& t = r.add_table("region", {"alpha", "beta", "region", "margin", "rho"});
  const int nb = c.method == Method::kGD ? 1 : g.beta;
  for (int i = 1; i <= g.alpha; ++i) {
    const double a = 2.0 / p.L * i / g.alpha;
    for (int j = 0; j < nb; ++j) {
      const double b = nb == 1 ? 0.0 : static_cast<double>(j) / (nb - 1);
      const StabilityVerdict v = in_stability_region(a, b, p.mu, p.L);
      const double rho = std::max(ag_rate_term(a, b, p.mu).rho,
                                  ag_rate_term(a, b, p.L).rho);
      t.add_row({number(a), number(b), text(region_name(v.region_label)),
                 number(v.margin), number(rho)});
    }
  }
  return ok(std::move(r));
}

// --------------------------------------------------------- tradeoff/pareto

ParetoCurve sweep_for(const RunConfig& c, const Problem& p, Method method,
                      bool eps, const std::vector<double>& values,
                      GridCounts grid) {
  const bool endpoints_ag = !p.spectrum && method == Method::kAG;
  if (eps && endpoints_ag) {
    // Worst case over the endpoints class, point by point.
    ParetoCurve curve;
    curve.method = method;
    curve.provenance = Provenance::kExactQuad;
    std::vector<std::pair<RateRobustnessPoint, double>> rows;
    for (double v : values) {
      const AgEpsParams e = ag_alpha_for_eps(v, p.mu, p.L);
      const AlgorithmSpec spec = AlgorithmSpec::ag(e.alpha, e.beta);
      rows.emplace_back(evaluate_point(spec, worst_case_spectrum(spec, p)), v);
    }
    std::stable_sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) {
      return x.first.rho < y.first.rho;
    });
    for (const auto& [pt, v] : rows) {
      curve.points.push_back(pt);
      curve.params.push_back(v);
    }
    return curve;
  }
  SweepConfig cfg;
  cfg.method = method;
  cfg.mode = eps ? TradeoffMode::kEpsConstrained : TradeoffMode::kTauPenalized;
  cfg.values = values;
  cfg.grid = grid;
  cfg.upper_bound = method == Method::kAG && (c.upper_bound || endpoints_ag);
  return tradeoff_sweep(sweep_spectrum(p), cfg);
}

CommandResult cmd_sweep(const RunConfig& c, bool filtered) {
  const Problem p = resolve_problem(c);
  const bool eps = eps_mode(c);
  const std::vector<double> values = eps ? eps_values(c) : tau_values(c);
  const GridCounts grid = grid_counts(c, 60);
  if (c.upper_bound && c.method != Method::kAG) {
    invalid("--upper-bound applies to AG only");
  }
  ParetoCurve curve = sweep_for(c, p, c.method, eps, values, grid);
  if (filtered) curve = pareto_filter(curve);

  Report r;
  r.command = filtered ? "pareto" : "tradeoff";
  r.set("method", text(method_name(c.method)));
  r.set("mode", text(eps ? "eps" : "tau"));
  r.set("provenance", text(provenance_name(curve.provenance)));
  set_problem_fields(r, p);
  r.set("points", number(curve.points.size()));
  add_curve_table(r, "curve", curve);

  if (c.compare_gd) {
    if (c.method != Method::kAG) invalid("--compare-gd requires --method ag");
    const QuadraticSpectrum spectrum = sweep_spectrum(p);
    const ParetoCurve gd = pareto_filter(sweep_for(c, p, Method::kGD, eps, values, grid));
    add_curve_table(r, "gd_curve", gd);
    Table& t = r.add_table("dominance", {"rho_gd", "J_gd", "rho_ag", "J_ag",
                                         "alpha_ag", "beta_ag", "dominates"});
    bool all = true;
    for (const auto& g : gd.points) {
      const AgOptimum ag = ag_optimize_rate_constrained(g.rho, spectrum, grid);
      const bool dom = ag.rho <= g.rho + 1e-9 && ag.J <= g.J + 1e-9;
      all = all && dom;
      t.add_row({number(g.rho), number(g.J), number(ag.rho), number(ag.J),
                 number(ag.alpha), number(ag.beta), text(dom ? "yes" : "no")});
    }
    r.set("ag_dominates_gd", text(all ? "yes" : "no"));
  }

  if (c.panels) {
    if (eps) invalid("--panels requires a tau sweep");
    if (c.out.empty()) invalid("--panels requires --out as the file prefix");
    Table rate{"rate", {"tau", "rho", "alpha"}, {}};
    Table robust{"robustness", {"tau", "J", "alpha"}, {}};
    std::vector<size_t> order(curve.points.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](size_t i, size_t j) {
      return curve.params[i] < curve.params[j];
    });
    for (size_t i : order) {
      const auto& pt = curve.points[i];
      rate.add_row({number(curve.params[i]), number(pt.rho), number(pt.params.alpha)});
      robust.add_row({number(curve.params[i]), number(pt.J), number(pt.params.alpha)});
    }
    write_file(c.out + "_rate.csv", table_to_csv(rate));
    write_file(c.out + "_robustness.csv", table_to_csv(robust));
    write_file(c.out + "_tradeoff.csv", table_to_csv(r.table("curve")));
    r.set("panel_rate", text(c.out + "_rate.csv"));
    r.set("panel_robustness", text(c.out + "_robustness.csv"));
    r.set("panel_tradeoff", text(c.out + "_tradeoff.csv"));
  }
  return ok(std::move(r));
}

// ---------------------------------------------------------------- certify

CommandResult cmd_certify(const RunConfig& c) {
  const Problem p = resolve_problem(c);
  Report r;
  r.command = "certify";
  r.set("method", text(method_name(c.method)));
  set_problem_fields(r, p);
  const bool eps = c.eps || !c.eps_grid.empty();

  if (c.method == Method::kGD) {
    if (eps) {
      Table& t = r.add_table("curve", {"rho", "J", "alpha", "beta", "param"});
      for (double e : eps_values(c)) {
        const double a = gd_alpha_for_eps(e, p.mu, p.L);
        t.add_row({number(gd_min_rho(a, p.mu, p.L)),
                   number(gd_bound_R(a, p.mu, p.L, p.d)), number(a), number(0.0),
                   number(e)});
      }
      r.set("provenance", text(provenance_name(Provenance::kSdpCert)));
      return ok(std::move(r));
    }
    const double a = c.alpha.value_or(2.0 / (p.mu + p.L));
    AlgorithmSpec::gd(a).validate();
    if (a >= 2.0 / p.L) fail(ErrorCode::kOutOfRange, "alpha must lie in (0, 2/L)");
    const double min_rho = gd_min_rho(a, p.mu, p.L);
    r.set("alpha", number(a));
    r.set("min_rho", number(min_rho));
    r.set("rate_formula", number(gd_rate(a, p.mu, p.L)));
    r.set("R", number(gd_bound_R(a, p.mu, p.L, p.d)));
    if (c.rho) {
      r.set("requested_rho", number(*c.rho));
      r.set("status", text(*c.rho >= min_rho ? "FEASIBLE" : "INFEASIBLE"));
    }
    return ok(std::move(r));
  }

  if (eps) {
    const std::vector<double> values = eps_values(c);
    const std::vector<SdpCurvePoint> pts =
        ag_sdp_curve(values, p.mu, p.L, p.d, grid_counts(c, 30));
    r.set("provenance", text(provenance_name(Provenance::kSdpCert)));
    Table& curve = r.add_table("curve", {"rho", "J", "alpha", "beta", "param"});
    for (const auto& pt : pts) {
      if (std::isfinite(pt.Rbar)) {
        curve.add_row({number(pt.rho), number(pt.Rbar), number(pt.alpha),
                       number(pt.beta), number(pt.eps)});
      }
    }
    Table& t = r.add_table("details", {"eps", "rho", "Rbar", "witness_bound",
                                       "R_gd", "solved", "infeasible", "status"});
    const double gd_fast = gd_fastest_rate(p.mu, p.L);
    for (const auto& pt : pts) {
      const double r_gd = pt.rho >= gd_fast && pt.rho < 1.0
                              ? gd_bound_R((1.0 - pt.rho) / p.mu, p.mu, p.L, p.d)
                              : kNaN;
      t.add_row({number(pt.eps), number(pt.rho), number(pt.Rbar),
                 number(pt.witness_bound), number(r_gd), number(pt.solved),
                 number(pt.infeasible),
                 text(std::isfinite(pt.Rbar) ? "FEASIBLE" : "INFEASIBLE")});
    }
    return ok(std::move(r));
  }

  const AlgorithmSpec spec = point_spec(c, p.mu);
  spec.validate();
  r.set("alpha", number(spec.alpha));
  r.set("beta", number(spec.beta));
  const double r_mu = std::sqrt(spec.alpha * p.mu);
  const bool standard = spec.alpha <= 1.0 / p.L &&
                        std::abs(spec.beta - (1.0 - r_mu) / (1.0 + r_mu)) <= 1e-12;
  double rho = 0.0;
  if (c.rho) {
    rho = *c.rho;
    if (!(rho > 0.0 && rho < 1.0)) invalid("--rho must lie in (0, 1)");
  } else if (standard) {
    const ExplicitBound eb = ag_explicit_bound(spec.alpha, p.mu, p.L, p.d);
    r.set("explicit_rho", number(eb.rho));
    r.set("explicit_R", number(eb.R));
    rho = eb.rho;
  } else {
    invalid("--rho is required unless beta is the standard momentum and alpha <= 1/L");
  }
  const CertSdpResult res = ag_sdp_bound(spec.alpha, spec.beta, rho, p.mu, p.L, p.d);
  r.set("requested_rho", number(rho));
  r.set("status", text(res.cert.feasible ? "FEASIBLE" : "INFEASIBLE"));
  r.set("Rbar", number(res.Rbar));
  r.set("slack_min_eig", number(res.cert.slack_min_eig));
  if (res.cert.feasible) {
    r.set("cbar", number(res.cert.cbar));
    r.set("p11", number(res.cert.ptilde(0, 0)));
    r.set("p12", number(res.cert.ptilde(0, 1)));
    r.set("p22", number(res.cert.ptilde(1, 1)));
  }
  return ok(std::move(r));
}

// --------------------------------------------------------------- simulate

CommandResult cmd_simulate(const RunConfig& c) {
  Report r;
  r.command = "simulate";
  std::optional<Objective> obj;
  if (c.objective == "quadratic") {
    const Problem p = resolve_problem(c);
    if (p.spectrum) {
      obj = make_quadratic_objective(*p.spectrum, c.seed);
    } else {
      obj = make_quadratic_objective(
          p.d == 1 ? single_eigenvalue(p)
                   : QuadraticSpectrum(linear_grid(p.mu, p.L, p.d)),
          c.seed);
    }
    r.set("spectrum_source", text(spectrum_source_name(p.source)));
  } else if (c.objective == "laplacian") {
    obj = make_laplacian_objective(c.d.value_or(100), c.delta, c.seed);
  } else if (c.objective == "logistic") {
    obj = make_logistic_objective(c.samples, c.d.value_or(100), c.kappa, c.seed);
  } else {
    invalid("unknown objective '" + c.objective + "'");
  }
  const double mu = obj->mu();
  const double L = obj->L();
  AlgorithmSpec spec;
  if (c.alpha) {
    spec = point_spec(c, mu);
  } else if (c.method == Method::kGD) {
    spec = AlgorithmSpec::gd(1.0 / L);
  } else {
    const double sk = std::sqrt(L / mu);
    spec = AlgorithmSpec::ag(1.0 / L, c.beta.value_or((sk - 1.0) / (sk + 1.0)));
  }
  spec.validate();
  if (c.sigma < 0.0) invalid("--sigma must be non-negative");

  r.set("objective", text(c.objective));
  r.set("method", text(method_name(spec.method)));
  r.set("alpha", number(spec.alpha));
  r.set("beta", number(spec.beta));
  r.set("mu", number(mu));
  r.set("L", number(L));
  r.set("d", number(obj->dim()));
  r.set("sigma", number(c.sigma));
  r.set("replicas", number(c.replicas));
  r.set("kmax", number(c.kmax));
  r.set("seed", number(static_cast<double>(c.seed)));
  if (!is_inside(spec, mu, L)) {
    return not_stable_result(std::move(r), "parameters are outside the stability region");
  }
  r.set("rho", number(method_rate(spec, mu, L)));

  EstimatorConfig ec;
  ec.replicas = c.replicas;
  ec.k_max = c.kmax;
  ec.burn_in = c.burnin;
  ec.seed = c.seed;
  if (c.sigma > 0.0) {
    const auto [j, jp] = estimate_J_and_Jprime(spec, *obj, NoiseModel{c.sigma}, ec);
    r.set("burn_in", number(j.burn_in));
    r.set("Jhat", number(j.value));
    r.set("Jhat_stderr", number(j.stderr_value));
    r.set("Jprime_hat", number(jp.value));
    r.set("Jprime_hat_stderr", number(jp.stderr_value));
  }
  if (obj->kind() == ObjectiveKind::kQuadratic) {
    const RateRobustnessPoint pt =
        evaluate_point(spec, QuadraticSpectrum(obj->eigenvalues()));
    r.set("J_exact", number(pt.J));
    r.set("Jprime_exact", number(pt.Jprime.value_or(kNaN)));
  }

  if (!c.trajectory.empty()) {
    if (c.trajectory_replicas < 1) invalid("--trajectory-replicas must be at least 1");
    Table t{"trajectory", {"k", "replica", "subopt", "dist2"}, {}};
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(obj->dim());
    for (int rep = 0; rep < c.trajectory_replicas; ++rep) {
      const auto traj = run_noisy(spec, *obj, x0, NoiseModel{c.sigma}, c.kmax,
                                  c.seed, static_cast<std::uint64_t>(rep));
      for (size_t k = 0; k < traj.size(); ++k) {
        t.add_row({number(static_cast<double>(k)), number(rep),
                   number(traj[k].subopt), number(traj[k].dist2)});
      }
    }
    write_file(c.trajectory, table_to_csv(t));
    r.set("trajectory", text(c.trajectory));
  }
  return ok(std::move(r));
}

std::string trim(const std::string& s) {
  const size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool given_on_command_line(const std::vector<std::string>& args,
                           const std::string& flag) {
  for (const auto& a : args) {
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  }
  return false;
}

// Appends --key=value for each config entry whose flag is absent from args.
std::vector<std::string> merge_config(const std::vector<std::string>& args) {
  std::string path;
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  std::vector<std::string> merged = args;
  if (path.empty()) return merged;
  std::ifstream in(path);
  if (!in) invalid("cannot read config file '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      invalid(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    while (!key.empty() && key[0] == '-') key.erase(0, 1);
    if (key.empty() || key == "config") {
      invalid(path + ":" + std::to_string(lineno) + ": invalid key");
    }
    const std::string flag = "--" + key;
    if (given_on_command_line(args, flag)) continue;
    if (key == "upper-bound" || key == "compare-gd" || key == "panels") {
      if (value == "true" || value == "1") merged.push_back(flag);
    } else {
      merged.push_back(flag + "=" + value);
    }
  }
  return merged;
}

}  // namespace

const char* spectrum_source_name(SpectrumSource source) {
  switch (source) {
    case SpectrumSource::kList:
      return "list";
    case SpectrumSource::kFile:
      return "file";
    case SpectrumSource::kEndpoints:
      return "endpoints";
  }
  return "unknown";
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> values;
  std::string token;
  auto flush = [&] {
    if (!token.empty()) values.push_back(parse_real(token));
    token.clear();
  };
  for (char ch : text) {
    if (ch == ',' || std::isspace(static_cast<unsigned char>(ch))) {
      flush();
    } else {
      token += ch;
    }
  }
  flush();
  if (values.empty()) invalid("empty list");
  return values;
}

std::vector<double> parse_grid(const std::string& text) {
  if (text.rfind("log:", 0) == 0) {
    const auto parts = split(text.substr(4), ':');
    if (parts.size() != 3) invalid("log grid must be log:lo:hi:n");
    const double lo = parse_real(parts[0]);
    const double hi = parse_real(parts[1]);
    const double n = parse_real(parts[2]);
    if (!(lo > 0.0 && hi >= lo)) invalid("log grid needs 0 < lo <= hi");
    if (n < 1 || n != std::floor(n)) invalid("log grid count must be a positive integer");
    return log_grid(lo, hi, static_cast<int>(n));
  }
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) invalid("range must be lo:step:hi");
    const double lo = parse_real(parts[0]);
    const double step = parse_real(parts[1]);
    const double hi = parse_real(parts[2]);
    if (!(step > 0.0)) invalid("range step must be positive");
    std::vector<double> values;
    for (long i = 0;; ++i) {
      const double v = lo + i * step;
      if (v > hi + 1e-9 * step) break;
      values.push_back(std::min(v, hi));
      if (values.size() > 1000000) invalid("range has too many points");
    }
    if (values.empty()) invalid("empty sweep range '" + text + "'");
    return values;
  }
  return parse_list(text);
}

Problem resolve_problem(const RunConfig& c) {
  Problem p;
  if (!c.spectrum.empty()) {
    if (c.d) invalid("--spectrum and --d are mutually exclusive");
    const bool file = c.spectrum[0] == '@';
    p.source = file ? SpectrumSource::kFile : SpectrumSource::kList;
    p.spectrum = QuadraticSpectrum(
        parse_list(file ? read_file(c.spectrum.substr(1)) : c.spectrum));
    p.mu = p.spectrum->mu();
    p.L = p.spectrum->L();
    p.d = p.spectrum->d();
    auto matches = [](double given, double actual) {
      return std::abs(given - actual) <= 1e-12 * std::max(1.0, std::abs(actual));
    };
    if (c.mu && !matches(*c.mu, p.mu)) invalid("--mu differs from the smallest eigenvalue");
    if (c.L && !matches(*c.L, p.L)) invalid("--L differs from the largest eigenvalue");
    return p;
  }
  if (!c.mu || !c.L) invalid("--mu and --L are required without --spectrum");
  p.source = SpectrumSource::kEndpoints;
  p.mu = *c.mu;
  p.L = *c.L;
  p.d = c.d.value_or(2);
  if (!(p.mu > 0.0)) invalid("mu must be positive");
  if (!(p.L >= p.mu)) invalid("L must be at least mu");
  if (p.d < 1) invalid("d must be at least 1");
  return p;
}

std::optional<RunConfig> parse_args(const std::vector<std::string>& args,
                                    std::ostream& help_out) {
  RunConfig c;
  CLI::App app{"Rate and robustness analysis of gradient methods under noise",
               "gradnoise"};
  std::string config_path;
  app.add_option("--config", config_path,
                 "key=value file; command-line flags take precedence");

  app.add_option("command", c.command,
                 "analyze | stability | tradeoff | certify | simulate | pareto")
      ->required()
      ->check(CLI::IsMember(
          {"analyze", "stability", "tradeoff", "certify", "simulate", "pareto"}));
  std::string method = "gd";
  app.add_option("--method", method, "gd or ag")->check(CLI::IsMember({"gd", "ag"}));

  auto opt_real = [&](const std::string& name, std::optional<double>& target,
                      const std::string& desc) {
    app.add_option_function<double>(name, [&target](const double& v) { target = v; },
                                    desc);
  };
  auto opt_int = [&](const std::string& name, std::optional<int>& target,
                     const std::string& desc) {
    app.add_option_function<int>(name, [&target](const int& v) { target = v; }, desc);
  };
  opt_real("--mu", c.mu, "strong convexity parameter");
  opt_real("--L", c.L, "smoothness parameter");
  opt_int("--d", c.d, "dimension for the endpoints-only class");
  app.add_option("--spectrum", c.spectrum, "eigenvalues as a comma list or @file");
  opt_real("--alpha", c.alpha, "stepsize");
  opt_real("--beta", c.beta, "momentum");
  opt_real("--rho", c.rho, "requested rate for certify");
  opt_real("--tau", c.tau, "single trade-off parameter");
  app.add_option("--tau-grid", c.tau_grid, "lo:step:hi, log:lo:hi:n or a list");
  opt_real("--eps", c.eps, "single rate slack");
  app.add_option("--eps-grid", c.eps_grid, "lo:step:hi, log:lo:hi:n or a list");
  opt_int("--grid-alpha", c.grid_alpha, "stepsize grid count");
  opt_int("--grid-beta", c.grid_beta, "momentum grid count");
  app.add_flag("--upper-bound", c.upper_bound, "AG: optimize the dimension-free bound");
  app.add_flag("--compare-gd", c.compare_gd, "AG: report dominance over GD");
  app.add_flag("--panels", c.panels, "write rate, robustness and trade-off CSVs");
  app.add_option("--objective", c.objective, "quadratic | laplacian | logistic");
  app.add_option("--sigma", c.sigma, "gradient noise standard deviation");
  app.add_option("--replicas", c.replicas, "Monte-Carlo replicas");
  app.add_option("--kmax", c.kmax, "iterations per replica");
  opt_int("--burnin", c.burnin, "iterations discarded before averaging");
  app.add_option("--seed", c.seed, "random seed");
  app.add_option("--delta", c.delta, "Laplacian regularization");
  app.add_option("--samples", c.samples, "logistic data rows");
  app.add_option("--kappa", c.kappa, "logistic condition number");
  app.add_option("--trajectory", c.trajectory, "trajectory CSV path");
  app.add_option("--trajectory-replicas", c.trajectory_replicas,
                 "replicas written to the trajectory CSV");
  std::string format = "table";
  app.add_option("--format", format, "table | csv | json")
      ->check(CLI::IsMember({"table", "csv", "json"}));
  app.add_option("--out", c.out, "output path, or file prefix with --panels");

  const std::vector<std::string> merged = merge_config(args);
  std::vector<std::string> reversed(merged.rbegin(), merged.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    help_out << app.help();
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    invalid(e.what());
  }

  c.method = method == "ag" ? Method::kAG : Method::kGD;
  c.format = format == "json"  ? OutputFormat::kJson
             : format == "csv" ? OutputFormat::kCsv
                               : OutputFormat::kTable;
  if (c.replicas < 1) invalid("--replicas must be at least 1");
  if (c.kmax < 1) invalid("--kmax must be at least 1");
  if (c.burnin && (*c.burnin < 0 || *c.burnin > c.kmax)) {
    invalid("--burnin must lie in [0, kmax]");
  }
  if (!(c.sigma >= 0.0) || !std::isfinite(c.sigma)) invalid("--sigma must be non-negative");
  if (c.alpha && !(*c.alpha > 0.0)) invalid("--alpha must be positive");
  if (c.beta && !(*c.beta >= 0.0)) invalid("--beta must be non-negative");
  if (c.mu && !(*c.mu > 0.0)) invalid("--mu must be positive");
  if (c.L && !(*c.L > 0.0)) invalid("--L must be positive");
  if (c.tau && !(*c.tau >= 0.0)) invalid("--tau must be non-negative");
  if (c.eps && !(*c.eps >= 0.0)) invalid("--eps must be non-negative");
  return c;
}

CommandResult execute(const RunConfig& c) {
  if (c.command == "analyze") return cmd_analyze(c);
  if (c.command == "stability") return cmd_stability(c);
  if (c.command == "tradeoff") return cmd_sweep(c, false);
  if (c.command == "pareto") return cmd_sweep(c, true);
  if (c.command == "certify") return cmd_certify(c);
  if (c.command == "simulate") return cmd_simulate(c);
  invalid("unknown command '" + c.command + "'");
}

std::string error_json(const std::string& code, const std::string& message,
                       int exit_code) {
  nlohmann::ordered_json j;
  j["error"] = code;
  j["message"] = message;
  j["exit_code"] = exit_code;
  return j.dump() + "\n";
}

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  try {
    const std::optional<RunConfig> config = parse_args(args, out);
    if (!config) return 0;
    const CommandResult result = execute(*config);
    const std::string text = render(result.report, config->format);
    if (!config->out.empty() && !config->panels) {
      write_file(config->out, text);
    } else {
      out << text;
    }
    if (result.exit_code != 0) {
      err << error_json(result.error_code, result.error_message, result.exit_code);
    }
    return result.exit_code;
  } catch (const Error& e) {
    const int code = exit_code_for(e.code());
    err << error_json(error_code_name(e.code()), e.what(), code);
    return code;
  } catch (const std::exception& e) {
    err << error_json("INTERNAL", e.what(), 4);
    return 4;
  }
}

}  // namespace gradnoise::cli
