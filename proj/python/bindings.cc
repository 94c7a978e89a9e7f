#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gradnoise/cert.h"
#include "gradnoise/error.h"
#include "gradnoise/linsys.h"
#include "gradnoise/quad.h"
#include "gradnoise/sdp.h"
#include "gradnoise/sim.h"
#include "gradnoise/tradeoff.h"

namespace py = pybind11;
using namespace gradnoise;

namespace {

QuadraticSpectrum spectrum_of(const std::vector<double>& eigenvalues) {
  return QuadraticSpectrum(eigenvalues);
}

AlgorithmSpec spec_of(const std::string& method, double alpha, double beta) {
  if (method == "gd") {
    if (beta != 0.0) fail(ErrorCode::kInvalidArgument, "GD takes no momentum");
    return AlgorithmSpec::gd(alpha);
  }
  if (method == "ag") return AlgorithmSpec::ag(alpha, beta);
  fail(ErrorCode::kInvalidArgument, "method must be 'gd' or 'ag'");
}

py::dict point_dict(const RateRobustnessPoint& p) {
  py::dict d;
  d["rho"] = p.rho;
  d["J"] = p.J;
  d["Jprime"] = p.Jprime ? py::cast(*p.Jprime) : py::none();
  d["alpha"] = p.params.alpha;
  d["beta"] = p.params.beta;
  return d;
}

py::dict optimum_dict(const AgOptimum& o) {
  py::dict d;
  d["alpha"] = o.alpha;
  d["beta"] = o.beta;
  d["rho"] = o.rho;
  d["J"] = o.J;
  d["objective"] = o.objective;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Rate and robustness of gradient methods under additive gradient noise";
  m.attr("__version__") = "0.1.0";

  static py::exception<Error> exc(m, "GradnoiseError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = exc;
      PyErr_SetObject(err.ptr(),
                      py::make_tuple(error_code_name(e.code()), e.what()).ptr());
    }
  });

  m.def("spectral_radius", &spectral_radius, py::arg("M"));
  m.def("symmetric_eigenvalues", &symmetric_eigenvalues, py::arg("M"));
  m.def(
      "solve_discrete_lyapunov",
      [](const Eigen::MatrixXd& A, const Eigen::MatrixXd& W) {
        return solve_discrete_lyapunov(A, W).X;
      },
      py::arg("A"), py::arg("W"), "Solves A X A^T - X + W = 0.");
  m.def("h2_norm_squared", &h2_norm_squared, py::arg("A"), py::arg("B"),
        py::arg("C"));
  m.def(
      "system_matrices",
      [](const std::string& method, double alpha, double beta, int d) {
        const SystemMatrices s = build_system(spec_of(method, alpha, beta), d);
        return py::make_tuple(s.A, s.B, s.C, s.T);
      },
      py::arg("method"), py::arg("alpha"), py::arg("beta") = 0.0, py::arg("d") = 1,
      "Returns (A, B, C, T).");
  m.def("poly_roots", &poly_roots, py::arg("coefficients"),
        "Roots of a polynomial given highest degree first.");

  m.def("gd_rate", &gd_rate, py::arg("alpha"), py::arg("mu"), py::arg("L"));
  m.def(
      "gd_robustness",
      [](double alpha, const std::vector<double>& e) {
        return gd_robustness(alpha, spectrum_of(e));
      },
      py::arg("alpha"), py::arg("spectrum"));
  m.def(
      "gd_lower_bound",
      [](double alpha, const std::vector<double>& e) {
        return gd_lower_bound(alpha, spectrum_of(e));
      },
      py::arg("alpha"), py::arg("spectrum"));
  m.def("ag_rate", &ag_rate, py::arg("alpha"), py::arg("beta"), py::arg("mu"),
        py::arg("L"));
  m.def(
      "ag_robustness",
      [](double alpha, double beta, const std::vector<double>& e) {
        return ag_robustness(alpha, beta, spectrum_of(e));
      },
      py::arg("alpha"), py::arg("beta"), py::arg("spectrum"));
  m.def(
      "in_stability_region",
      [](double alpha, double beta, double mu, double L) {
        const StabilityVerdict v = in_stability_region(alpha, beta, mu, L);
        return py::make_tuple(v.inside, region_name(v.region_label), v.margin);
      },
      py::arg("alpha"), py::arg("beta"), py::arg("mu"), py::arg("L"),
      "Returns (inside, region label, margin).");
  m.def(
      "evaluate_point",
      [](const std::string& method, double alpha, double beta,
         const std::vector<double>& e) {
        return point_dict(evaluate_point(spec_of(method, alpha, beta), spectrum_of(e)));
      },
      py::arg("method"), py::arg("alpha"), py::arg("beta"), py::arg("spectrum"));

  m.def(
      "gd_optimal_stepsize_tau",
      [](double tau, const std::vector<double>& e) {
        const GdTauResult r = gd_optimal_stepsize_tau(tau, spectrum_of(e));
        return py::make_tuple(r.alpha_star, r.rho, r.J);
      },
      py::arg("tau"), py::arg("spectrum"), "Returns (alpha_star, rho, J).");
  m.def(
      "ag_optimize_exact",
      [](double tau, const std::vector<double>& e, int n_alpha, int n_beta) {
        return optimum_dict(ag_optimize_exact(tau, spectrum_of(e), {n_alpha, n_beta}));
      },
      py::arg("tau"), py::arg("spectrum"), py::arg("n_alpha") = 60,
      py::arg("n_beta") = 60);
  m.def(
      "ag_optimize_ubound",
      [](double tau, double mu, double L, int d, int n_alpha, int n_beta) {
        return optimum_dict(ag_optimize_ubound(tau, mu, L, d, {n_alpha, n_beta}));
      },
      py::arg("tau"), py::arg("mu"), py::arg("L"), py::arg("d"),
      py::arg("n_alpha") = 60, py::arg("n_beta") = 60);
  m.def(
      "pareto_curve",
      [](const std::string& method, const std::vector<double>& e,
         const std::vector<double>& taus) {
        SweepConfig cfg;
        cfg.method = method == "ag" ? Method::kAG : Method::kGD;
        cfg.values = taus;
        const ParetoCurve c = pareto_curve(spectrum_of(e), cfg);
        py::list out;
        for (size_t i = 0; i < c.points.size(); ++i) {
          py::dict d = point_dict(c.points[i]);
          d["param"] = c.params[i];
          out.append(d);
        }
        return out;
      },
      py::arg("method"), py::arg("spectrum"), py::arg("taus"),
      "Pareto-filtered tau sweep as a list of dicts sorted by rho.");

  m.def("gd_min_rho", &gd_min_rho, py::arg("alpha"), py::arg("mu"), py::arg("L"));
  m.def("gd_bound_R", &gd_bound_R, py::arg("alpha"), py::arg("mu"), py::arg("L"),
        py::arg("d"));
  m.def(
      "ag_explicit_bound",
      [](double alpha, double mu, double L, int d) {
        const ExplicitBound b = ag_explicit_bound(alpha, mu, L, d);
        return py::make_tuple(b.rho, b.R, b.beta);
      },
      py::arg("alpha"), py::arg("mu"), py::arg("L"), py::arg("d"),
      "Returns (rho, R, beta).");
  m.def(
      "ag_sdp_bound",
      [](double alpha, double beta, double rho, double mu, double L, int d) {
        const CertSdpResult r = ag_sdp_bound(alpha, beta, rho, mu, L, d);
        py::dict out;
        out["feasible"] = r.cert.feasible;
        out["Rbar"] = r.Rbar;
        out["cbar"] = r.cert.cbar;
        out["ptilde"] = Eigen::MatrixXd(r.cert.ptilde);
        out["slack_min_eig"] = r.cert.slack_min_eig;
        return out;
      },
      py::arg("alpha"), py::arg("beta"), py::arg("rho"), py::arg("mu"),
      py::arg("L"), py::arg("d"));
  m.def(
      "cert_sdp_problem",
      [](double alpha, double beta, double rho, double mu, double L) {
        const MIBlocks blocks = build_blocks(AlgorithmSpec::ag(alpha, beta), mu, L, rho);
        const SdpProblem p = build_cert_sdp(blocks, Eigen::Vector4d(0, 1, 0, 0));
        py::list lmis;
        for (const AffineLmi& lmi : p.constraints) lmis.append(py::cast(lmi.F));
        return py::make_tuple(Eigen::VectorXd(p.cost), lmis);
      },
      py::arg("alpha"), py::arg("beta"), py::arg("rho"), py::arg("mu"), py::arg("L"),
      "Returns (cost, lmis): minimize cost.z s.t. F0 + sum_i z_i F_i >= 0 for "
      "each [F0, ..., F4] in lmis, with z = (cbar, p11, p12, p22).");
  m.def(
      "check_mi",
      [](const std::string& method, double alpha, double beta, double mu, double L,
         double rho, double c0, double c, const Eigen::MatrixXd& ptilde) {
        return check_mi(build_blocks(spec_of(method, alpha, beta), mu, L, rho), c0, c,
                        ptilde);
      },
      py::arg("method"), py::arg("alpha"), py::arg("beta"), py::arg("mu"),
      py::arg("L"), py::arg("rho"), py::arg("c0"), py::arg("c"), py::arg("ptilde"),
      "Minimum eigenvalue of the certificate slack matrix.");

  m.def(
      "estimate_J",
      [](const std::string& method, double alpha, double beta,
         const std::vector<double>& e, double sigma, int replicas, int k_max,
         std::uint64_t seed) {
        const Objective obj = make_quadratic_objective(spectrum_of(e), seed);
        EstimatorConfig cfg;
        cfg.replicas = replicas;
        cfg.k_max = k_max;
        cfg.seed = seed;
        const Estimate est =
            estimate_J(spec_of(method, alpha, beta), obj, NoiseModel{sigma}, cfg);
        return py::make_tuple(est.value, est.stderr_value);
      },
      py::arg("method"), py::arg("alpha"), py::arg("beta"), py::arg("spectrum"),
      py::arg("sigma"), py::arg("replicas"), py::arg("k_max"), py::arg("seed") = 0,
      "Monte-Carlo robustness estimate on a seeded quadratic; (value, stderr).");
}
