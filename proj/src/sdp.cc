#include "gradnoise/sdp.h"

#include <cmath>
#include <functional>
#include <limits>

#include "gradnoise/error.h"
#include "gradnoise/linsys.h"

namespace gradnoise {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// The barrier is evaluated in extended precision: near the optimum the slack
// blocks are nearly singular and double loses the KKT residual to rounding.
using Real = long double;
using RMat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
using RVec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

struct RLmi {
  std::vector<RMat> F;

  RMat evaluate(const RVec& z) const {
    RMat M = F[0];
    for (int i = 0; i < z.size(); ++i) M += z(i) * F[i + 1];
    return Real(0.5) * (M + M.transpose());
  }
};

struct RProblem {
  RVec cost;
  std::vector<RLmi> constraints;
  int dim = 0;
};

RProblem to_extended(const SdpProblem& p) {
  RProblem out;
  out.cost = p.cost.cast<Real>();
  for (const auto& c : p.constraints) {
    RLmi r;
    for (const auto& F : c.F) r.F.push_back(F.cast<Real>());
    out.dim += static_cast<int>(c.F[0].rows());
    out.constraints.push_back(std::move(r));
  }
  return out;
}

// Barrier objective t c^T z - sum log det M_k(z); +inf outside the cone.
Real barrier_value(const RProblem& p, const RVec& z, Real t) {
  Real f = t * p.cost.dot(z);
  for (const auto& c : p.constraints) {
    Eigen::LLT<RMat> llt(c.evaluate(z));
    if (llt.info() != Eigen::Success) return kInf;
    const RMat L = llt.matrixL();
    for (int i = 0; i < L.rows(); ++i) {
      if (!(L(i, i) > 0)) return kInf;
      f -= 2 * std::log(L(i, i));
    }
  }
  return f;
}

// Barrier part of the gradient (without the t c term) and the Hessian.
void barrier_derivatives(const RProblem& p, const RVec& z, RVec* g, RMat* H) {
  const int n = static_cast<int>(p.cost.size());
  g->setZero(n);
  H->setZero(n, n);
  std::vector<RMat> G(n);
  for (const auto& c : p.constraints) {
    Eigen::LLT<RMat> llt(c.evaluate(z));
    for (int i = 0; i < n; ++i) G[i] = llt.solve(c.F[i + 1]);
    for (int i = 0; i < n; ++i) {
      (*g)(i) -= G[i].trace();
      for (int j = i; j < n; ++j) {
        const Real h = (G[i].array() * G[j].transpose().array()).sum();
        (*H)(i, j) += h;
        if (j != i) (*H)(j, i) += h;
      }
    }
  }
}

struct PathResult {
  RVec z;
  Real t = 0;
  double kkt = 0.0;
  int newton_steps = 0;
};

// Follows the central path from a strictly feasible z. Stops early once
// stop(z) holds at a centered point.
PathResult follow_path(const RProblem& p, RVec z, const SdpOptions& opt,
                       const std::function<bool(const RVec&)>& stop = {}) {
  PathResult out;
  Real t = 1;
  RVec g;
  RMat H;
  for (int outer = 0; outer < opt.max_outer; ++outer) {
    bool stalled = false;
    for (int it = 0; it < opt.max_newton; ++it) {
      barrier_derivatives(p, z, &g, &H);
      const RVec grad = t * p.cost + g;
      const RVec step = H.ldlt().solve(-grad);
      const Real decrement2 = -grad.dot(step);
      if (!std::isfinite(static_cast<double>(decrement2))) {
        fail(ErrorCode::kNumericalFailure, "barrier Newton system is singular");
      }
      const bool centered = decrement2 <= 2e-10 && grad.norm() <= opt.kkt_tol * t;
      if (centered || decrement2 <= 1e-30) break;
      // Damped Newton step for a self-concordant barrier: 1 / (1 + lambda)
      // keeps z strictly feasible and decreases the barrier.
      const Real lambda = std::sqrt(decrement2);
      Real s = lambda > 0.25 ? 1 / (1 + lambda) : 1;
      while (s > 1e-14 && !std::isfinite(static_cast<double>(
                              barrier_value(p, z + s * step, t)))) {
        s /= 2;
      }
      if (s <= 1e-14) {
        stalled = true;
        break;
      }
      z += s * step;
      ++out.newton_steps;
    }
    out.t = t;
    barrier_derivatives(p, z, &g, &H);
    out.kkt = static_cast<double>((p.cost + g / t).norm());
    const Real cost = p.cost.dot(z);
    if (stalled || (stop && stop(z)) ||
        p.dim / t <= opt.gap_tol * (1 + std::abs(cost))) {
      break;
    }
    t /= opt.barrier_factor;
  }
  out.z = z;
  return out;
}

}  // namespace

MatrixXd AffineLmi::evaluate(const VectorXd& z) const {
  MatrixXd M = F[0];
  for (int i = 0; i < z.size(); ++i) M += z(i) * F[i + 1];
  return 0.5 * (M + M.transpose());
}

double sdp_min_eig(const SdpProblem& problem, const VectorXd& z) {
  double m = kInf;
  for (const auto& c : problem.constraints) {
    for (double v : symmetric_eigenvalues(c.evaluate(z))) m = std::min(m, v);
  }
  return m;
}

SdpResult solve_small_sdp(const SdpProblem& problem, const VectorXd& start,
                          const std::optional<VectorXd>& incumbent,
                          const SdpOptions& options) {
  const int n = static_cast<int>(problem.cost.size());
  if (start.size() != n || problem.constraints.empty()) {
    fail(ErrorCode::kInvalidArgument, "SDP start point has the wrong size");
  }
  for (const auto& c : problem.constraints) {
    if (static_cast<int>(c.F.size()) != n + 1) {
      fail(ErrorCode::kInvalidArgument, "SDP constraint has the wrong arity");
    }
  }

  // Phase I: maximize s subject to M_k(z) - s I >= 0.
  SdpProblem phase1;
  phase1.cost = VectorXd::Zero(n + 1);
  phase1.cost(n) = -1.0;
  for (const auto& c : problem.constraints) {
    AffineLmi lifted = c;
    lifted.F.push_back(-MatrixXd::Identity(c.F[0].rows(), c.F[0].cols()));
    phase1.constraints.push_back(std::move(lifted));
  }
  VectorXd z1(n + 1);
  z1.head(n) = start;
  z1(n) = sdp_min_eig(problem, start) - 1.0;
  SdpOptions opt1 = options;
  opt1.gap_tol = 1e-3 * options.feasibility_margin;
  // A margin well above the threshold settles feasibility.
  const double settled = 1e3 * options.feasibility_margin;
  const PathResult p1 =
      follow_path(to_extended(phase1), z1.cast<Real>(), opt1,
                  [&](const RVec& z) { return z(n) > settled; });

  SdpResult result;
  result.phase1_margin = static_cast<double>(p1.z(n));
  result.newton_steps = p1.newton_steps;
  const bool strictly_feasible = result.phase1_margin > options.feasibility_margin;

  if (strictly_feasible) {
    const RProblem ext = to_extended(problem);
    const PathResult p2 = follow_path(ext, p1.z.head(n), options);
    result.status = SdpStatus::kOptimal;
    result.z = p2.z.cast<double>();
    result.gap = static_cast<double>(ext.dim / p2.t);
    result.kkt_residual = p2.kkt;
    result.newton_steps += p2.newton_steps;
    result.cost = problem.cost.dot(result.z);
  }
  if (incumbent && incumbent->size() == n &&
      sdp_min_eig(problem, *incumbent) >= -1e-10) {
    const double c = problem.cost.dot(*incumbent);
    if (result.status != SdpStatus::kOptimal || c < result.cost) {
      result.status = SdpStatus::kOptimal;
      result.z = *incumbent;
      result.cost = c;
      result.used_incumbent = true;
    }
  }
  if (strictly_feasible && !result.used_incumbent &&
      result.gap > 1e-3 * (1.0 + std::abs(result.cost))) {
    fail(ErrorCode::kNumericalFailure, "barrier method stalled far from optimum");
  }
  if (result.status == SdpStatus::kInfeasible) {
    result.z = p1.z.head(n).cast<double>();
    result.cost = problem.cost.dot(result.z);
  }
  result.slack_min_eig = sdp_min_eig(problem, result.z);
  return result;
}

}  // namespace gradnoise
