#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace gradnoise {

/// F[0] + sum_i z_i F[i + 1] >= 0 (positive semidefinite).
struct AffineLmi {
  std::vector<Eigen::MatrixXd> F;

  Eigen::MatrixXd evaluate(const Eigen::VectorXd& z) const;
};

/// Minimize cost^T z subject to every constraint being PSD.
struct SdpProblem {
  Eigen::VectorXd cost;
  std::vector<AffineLmi> constraints;
};

struct SdpOptions {
  /// Barrier parameter multiplier per outer step.
  double barrier_factor = 0.2;
  int max_outer = 50;
  int max_newton = 100;
  /// Relative duality-gap surrogate target.
  double gap_tol = 1e-6;
  /// Centering stops once |c + grad barrier / t| is below this.
  double kkt_tol = 1e-8;
  /// Phase I declares infeasibility when the best min-eigenvalue is below this.
  double feasibility_margin = 1e-9;
};

enum class SdpStatus { kOptimal, kInfeasible };

struct SdpResult {
  SdpStatus status = SdpStatus::kInfeasible;
  Eigen::VectorXd z;
  double cost = 0.0;
  /// Smallest eigenvalue over all constraint blocks at z.
  double slack_min_eig = 0.0;
  /// Barrier duality-gap surrogate (total cone dimension / t).
  double gap = 0.0;
  /// Norm of the Lagrangian gradient with barrier dual estimates.
  double kkt_residual = 0.0;
  int newton_steps = 0;
  /// True when the supplied incumbent beat the barrier solution.
  bool used_incumbent = false;
  /// Phase I optimum: largest uniform min-eigenvalue margin found.
  double phase1_margin = 0.0;
};

/// Log-barrier interior-point method for small dense SDPs. Phase I maximizes
/// the smallest constraint eigenvalue; if it cannot exceed the feasibility
/// margin the result is kInfeasible. An optional incumbent (a feasible point
/// to within 1e-10) is returned instead when it has lower cost.
SdpResult solve_small_sdp(const SdpProblem& problem,
                          const Eigen::VectorXd& start,
                          const std::optional<Eigen::VectorXd>& incumbent = {},
                          const SdpOptions& options = {});

/// Smallest eigenvalue across all constraint blocks at z.
double sdp_min_eig(const SdpProblem& problem, const Eigen::VectorXd& z);

}  // namespace gradnoise
