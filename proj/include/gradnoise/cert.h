#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "gradnoise/linsys.h"
#include "gradnoise/sdp.h"
#include "gradnoise/tradeoff.h"

namespace gradnoise {

/// Kronecker-reduced matrix-inequality templates. The AG ordering of the
/// 3x3 blocks is (x_k, x_{k-1}, gradient); GD uses (x_k, gradient).
struct MIBlocks {
  AlgorithmSpec spec;
  double mu = 0.0;
  double L = 0.0;
  double rho = 0.0;
  /// Reduced state templates.
  Eigen::MatrixXd At;
  Eigen::MatrixXd Bt;
  /// Phi evaluated at P = I.
  Eigen::MatrixXd phi;
  Eigen::MatrixXd x0;
  /// AG only; empty for GD.
  Eigen::MatrixXd x1;
  Eigen::MatrixXd x2;
  /// rho^2 x1 + (1 - rho^2) x2; empty for GD.
  Eigen::MatrixXd x;

  /// [[A^T P A - rho^2 P, A^T P B], [B^T P A, B^T P B]].
  Eigen::MatrixXd phi_of(const Eigen::MatrixXd& P) const;
};

/// Minimum-eigenvalue threshold for reporting a certificate as feasible.
inline constexpr double kCertFeasTol = 1e-10;

MIBlocks build_blocks(const AlgorithmSpec& spec, double mu, double L, double rho);

/// Minimum eigenvalue of c0 X0 + c X(rho) - Phi(P). For GD blocks the c term
/// is absent and ptilde is 1x1.
double check_mi(const MIBlocks& blocks, double c0, double c,
                const Eigen::MatrixXd& ptilde);

/// Smallest rho in [1e-6, 1) for which X0 >= Phi(p) holds for some p > 0.
double gd_min_rho(double alpha, double mu, double L);

double gd_bound_R(double alpha, double mu, double L, int d);

struct ExplicitBound {
  double rho = 0.0;
  double R = 0.0;
  double beta = 0.0;
};

/// Rate and robustness bound of AG with beta = (1 - sqrt(a mu))/(1 + sqrt(a mu)).
ExplicitBound ag_explicit_bound(double alpha, double mu, double L, int d);

/// The rank-one P of the explicit AG certificate.
Eigen::Matrix2d ag_witness_ptilde(double alpha, double mu);

struct Certificate {
  Eigen::MatrixXd ptilde;
  double c0 = 0.0;
  double c = 1.0;
  double cbar = 0.0;
  double rho = 0.0;
  double slack_min_eig = 0.0;
  double bound_R = 0.0;
  bool feasible = false;
};

/// Robustness bound from a feasible certificate with c > 0.
double R_from_certificate(const Certificate& cert, double alpha, double L, int d);

/// The four-variable SDP in z = (cbar, p11, p12, p22) with c = 1:
/// cbar X0 + X(rho) - Phi(P) >= 0, P >= 0, cbar >= 0, plus box caps.
SdpProblem build_cert_sdp(const MIBlocks& blocks, const Eigen::Vector4d& cost);

struct CertSdpResult {
  SdpResult sdp;
  Certificate cert;
  /// alpha^2 d (L + 2 p11) / (2 (1 - rho^2)); +inf when infeasible.
  double Rbar = 0.0;
};

/// Minimizes p11 for fixed (alpha, beta, rho). The explicit witness is used as
/// an incumbent when beta matches its momentum and rho its rate.
CertSdpResult ag_sdp_bound(double alpha, double beta, double rho, double mu,
                           double L, int d);

struct SdpCurvePoint {
  double eps = 0.0;
  double rho = 0.0;
  double Rbar = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  /// sqrt(alpha_eps) d / sqrt(mu).
  double witness_bound = 0.0;
  int solved = 0;
  int infeasible = 0;
};

/// For each eps, the smallest certified Rbar over an (alpha, beta) grid that
/// includes (alpha_eps, beta_eps).
std::vector<SdpCurvePoint> ag_sdp_curve(const std::vector<double>& eps_grid,
                                        double mu, double L, int d,
                                        GridCounts grid);

ParetoCurve sdp_curve_to_pareto(const std::vector<SdpCurvePoint>& points);

/// Upper bound on the impulse-response energy J*.
double perturb_stability_bounds(const AlgorithmSpec& spec, double mu, double L,
                                int d);

}  // namespace gradnoise
