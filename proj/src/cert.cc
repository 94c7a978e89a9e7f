#include "gradnoise/cert.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gradnoise/error.h"
#include "gradnoise/quad.h"

namespace gradnoise {

using Eigen::MatrixXd;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_mu_L(double mu, double L) {
  if (!(mu > 0.0) || !(L >= mu) || !std::isfinite(L)) {
    fail(ErrorCode::kInvalidArgument, "require 0 < mu <= L");
  }
}

double min_eig(const MatrixXd& M) { return symmetric_eigenvalues(M).front(); }

MatrixXd sym2(double a, double b, double c) {
  MatrixXd P(2, 2);
  P << a, b, b, c;
  return P;
}

}  // namespace

MatrixXd MIBlocks::phi_of(const MatrixXd& P) const {
  const int n = static_cast<int>(At.rows());
  if (P.rows() != n || P.cols() != n) {
    fail(ErrorCode::kInvalidArgument, "P has the wrong size for these blocks");
  }
  MatrixXd out(n + 1, n + 1);
  out.topLeftCorner(n, n) = At.transpose() * P * At - rho * rho * P;
  out.topRightCorner(n, 1) = At.transpose() * P * Bt;
  out.bottomLeftCorner(1, n) = Bt.transpose() * P * At;
  out.bottomRightCorner(1, 1) = Bt.transpose() * P * Bt;
  return 0.5 * (out + out.transpose());
}

MIBlocks build_blocks(const AlgorithmSpec& spec, double mu, double L, double rho) {
  spec.validate();
  check_mu_L(mu, L);
  if (!(rho >= 0.0) || !(rho <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "rho must lie in [0, 1]");
  }
  MIBlocks blk;
  blk.spec = spec;
  blk.mu = mu;
  blk.L = L;
  blk.rho = rho;
  const double a = spec.alpha;
  const double b = spec.beta;
  if (spec.method == Method::kGD) {
    blk.At = MatrixXd::Constant(1, 1, 1.0);
    blk.Bt = MatrixXd::Constant(1, 1, -a);
    blk.x0.resize(2, 2);
    blk.x0 << 2.0 * mu * L, -(mu + L), -(mu + L), 2.0;
    blk.phi = blk.phi_of(MatrixXd::Identity(1, 1));
    return blk;
  }
  blk.At.resize(2, 2);
  blk.At << 1.0 + b, -b, 1.0, 0.0;
  blk.Bt.resize(2, 1);
  blk.Bt << -a, 0.0;
  Eigen::RowVector2d Ct(1.0 + b, -b);
  blk.x0.resize(3, 3);
  blk.x0.topLeftCorner(2, 2) = 2.0 * mu * L * Ct.transpose() * Ct;
  blk.x0.topRightCorner(2, 1) = -(mu + L) * Ct.transpose();
  blk.x0.bottomLeftCorner(1, 2) = -(mu + L) * Ct;
  blk.x0(2, 2) = 2.0;
  const double g = a * (2.0 - L * a);
  blk.x1.resize(3, 3);
  blk.x1 << b * b * mu, -b * b * mu, -b,
            -b * b * mu, b * b * mu, b,
            -b, b, g;
  blk.x1 *= 0.5;
  blk.x2.resize(3, 3);
  blk.x2 << (1 + b) * (1 + b) * mu, -b * (1 + b) * mu, -(1 + b),
            -b * (1 + b) * mu, b * b * mu, b,
            -(1 + b), b, g;
  blk.x2 *= 0.5;
  blk.x = rho * rho * blk.x1 + (1.0 - rho * rho) * blk.x2;
  blk.phi = blk.phi_of(MatrixXd::Identity(2, 2));
  return blk;
}

double check_mi(const MIBlocks& blocks, double c0, double c, const MatrixXd& ptilde) {
  if (!(c0 >= 0.0) || !(c >= 0.0)) {
    fail(ErrorCode::kInvalidArgument, "c0 and c must be nonnegative");
  }
  const MatrixXd P = 0.5 * (ptilde + ptilde.transpose());
  const double scale = std::max(1.0, P.cwiseAbs().maxCoeff());
  if (P.size() == 0 || min_eig(P) < -1e-12 * scale) {
    fail(ErrorCode::kPNotPsd, "P is not positive semidefinite");
  }
  MatrixXd slack = c0 * blocks.x0 - blocks.phi_of(P);
  if (blocks.spec.method == Method::kAG) slack += c * blocks.x;
  return min_eig(slack);
}

double gd_min_rho(double alpha, double mu, double L) {
  check_mu_L(mu, L);
  if (!(alpha > 0.0) || !(alpha < 2.0 / L)) {
    fail(ErrorCode::kOutOfRange, "alpha must lie in (0, 2/L)");
  }
  // X0 - Phi(p) is 2x2; its determinant is concave quadratic in p, so the
  // best p is its clipped maximizer.
  auto feasible = [&](double rho) {
    const double s = 1.0 - rho * rho;
    const double lin = -2.0 * mu * L * alpha * alpha - 2.0 * s + 2.0 * alpha * (mu + L);
    const double quad = alpha * alpha * rho * rho;
    if (!(lin > 0.0)) return false;
    const double p_max = std::min(2.0 * mu * L / s, 2.0 / (alpha * alpha));
    const double p = std::min(lin / (2.0 * quad), p_max);
    const double det = -(L - mu) * (L - mu) + lin * p - quad * p * p;
    return det > 0.0;
  };
  double lo = 1e-6;
  double hi = 1.0;
  if (feasible(lo)) return lo;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

double gd_bound_R(double alpha, double mu, double L, int d) {
  check_mu_L(mu, L);
  if (!(alpha > 0.0) || !(alpha < 2.0 / L)) {
    fail(ErrorCode::kOutOfRange, "alpha must lie in (0, 2/L)");
  }
  if (d < 1) fail(ErrorCode::kInvalidArgument, "d must be at least 1");
  const double rho = gd_rate(alpha, mu, L);
  return L * alpha * alpha * d / (2.0 * (1.0 - rho * rho));
}

ExplicitBound ag_explicit_bound(double alpha, double mu, double L, int d) {
  check_mu_L(mu, L);
  if (!(alpha > 0.0) || !(alpha <= 1.0 / L)) {
    fail(ErrorCode::kOutOfRange, "alpha must lie in (0, 1/L]");
  }
  if (d < 1) fail(ErrorCode::kInvalidArgument, "d must be at least 1");
  const double r = std::sqrt(alpha * mu);
  ExplicitBound out;
  out.rho = std::sqrt(1.0 - r);
  out.R = std::sqrt(alpha) * d * (1.0 + alpha * L) / (2.0 * std::sqrt(mu));
  out.beta = (1.0 - r) / (1.0 + r);
  return out;
}

Eigen::Matrix2d ag_witness_ptilde(double alpha, double mu) {
  const Eigen::Vector2d v(std::sqrt(0.5 / alpha),
                          std::sqrt(0.5 * mu) - std::sqrt(0.5 / alpha));
  return v * v.transpose();
}

double R_from_certificate(const Certificate& cert, double alpha, double L, int d) {
  if (!cert.feasible || cert.slack_min_eig < -kCertFeasTol || !(cert.c > 0.0)) {
    fail(ErrorCode::kInfeasibleCert, "certificate is not feasible with c > 0");
  }
  if (cert.ptilde.rows() != 2 || cert.ptilde.cols() != 2) {
    fail(ErrorCode::kInvalidArgument, "certificate P must be 2x2");
  }
  const double base = L * alpha * alpha * d / (2.0 * (1.0 - cert.rho * cert.rho));
  const double p11 = cert.ptilde(0, 0);
  const double p12 = cert.ptilde(0, 1);
  const double p22 = cert.ptilde(1, 1);
  if (p22 > 0.0) {
    const double schur = p11 - p12 * p12 / p22;
    return base * (cert.c * L + 2.0 * p11) / (cert.c * L + 2.0 * schur);
  }
  return base;
}

SdpProblem build_cert_sdp(const MIBlocks& blocks, const Eigen::Vector4d& cost) {
  if (blocks.spec.method != Method::kAG) {
    fail(ErrorCode::kInvalidArgument, "the four-variable SDP is defined for AG");
  }
  SdpProblem p;
  p.cost = cost;
  // Slack: X(rho) + cbar X0 - Phi(P), linear in P.
  AffineLmi slack;
  slack.F.push_back(blocks.x);
  slack.F.push_back(blocks.x0);
  slack.F.push_back(-blocks.phi_of(sym2(1, 0, 0)));
  slack.F.push_back(-blocks.phi_of(sym2(0, 1, 0)));
  slack.F.push_back(-blocks.phi_of(sym2(0, 0, 1)));
  p.constraints.push_back(slack);

  AffineLmi pcone;
  pcone.F = {MatrixXd::Zero(2, 2), MatrixXd::Zero(2, 2), sym2(1, 0, 0),
             sym2(0, 1, 0), sym2(0, 0, 1)};
  p.constraints.push_back(pcone);

  auto scalar = [](double v) { return MatrixXd::Constant(1, 1, v); };
  AffineLmi cnonneg;
  cnonneg.F = {scalar(0), scalar(1), scalar(0), scalar(0), scalar(0)};
  p.constraints.push_back(cnonneg);

  // Caps keep the barrier bounded below; they are far from any optimum.
  const double cap =
      1e4 * (1.0 + 1.0 / blocks.spec.alpha + blocks.L + blocks.x0.cwiseAbs().maxCoeff());
  AffineLmi ccap;
  ccap.F = {scalar(cap), scalar(-1), scalar(0), scalar(0), scalar(0)};
  p.constraints.push_back(ccap);
  AffineLmi pcap;
  pcap.F = {scalar(cap), scalar(0), scalar(-1), scalar(0), scalar(-1)};
  p.constraints.push_back(pcap);
  return p;
}

CertSdpResult ag_sdp_bound(double alpha, double beta, double rho, double mu,
                           double L, int d) {
  if (d < 1) fail(ErrorCode::kInvalidArgument, "d must be at least 1");
  const MIBlocks blocks = build_blocks(AlgorithmSpec::ag(alpha, beta), mu, L, rho);
  const SdpProblem problem = build_cert_sdp(blocks, Eigen::Vector4d(0, 1, 0, 0));

  std::optional<Eigen::VectorXd> incumbent;
  const double r = std::sqrt(alpha * mu);
  if (alpha * L <= 1.0 + 1e-12 && std::abs(beta - (1.0 - r) / (1.0 + r)) <= 1e-12) {
    const Eigen::Matrix2d W = ag_witness_ptilde(alpha, mu);
    incumbent = Eigen::Vector4d(0.0, W(0, 0), W(0, 1), W(1, 1));
  }
  CertSdpResult out;
  out.sdp = solve_small_sdp(problem, Eigen::Vector4d(1.0, 1.0, 0.0, 1.0), incumbent);
  const Eigen::VectorXd& z = out.sdp.z;
  out.cert.ptilde = sym2(z(1), z(2), z(3));
  out.cert.c0 = z(0);
  out.cert.cbar = z(0);
  out.cert.c = 1.0;
  out.cert.rho = rho;
  out.cert.slack_min_eig = out.sdp.slack_min_eig;
  out.cert.feasible = out.sdp.status == SdpStatus::kOptimal &&
                      out.sdp.slack_min_eig >= -kCertFeasTol;
  out.Rbar = out.cert.feasible
                 ? alpha * alpha * d * (L + 2.0 * z(1)) / (2.0 * (1.0 - rho * rho))
                 : kInf;
  out.cert.bound_R = out.Rbar;
  return out;
}

std::vector<SdpCurvePoint> ag_sdp_curve(const std::vector<double>& eps_grid,
                                        double mu, double L, int d,
                                        GridCounts grid) {
  if (grid.alpha < 8 || grid.beta < 8) {
    fail(ErrorCode::kInvalidArgument, "grid counts must be at least 8");
  }
  const double rho_bar = ag_fastest_rate(mu, L);
  std::vector<SdpCurvePoint> curve;
  for (double eps : eps_grid) {
    const AgEpsParams pe = ag_alpha_for_eps(eps, mu, L);
    SdpCurvePoint pt;
    pt.eps = eps;
    pt.rho = (1.0 + eps) * rho_bar;
    pt.witness_bound = std::sqrt(pe.alpha) * d / std::sqrt(mu);
    pt.Rbar = kInf;
    auto consider = [&](double a, double b) {
      const CertSdpResult res = ag_sdp_bound(a, b, pt.rho, mu, L, d);
      ++pt.solved;
      if (!res.cert.feasible) {
        ++pt.infeasible;
        return;
      }
      if (res.Rbar < pt.Rbar) {
        pt.Rbar = res.Rbar;
        pt.alpha = a;
        pt.beta = b;
      }
    };
    consider(pe.alpha, pe.beta);
    for (int i = 1; i <= grid.alpha; ++i) {
      const double a = 2.0 / L * i / grid.alpha;
      for (int j = 0; j < grid.beta; ++j) {
        const double b = static_cast<double>(j) / (grid.beta - 1);
        // A certificate at rate rho also bounds the rate on quadratics.
        if (!in_stability_region(a, b, mu, L).inside) continue;
        if (ag_rate(a, b, mu, L) > pt.rho) continue;
        consider(a, b);
      }
    }
    curve.push_back(pt);
  }
  return curve;
}

ParetoCurve sdp_curve_to_pareto(const std::vector<SdpCurvePoint>& points) {
  ParetoCurve out;
  out.method = Method::kAG;
  out.provenance = Provenance::kSdpCert;
  for (const auto& p : points) {
    RateRobustnessPoint rp;
    rp.rho = p.rho;
    rp.J = p.Rbar;
    rp.params = AlgorithmSpec::ag(p.alpha, p.beta);
    out.points.push_back(rp);
    out.params.push_back(p.eps);
  }
  return out;
}

double perturb_stability_bounds(const AlgorithmSpec& spec, double mu, double L,
                                int d) {
  spec.validate();
  check_mu_L(mu, L);
  if (d < 1) fail(ErrorCode::kInvalidArgument, "d must be at least 1");
  const double a = spec.alpha;
  if (spec.method == Method::kGD) {
    if (!(a < 2.0 / L)) fail(ErrorCode::kOutOfRange, "alpha must lie in (0, 2/L)");
    const double rho = gd_rate(a, mu, L);
    return a * a * d / (1.0 - rho * rho);
  }
  if (!(a <= 1.0 / L)) fail(ErrorCode::kOutOfRange, "alpha must lie in (0, 1/L]");
  const double r = std::sqrt(a * mu);
  if (std::abs(spec.beta - (1.0 - r) / (1.0 + r)) > 1e-9) {
    fail(ErrorCode::kOutOfRange, "beta must equal (1 - sqrt(alpha mu))/(1 + sqrt(alpha mu))");
  }
  return a * a * d * (1.0 + L / mu) / r;
}

}  // namespace gradnoise
