#include "gradnoise/sdp.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "gradnoise/cert.h"
#include "gradnoise/quad.h"
#include "gradnoise/tradeoff.h"

namespace gradnoise {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd Scalar(double v) { return MatrixXd::Constant(1, 1, v); }

TEST(SmallSdpTest, TwoByTwoSchurBound) {
  // minimize x s.t. [[x, 1], [1, 1]] >= 0, so x >= 1.
  SdpProblem p;
  p.cost = VectorXd::Constant(1, 1.0);
  AffineLmi lmi;
  MatrixXd F0(2, 2), F1(2, 2);
  F0 << 0, 1, 1, 1;
  F1 << 1, 0, 0, 0;
  lmi.F = {F0, F1};
  p.constraints = {lmi};
  AffineLmi cap;
  cap.F = {Scalar(100), Scalar(-1)};
  p.constraints.push_back(cap);
  const SdpResult r = solve_small_sdp(p, VectorXd::Constant(1, 5.0));
  ASSERT_EQ(r.status, SdpStatus::kOptimal);
  EXPECT_NEAR(r.z(0), 1.0, 1e-5);
  EXPECT_GE(r.slack_min_eig, -1e-10);
  EXPECT_LE(r.kkt_residual, 1e-7);
  EXPECT_LE(r.gap, 1e-6 * (1 + std::abs(r.cost)));
}

TEST(SmallSdpTest, LargestEigenvalueOracle) {
  std::mt19937_64 rng(61);
  std::normal_distribution<double> N;
  for (int trial = 0; trial < 20; ++trial) {
    MatrixXd G(3, 3);
    for (int i = 0; i < 9; ++i) G(i / 3, i % 3) = N(rng);
    const MatrixXd M = G + G.transpose();
    // minimize t s.t. t I - M >= 0.
    SdpProblem p;
    p.cost = VectorXd::Constant(1, 1.0);
    AffineLmi lmi;
    lmi.F = {-M, MatrixXd::Identity(3, 3)};
    AffineLmi cap;
    cap.F = {Scalar(1e3), Scalar(-1)};
    p.constraints = {lmi, cap};
    const SdpResult r = solve_small_sdp(p, VectorXd::Constant(1, 0.0));
    ASSERT_EQ(r.status, SdpStatus::kOptimal);
    const double lmax = Eigen::SelfAdjointEigenSolver<MatrixXd>(M).eigenvalues()(2);
    EXPECT_NEAR(r.cost, lmax, 1e-5 * (1 + std::abs(lmax)));
    EXPECT_LE(r.kkt_residual, 1e-7);
  }
}

TEST(SmallSdpTest, ReportsInfeasible) {
  // x >= 1 and x <= 0.
  SdpProblem p;
  p.cost = VectorXd::Constant(1, 1.0);
  AffineLmi a, b;
  a.F = {Scalar(-1), Scalar(1)};
  b.F = {Scalar(0), Scalar(-1)};
  p.constraints = {a, b};
  const SdpResult r = solve_small_sdp(p, VectorXd::Constant(1, 0.5));
  EXPECT_EQ(r.status, SdpStatus::kInfeasible);
  EXPECT_LT(r.phase1_margin, 0.0);
}

TEST(SmallSdpTest, IncumbentIsKeptWhenBetter) {
  SdpProblem p;
  p.cost = VectorXd::Constant(1, 1.0);
  AffineLmi a, cap;
  a.F = {Scalar(-1), Scalar(1)};
  cap.F = {Scalar(10), Scalar(-1)};
  p.constraints = {a, cap};
  SdpOptions loose;
  loose.max_outer = 1;
  const SdpResult r =
      solve_small_sdp(p, VectorXd::Constant(1, 5.0), VectorXd::Constant(1, 1.0), loose);
  EXPECT_TRUE(r.used_incumbent);
  EXPECT_DOUBLE_EQ(r.z(0), 1.0);
}

TEST(CertSdpTest, WitnessBoundsTheOptimum) {
  for (const auto& [mu, L] : {std::pair{1.0, 20.0}, {0.1, 1.0}}) {
    for (double eps : {0.0, 0.02, 0.05}) {
      const AgEpsParams pe = ag_alpha_for_eps(eps, mu, L);
      const double rho = std::sqrt(1 - std::sqrt(pe.alpha * mu));
      const MIBlocks blocks = build_blocks(AlgorithmSpec::ag(pe.alpha, pe.beta), mu, L, rho);
      const Eigen::Matrix2d W = ag_witness_ptilde(pe.alpha, mu);
      EXPECT_GE(check_mi(blocks, 0.0, 1.0, W), -1e-10);
      const CertSdpResult r = ag_sdp_bound(pe.alpha, pe.beta, rho, mu, L, 1);
      ASSERT_TRUE(r.cert.feasible);
      EXPECT_LE(r.cert.ptilde(0, 0), W(0, 0) + 1e-9);
      EXPECT_LE(r.cert.ptilde(0, 0), 1 / (2 * pe.alpha) + 1e-9);
      EXPECT_GE(r.cert.slack_min_eig, -kCertFeasTol);
      // The reported certificate satisfies the inequality it claims.
      EXPECT_GE(check_mi(blocks, r.cert.cbar, 1.0, r.cert.ptilde), -1e-9);
    }
  }
}

TEST(CertSdpTest, RateBelowQuadraticRateIsInfeasible) {
  const double mu = 1.0, L = 20.0;
  const double a = 0.04, b = 0.6;
  ASSERT_TRUE(in_stability_region(a, b, mu, L).inside);
  const double rho_quad = ag_rate(a, b, mu, L);
  const CertSdpResult r = ag_sdp_bound(a, b, 0.9 * rho_quad, mu, L, 1);
  EXPECT_FALSE(r.cert.feasible);
  EXPECT_TRUE(std::isinf(r.Rbar));
  EXPECT_EQ(r.sdp.status, SdpStatus::kInfeasible);
}

TEST(CertSdpTest, OptimumIsLocallyOptimalAndKkt) {
  const double mu = 1.0, L = 20.0;
  std::mt19937_64 rng(67);
  std::normal_distribution<double> N;
  int solved = 0;
  for (double a : {0.02, 0.035, 0.05}) {
    for (double b : {0.4, 0.6, 0.8}) {
      if (!in_stability_region(a, b, mu, L).inside) continue;
      const double rho = std::min(0.999, 1.05 * ag_rate(a, b, mu, L));
      const MIBlocks blocks = build_blocks(AlgorithmSpec::ag(a, b), mu, L, rho);
      const SdpProblem problem = build_cert_sdp(blocks, Eigen::Vector4d(0, 1, 0, 0));
      const CertSdpResult r = ag_sdp_bound(a, b, rho, mu, L, 1);
      if (!r.cert.feasible) continue;
      ++solved;
      if (!r.sdp.used_incumbent) EXPECT_LE(r.sdp.kkt_residual, 1e-7);
      EXPECT_LE(r.sdp.gap, 1e-6 * (1 + std::abs(r.sdp.cost)));
      for (int trial = 0; trial < 200; ++trial) {
        Eigen::Vector4d dir(N(rng), N(rng), N(rng), N(rng));
        const VectorXd z = r.sdp.z + 1e-4 * dir.normalized();
        if (sdp_min_eig(problem, z) < 0.0) continue;
        EXPECT_GE(problem.cost.dot(z), r.sdp.cost - 1e-6);
      }
    }
  }
  EXPECT_GT(solved, 3);
}

}  // namespace
}  // namespace gradnoise
