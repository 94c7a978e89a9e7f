#include "gradnoise/sim.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "gradnoise/cert.h"
#include "gradnoise/error.h"
#include "gradnoise/quad.h"
#include "gradnoise/tradeoff.h"
#include "oracles.h"

namespace gradnoise {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void ExpectErrorCode(ErrorCode code, const std::function<void()>& fn) {
  try {
    fn();
    ADD_FAILURE() << "expected " << error_code_name(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

TEST(CounterNormalTest, DeterministicAndStandard) {
  EXPECT_EQ(counter_normal(1, 2, 3, 4), counter_normal(1, 2, 3, 4));
  EXPECT_NE(counter_normal(1, 2, 3, 4), counter_normal(1, 2, 3, 5));
  EXPECT_NE(counter_normal(1, 2, 3, 4), counter_normal(2, 2, 3, 4));
  double sum = 0, sum2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = counter_normal(9, i / 100, i % 100, i % 7);
    sum += z;
    sum2 += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(sum2 / n, 1.0, 0.02);
}

TEST(ObjectiveTest, QuadraticGradient) {
  const Objective f = make_quadratic_objective(QuadraticSpectrum({0.1, 0.5, 1.0}), 3);
  VectorXd x(3), g;
  x << 0.3, -1.0, 2.0;
  f.gradient(x, &g);
  const VectorXd e = x - f.xstar();
  EXPECT_NEAR(g(0), 0.1 * e(0), 1e-15);
  EXPECT_NEAR(g(2), 1.0 * e(2), 1e-15);
  EXPECT_NEAR(f.value(x) - f.fstar(), 0.5 * (0.1 * e(0) * e(0) + 0.5 * e(1) * e(1) +
                                              e(2) * e(2)),
              1e-14);
  EXPECT_DOUBLE_EQ(f.mu(), 0.1);
  EXPECT_DOUBLE_EQ(f.L(), 1.0);
}

TEST(ObjectiveTest, LaplacianSpectrum) {
  const Objective f0 = make_laplacian_objective(4, 0.0, 1);
  std::vector<double> e = f0.eigenvalues();
  std::sort(e.begin(), e.end());
  MatrixXd Lap = MatrixXd::Zero(4, 4);
  for (int i = 0; i < 4; ++i) {
    Lap(i, i) = 2;
    Lap(i, (i + 1) % 4) -= 1;
    Lap(i, (i + 3) % 4) -= 1;
  }
  const Eigen::VectorXd ref = Eigen::SelfAdjointEigenSolver<MatrixXd>(Lap).eigenvalues();
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(e[i], ref(i), 1e-12);
  EXPECT_NEAR(e[0], 0.0, 1e-12);
  EXPECT_NEAR(e[3], 4.0, 1e-12);

  const Objective f1 = make_laplacian_objective(4, 0.1, 1);
  for (int j = 0; j < 4; ++j) {
    EXPECT_NEAR(f1.eigenvalues()[j], f0.eigenvalues()[j] + 0.2, 1e-12);
  }
  EXPECT_NEAR(f1.mu(), 0.2, 1e-12);
  ExpectErrorCode(ErrorCode::kInvalidArgument, [] { make_laplacian_objective(1, 0.1, 0); });
}

TEST(ObjectiveTest, LogisticIsStronglyConvexAndSolved) {
  const Objective f = make_logistic_objective(200, 10, 100.0, 5);
  EXPECT_EQ(f.kind(), ObjectiveKind::kLogisticL2);
  EXPECT_NEAR(f.L() / f.mu(), 100.0, 1e-9);
  VectorXd g;
  f.gradient(f.xstar(), &g);
  EXPECT_LE(g.norm(), 1e-9);
  // Central-difference check of the gradient.
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N;
  VectorXd x(10);
  for (int i = 0; i < 10; ++i) x(i) = N(rng);
  f.gradient(x, &g);
  for (int i = 0; i < 10; ++i) {
    VectorXd xp = x, xm = x;
    xp(i) += 1e-6;
    xm(i) -= 1e-6;
    EXPECT_NEAR(g(i), (f.value(xp) - f.value(xm)) / 2e-6, 1e-6);
  }
  // Strong convexity lower bound at random points.
  for (int t = 0; t < 20; ++t) {
    VectorXd y(10);
    for (int i = 0; i < 10; ++i) y(i) = N(rng);
    EXPECT_GE(f.value(y) - f.fstar(), 0.5 * f.mu() * (y - f.xstar()).squaredNorm() - 1e-12);
  }
}

TEST(RunNoisyTest, NoiselessGdEnvelope) {
  const QuadraticSpectrum s({0.1, 0.4, 1.0});
  const Objective f = make_quadratic_objective(s, 1);
  const double a = 1.5;
  const double rho = gd_rate(a, s.mu(), s.L());
  const VectorXd x0 = VectorXd::Zero(3);
  const auto traj = run_noisy(AlgorithmSpec::gd(a), f, x0, NoiseModel{0.0}, 200, 7);
  for (size_t k = 1; k < traj.size(); ++k) {
    EXPECT_LE(traj[k].subopt,
              std::pow(rho, 2.0 * k) * traj[0].subopt * s.kappa() * (1 + 1e-12) + 1e-300);
  }
  // Noiseless runs do not depend on the seed.
  const auto other = run_noisy(AlgorithmSpec::gd(a), f, x0, NoiseModel{0.0}, 200, 99);
  for (size_t k = 0; k < traj.size(); ++k) EXPECT_EQ(traj[k].subopt, other[k].subopt);
}

TEST(RunNoisyTest, NoiselessAgEnvelope) {
  const double mu = 0.1, L = 1.0;
  const QuadraticSpectrum s({mu, 0.5, L});
  const Objective f = make_quadratic_objective(s, 2);
  for (double a : {0.3, 1.0}) {
    const ExplicitBound eb = ag_explicit_bound(a, mu, L, 3);
    const auto traj = run_noisy(AlgorithmSpec::ag(a, eb.beta), f, VectorXd::Zero(3),
                                NoiseModel{0.0}, 400, 0);
    // f(x_k) - f* <= rho^(2k) V(xi_0) with V(xi_0) <= (f(x0) - f*) + mu/2 |x0 - x*|^2.
    const double v0 = traj[0].subopt + 0.5 * mu * traj[0].dist2;
    for (size_t k = 0; k < traj.size(); ++k) {
      // Values below 1e-28 are at the rounding floor of x_k - x*.
      EXPECT_LE(traj[k].subopt, std::pow(eb.rho, 2.0 * k) * v0 * (1 + 1e-9) + 1e-28);
    }
  }
}

TEST(RunNoisyTest, MemorylessCase) {
  // A_Q = 0: x_{k+1} - x* = -alpha w_k exactly.
  const Objective f = make_quadratic_objective(QuadraticSpectrum({1.0}), 4);
  const auto traj = run_noisy(AlgorithmSpec::gd(1.0), f, f.xstar(), NoiseModel{1.0}, 50, 11, 3);
  for (int k = 1; k <= 50; ++k) {
    const double w = counter_normal(11, 3, k - 1, 0);
    EXPECT_NEAR(traj[k].dist2, w * w, 1e-12);
  }
}

TEST(RunNoisyTest, ReproducibleAndDetectsDivergence) {
  const Objective f = make_quadratic_objective(QuadraticSpectrum({0.1, 1.0}), 4);
  const auto a = run_noisy(AlgorithmSpec::ag(0.5, 0.5), f, VectorXd::Zero(2), {0.3}, 100, 5, 2);
  const auto b = run_noisy(AlgorithmSpec::ag(0.5, 0.5), f, VectorXd::Zero(2), {0.3}, 100, 5, 2);
  for (size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].subopt, b[k].subopt);
    EXPECT_EQ(a[k].dist2, b[k].dist2);
  }
  ExpectErrorCode(ErrorCode::kNonFinite, [&] {
    run_noisy(AlgorithmSpec::gd(3.0), f, VectorXd::Ones(2), {0.0}, 5000, 0);
  });
}

TEST(EstimateTest, MemorylessGd) {
  const Objective f = make_quadratic_objective(QuadraticSpectrum({1.0}), 0);
  EstimatorConfig cfg;
  cfg.replicas = 200;
  cfg.k_max = 500;
  cfg.seed = 17;
  const auto [J, Jp] = estimate_J_and_Jprime(AlgorithmSpec::gd(1.0), f, {1.0}, cfg);
  EXPECT_NEAR(J.value, 0.5, 3 * J.stderr_value);
  EXPECT_NEAR(Jp.value, 1.0, 3 * Jp.stderr_value);
  EXPECT_EQ(J.burn_in, 1);
}

TEST(EstimateTest, ExampleSetting) {
  const QuadraticSpectrum s({0.1, 1.0});
  const Objective f = make_quadratic_objective(s, 0);
  EstimatorConfig cfg;
  cfg.replicas = 300;
  cfg.k_max = 1500;
  cfg.seed = 1;
  const Estimate J = estimate_J(AlgorithmSpec::gd(1.5055), f, {0.1}, cfg);
  EXPECT_NEAR(J.value, 1.9294, 0.05 * 1.9294);
}

TEST(EstimateTest, AgMatchesClosedForm) {
  std::mt19937_64 rng(19);
  const QuadraticSpectrum s(oracle::random_spectrum(rng, 4, 0.1, 1.0));
  const Objective f = make_quadratic_objective(s, 2);
  EstimatorConfig cfg;
  cfg.replicas = 300;
  cfg.k_max = 1500;
  cfg.seed = 23;
  const double a = 0.8, b = 0.4;
  const auto [J, Jp] = estimate_J_and_Jprime(AlgorithmSpec::ag(a, b), f, {1.0}, cfg);
  EXPECT_NEAR(J.value, ag_robustness(a, b, s), 3 * J.stderr_value);
  EXPECT_NEAR(Jp.value, ag_robustness_iterates(a, b, s), 3 * Jp.stderr_value);
}

TEST(EstimateTest, ZeroMomentumAgEqualsGd) {
  const Objective f = make_quadratic_objective(QuadraticSpectrum({0.2, 0.9}), 5);
  EstimatorConfig cfg;
  cfg.replicas = 20;
  cfg.k_max = 200;
  cfg.burn_in = 50;
  cfg.seed = 8;
  const Estimate gd = estimate_Jprime(AlgorithmSpec::gd(1.0), f, {0.5}, cfg);
  const Estimate ag = estimate_Jprime(AlgorithmSpec::ag(1.0, 0.0), f, {0.5}, cfg);
  EXPECT_EQ(gd.value, ag.value);
  EXPECT_EQ(gd.stderr_value, ag.stderr_value);
}

TEST(EstimateTest, Validation) {
  const Objective f = make_quadratic_objective(QuadraticSpectrum({1.0}), 0);
  EstimatorConfig cfg;
  ExpectErrorCode(ErrorCode::kInvalidArgument,
                  [&] { estimate_J(AlgorithmSpec::gd(1.0), f, {0.0}, cfg); });
  cfg.burn_in = cfg.k_max;
  ExpectErrorCode(ErrorCode::kInvalidArgument,
                  [&] { estimate_J(AlgorithmSpec::gd(1.0), f, {1.0}, cfg); });
  cfg.burn_in.reset();
  cfg.replicas = 1;
  EXPECT_TRUE(std::isnan(estimate_J(AlgorithmSpec::gd(1.0), f, {1.0}, cfg).stderr_value));
}

TEST(EstimateTest, MeanSuboptimalityEnvelope) {
  // GD on a quadratic has symmetric A_Q, so E f(x_k) - f* approaches sigma^2 J
  // geometrically with rate rho^2 from x0 = x*.
  const QuadraticSpectrum s({0.2, 0.6, 1.0});
  const Objective f = make_quadratic_objective(s, 6);
  const double a = 1.2, sigma = 1.0;
  const double rho = gd_rate(a, s.mu(), s.L());
  const double J = gd_robustness(a, s);
  // Exact mean from the per-eigenvalue recursion: e_{k+1} = (1-a l)^2 e_k + a^2.
  std::vector<double> mean(60, 0.0);
  std::vector<double> e(3, 0.0);
  for (int k = 0; k < 60; ++k) {
    for (int i = 0; i < 3; ++i) mean[k] += 0.5 * s.eigenvalues()[i] * e[i];
    for (int i = 0; i < 3; ++i) {
      const double q = 1 - a * s.eigenvalues()[i];
      e[i] = q * q * e[i] + a * a * sigma * sigma;
    }
  }
  const double psi = J;
  for (int k = 0; k < 60; ++k) {
    EXPECT_LE(std::abs(mean[k] - sigma * sigma * J), psi * std::pow(rho + 0.02, 2.0 * k));
  }
  // Replica average tracks the exact mean.
  const int R = 4000;
  std::vector<double> avg(31, 0.0);
  for (int r = 0; r < R; ++r) {
    const auto traj = run_noisy(AlgorithmSpec::gd(a), f, f.xstar(), {sigma}, 30, 77, r);
    for (int k = 0; k <= 30; ++k) avg[k] += traj[k].subopt / R;
  }
  for (int k = 5; k <= 30; k += 5) {
    EXPECT_NEAR(avg[k], mean[k], 0.1 * mean[k]) << "k=" << k;
  }
}

TEST(ImpulseTest, MatchesIterateRobustness) {
  EXPECT_NEAR(impulse_J_star(AlgorithmSpec::gd(1.0),
                             make_quadratic_objective(QuadraticSpectrum({1.0}), 0)),
              1.0, 1e-15);
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int checked = 0;
  while (checked < 30) {
    const double a = 2.0 * U(rng);
    const double b = checked % 3 == 0 ? 0.0 : U(rng);
    if (!in_stability_region(a, b, 0.1, 1.0).inside ||
        ag_rate(a, b, 0.1, 1.0) > 0.995) {
      continue;
    }
    const QuadraticSpectrum s(oracle::random_spectrum(rng, 1 + checked % 5, 0.1, 1.0));
    const Objective f = make_quadratic_objective(s, checked);
    const double ref = ag_robustness_iterates(a, b, s);
    EXPECT_NEAR(impulse_J_star(AlgorithmSpec::ag(a, b), f), ref, 1e-8 * ref);
    ++checked;
  }
}

TEST(ImpulseTest, LogisticRespectsAgBound) {
  const Objective f = make_logistic_objective(300, 8, 50.0, 3);
  for (double frac : {0.2, 1.0}) {
    const double a = frac / f.L();
    const ExplicitBound eb = ag_explicit_bound(a, f.mu(), f.L(), f.dim());
    const AlgorithmSpec spec = AlgorithmSpec::ag(a, eb.beta);
    EXPECT_LE(impulse_J_star(spec, f),
              perturb_stability_bounds(spec, f.mu(), f.L(), f.dim()));
  }
}

}  // namespace
}  // namespace gradnoise
