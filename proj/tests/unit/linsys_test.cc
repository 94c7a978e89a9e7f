#include "gradnoise/linsys.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "gradnoise/error.h"
#include "gradnoise/quad.h"
#include "oracles.h"

namespace gradnoise {
namespace {

using Eigen::MatrixXd;

void ExpectErrorCode(ErrorCode code, const std::function<void()>& fn) {
  try {
    fn();
    ADD_FAILURE() << "expected " << error_code_name(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

TEST(BuildSystemTest, GdTranscription) {
  const SystemMatrices s = build_system(AlgorithmSpec::gd(0.5), 2);
  EXPECT_EQ(s.state_dim, 2);
  EXPECT_EQ(s.io_dim, 2);
  EXPECT_TRUE(s.A.isApprox(MatrixXd::Identity(2, 2)));
  EXPECT_TRUE(s.B.isApprox(-0.5 * MatrixXd::Identity(2, 2)));
  EXPECT_TRUE(s.C.isApprox(MatrixXd::Identity(2, 2)));
  EXPECT_TRUE(s.T.isApprox(MatrixXd::Identity(2, 2)));
}

TEST(BuildSystemTest, AgTranscription) {
  const SystemMatrices s = build_system(AlgorithmSpec::ag(0.1, 0.9), 1);
  MatrixXd A(2, 2), B(2, 1), C(1, 2), T(1, 2);
  A << 1.9, -0.9, 1, 0;
  B << -0.1, 0;
  C << 1.9, -0.9;
  T << 1, 0;
  EXPECT_TRUE(s.A.isApprox(A, 1e-15));
  EXPECT_TRUE(s.B.isApprox(B, 1e-15));
  EXPECT_TRUE(s.C.isApprox(C, 1e-15));
  EXPECT_TRUE(s.T.isApprox(T, 1e-15));
}

TEST(BuildSystemTest, AgZeroMomentumMatchesGdFirstCoordinate) {
  const SystemMatrices ag = build_system(AlgorithmSpec::ag(0.1, 0.0), 1);
  MatrixXd A(2, 2);
  A << 1, 0, 1, 0;
  EXPECT_TRUE(ag.A.isApprox(A));
  const QuadraticSpectrum s({0.7});
  const MatrixXd AQ = closed_loop_matrix(ag, s);
  Eigen::Vector2d xi(1.3, -0.4);
  double x_gd = 1.3;
  for (int k = 0; k < 5; ++k) {
    xi = AQ * xi;
    x_gd = (1.0 - 0.1 * 0.7) * x_gd;
    EXPECT_NEAR(xi(0), x_gd, 1e-15);
  }
}

TEST(BuildSystemTest, KroneckerStructure) {
  const int d = 3;
  const SystemMatrices s = build_system(AlgorithmSpec::ag(0.2, 0.5), d);
  EXPECT_EQ(s.state_dim, 2 * d);
  MatrixXd At(2, 2), Ct(1, 2), Tt(1, 2), Bt(2, 1);
  At << 1.5, -0.5, 1, 0;
  Ct << 1.5, -0.5;
  Tt << 1, 0;
  Bt << -0.2, 0;
  const MatrixXd I = MatrixXd::Identity(d, d);
  EXPECT_TRUE(s.A.isApprox(oracle::kron(At, I)));
  EXPECT_TRUE(s.B.isApprox(oracle::kron(Bt, I)));
  EXPECT_TRUE(s.C.isApprox(oracle::kron(Ct, I)));
  EXPECT_TRUE(s.T.isApprox(oracle::kron(Tt, I)));
  // Applying A to e_i (x) v matches the template action.
  for (int i = 0; i < d; ++i) {
    Eigen::Vector2d v(0.3, -1.1);
    Eigen::VectorXd xi = oracle::kron(v, I.col(i));
    EXPECT_TRUE((s.A * xi).isApprox(oracle::kron(At * v, I.col(i))));
  }
}

TEST(BuildSystemTest, RejectsInvalidInput) {
  ExpectErrorCode(ErrorCode::kInvalidArgument,
                  [] { build_system(AlgorithmSpec::gd(0.5), 0); });
  ExpectErrorCode(ErrorCode::kInvalidArgument,
                  [] { build_system(AlgorithmSpec::gd(0.0), 1); });
  ExpectErrorCode(ErrorCode::kInvalidArgument,
                  [] { build_system(AlgorithmSpec::gd(-1.0), 1); });
  ExpectErrorCode(ErrorCode::kInvalidArgument, [] {
    AlgorithmSpec s;
    s.method = Method::kGD;
    s.alpha = 0.1;
    s.beta = 0.2;
    s.validate();
  });
}

TEST(QuadraticSpectrumTest, SortsAndValidates) {
  const QuadraticSpectrum s({1.0, 0.1, 0.5});
  EXPECT_EQ(s.eigenvalues(), (std::vector<double>{0.1, 0.5, 1.0}));
  EXPECT_DOUBLE_EQ(s.mu(), 0.1);
  EXPECT_DOUBLE_EQ(s.L(), 1.0);
  EXPECT_DOUBLE_EQ(s.kappa(), 10.0);
  ExpectErrorCode(ErrorCode::kInvalidArgument, [] { QuadraticSpectrum({0.0, 1.0}); });
  ExpectErrorCode(ErrorCode::kInvalidArgument, [] { QuadraticSpectrum({}); });
  ExpectErrorCode(ErrorCode::kInvalidArgument,
                  [] { QuadraticSpectrum({1.0, std::nan("")}); });
}

TEST(QuadraticSpectrumTest, FromDenseDiagonalizes) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> N;
  MatrixXd G(4, 4);
  for (int i = 0; i < 16; ++i) G(i / 4, i % 4) = N(rng);
  const MatrixXd Q = G * G.transpose() + 0.5 * MatrixXd::Identity(4, 4);
  const QuadraticSpectrum s = QuadraticSpectrum::from_dense(Q);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(Q);
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(s.eigenvalues()[i], es.eigenvalues()(i), 1e-12 * es.eigenvalues()(3));
  }
}

TEST(ClosedLoopTest, Examples) {
  EXPECT_NEAR(closed_loop_matrix(build_system(AlgorithmSpec::gd(1.0), 1),
                                 QuadraticSpectrum({1.0}))(0, 0),
              0.0, 1e-16);
  const MatrixXd gd = closed_loop_matrix(build_system(AlgorithmSpec::gd(0.5), 2),
                                         QuadraticSpectrum({0.1, 1.0}));
  EXPECT_TRUE(gd.isApprox(Eigen::Vector2d(0.95, 0.5).asDiagonal().toDenseMatrix()));
  const SystemMatrices ag = build_system(AlgorithmSpec::ag(0.1, 0.9), 1);
  const MatrixXd AQ = closed_loop_matrix(ag, QuadraticSpectrum({1.0}));
  MatrixXd expected(2, 2);
  expected << 1.71, -0.81, 1, 0;
  EXPECT_TRUE(AQ.isApprox(expected, 1e-14));
  EXPECT_TRUE(AQ.isApprox(ag.A + ag.B * MatrixXd::Identity(1, 1) * ag.C, 1e-15));
}

TEST(ClosedLoopTest, DimensionMismatch) {
  ExpectErrorCode(ErrorCode::kInvalidArgument, [] {
    closed_loop_matrix(build_system(AlgorithmSpec::gd(0.5), 3),
                       QuadraticSpectrum({0.1, 1.0}));
  });
}

TEST(SpectralRadiusTest, Examples) {
  EXPECT_DOUBLE_EQ(
      spectral_radius(Eigen::Vector2d(0.95, 0.5).asDiagonal().toDenseMatrix()), 0.95);
  MatrixXd M(2, 2);
  M << 1.71, -0.81, 1, 0;
  // Oracle: roots of the characteristic polynomial via its companion matrix.
  MatrixXd companion(2, 2);
  companion << M.trace(), -M.determinant(), 1, 0;
  EXPECT_NEAR(spectral_radius(M), oracle::eigen_spectral_radius(companion), 1e-12);
  EXPECT_NEAR(spectral_radius(M), 0.9, 1e-12);
  MatrixXd N(2, 2);
  N << 0, 1, 0, 0;
  EXPECT_EQ(spectral_radius(N), 0.0);
}

TEST(SpectralRadiusTest, MatchesDenseEigenSolver) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 9;
    MatrixXd M(n, n);
    for (int i = 0; i < n * n; ++i) M(i / n, i % n) = U(rng);
    if (trial % 3 == 0) M = 0.5 * (M + M.transpose()).eval();
    const double ref = oracle::eigen_spectral_radius(M);
    EXPECT_NEAR(spectral_radius(M), ref, 1e-10 * std::max(1.0, ref));
  }
}

TEST(SpectralRadiusTest, AgBlockStructure) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double a = 2.0 * U(rng);
    const double b = U(rng);
    const QuadraticSpectrum s(oracle::random_spectrum(rng, 1 + trial % 6, 0.1, 1.0));
    const MatrixXd AQ =
        closed_loop_matrix(build_system(AlgorithmSpec::ag(a, b), s.d()), s);
    const double ref = oracle::eigen_spectral_radius(AQ);
    EXPECT_NEAR(spectral_radius(AQ), ref, 1e-8 * std::max(1.0, ref));
  }
}

TEST(SymmetricEigenvaluesTest, MatchesSelfAdjointSolver) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> N;
  for (int n = 1; n <= 12; ++n) {
    MatrixXd G(n, n);
    for (int i = 0; i < n * n; ++i) G(i / n, i % n) = N(rng);
    const MatrixXd S = G + G.transpose();
    const std::vector<double> ours = symmetric_eigenvalues(S);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(S);
    const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
    ASSERT_EQ(static_cast<int>(ours.size()), n);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(ours[i], es.eigenvalues()(i), 1e-12 * scale);
  }
}

TEST(SymmetricEigenvaluesTest, CyclicLaplacianSpectrum) {
  const int d = 8;
  MatrixXd Lap = MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    Lap(i, i) = 2;
    Lap(i, (i + 1) % d) = -1;
    Lap(i, (i + d - 1) % d) = -1;
  }
  std::vector<double> expected;
  for (int j = 0; j < d; ++j) expected.push_back(2 - 2 * std::cos(2 * M_PI * j / d));
  std::sort(expected.begin(), expected.end());
  const std::vector<double> ours = symmetric_eigenvalues(Lap);
  for (int i = 0; i < d; ++i) EXPECT_NEAR(ours[i], expected[i], 1e-12);
}

TEST(LyapunovTest, Examples) {
  const LyapunovSolution zero =
      solve_discrete_lyapunov(MatrixXd::Zero(2, 2), MatrixXd::Identity(2, 2));
  EXPECT_TRUE(zero.X.isApprox(MatrixXd::Identity(2, 2)));

  const LyapunovSolution scalar =
      solve_discrete_lyapunov(MatrixXd::Constant(1, 1, 0.5), MatrixXd::Constant(1, 1, 1));
  EXPECT_NEAR(scalar.X(0, 0), 4.0 / 3.0, 1e-14);

  const MatrixXd A = Eigen::Vector2d(0.95, 0.5).asDiagonal();
  const MatrixXd W = 0.25 * MatrixXd::Identity(2, 2);
  const LyapunovSolution sol = solve_discrete_lyapunov(A, W);
  const MatrixXd series = oracle::lyapunov_series(A, W);
  EXPECT_NEAR(sol.X(0, 0), 0.25 / (1 - 0.95 * 0.95), 1e-12);
  EXPECT_NEAR(sol.X(1, 1), 0.25 / (1 - 0.25), 1e-12);
  EXPECT_TRUE(sol.X.isApprox(series, 1e-12));
}

TEST(LyapunovTest, RejectsUnstable) {
  ExpectErrorCode(ErrorCode::kUnstable, [] {
    solve_discrete_lyapunov(MatrixXd::Constant(1, 1, 1.0), MatrixXd::Constant(1, 1, 1));
  });
  MatrixXd A(2, 2);
  A << 0.5, 3.0, -0.5, 0.9;
  ExpectErrorCode(ErrorCode::kUnstable,
                  [&] { solve_discrete_lyapunov(A, MatrixXd::Identity(2, 2)); });
}

TEST(LyapunovTest, ResidualSymmetryAndPsdOnRandomStableMatrices) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> N;
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + trial % 12;
    MatrixXd A(m, m), G(m, m);
    for (int i = 0; i < m * m; ++i) {
      A(i / m, i % m) = N(rng);
      G(i / m, i % m) = N(rng);
    }
    A *= 0.97 / oracle::eigen_spectral_radius(A);
    const MatrixXd W = G * G.transpose();
    const LyapunovSolution sol = solve_discrete_lyapunov(A, W);
    const double tol = 1e-10 * (1 + W.cwiseAbs().maxCoeff());
    EXPECT_LE((A * sol.X * A.transpose() - sol.X + W).cwiseAbs().maxCoeff(), tol);
    EXPECT_LE(sol.residual, tol);
    EXPECT_LE((sol.X - sol.X.transpose()).cwiseAbs().maxCoeff(),
              1e-12 * sol.X.cwiseAbs().maxCoeff());
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<MatrixXd>(sol.X).eigenvalues()(0), -1e-10);
  }
}

TEST(LyapunovTest, LargeSystemUsesIterativePath) {
  // m > 64 takes the doubling path; compare with the per-eigenvalue solves.
  std::mt19937_64 rng(19);
  const QuadraticSpectrum s(oracle::random_spectrum(rng, 40, 0.1, 1.0));
  const AlgorithmSpec spec = AlgorithmSpec::ag(0.8, 0.5);
  const SystemMatrices sys = build_system(spec, s.d());
  const double full = h2_norm_squared(closed_loop_matrix(sys, s), sys.B,
                                      output_matrix(sys, s, Output::kFunctionValue));
  EXPECT_NEAR(full, h2_structured(spec, s, Output::kFunctionValue), 1e-10 * full);
}

TEST(H2Test, Examples) {
  const MatrixXd one = MatrixXd::Constant(1, 1, 1.0);
  EXPECT_NEAR(h2_norm_squared(MatrixXd::Zero(1, 1), one, one), 1.0, 1e-15);
  EXPECT_NEAR(h2_norm_squared(MatrixXd::Constant(1, 1, 0.5), one, one), 4.0 / 3.0,
              1e-14);
  const QuadraticSpectrum s({1.0});
  const SystemMatrices sys = build_system(AlgorithmSpec::gd(1.0), 1);
  const double h2 = h2_norm_squared(closed_loop_matrix(sys, s), sys.B,
                                    output_matrix(sys, s, Output::kFunctionValue));
  EXPECT_NEAR(h2, 0.5, 1e-15);
  EXPECT_NEAR(h2, gd_robustness(1.0, s), 1e-15);
}

TEST(H2Test, PrimalEqualsDualOnRandomStableTriples) {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> N;
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + trial % 8;
    const int p = 1 + trial % 3;
    MatrixXd A(m, m), B(m, p), C(p, m);
    for (int i = 0; i < m * m; ++i) A(i / m, i % m) = N(rng);
    for (int i = 0; i < m * p; ++i) {
      B(i / p, i % p) = N(rng);
      C(i % p, i / p) = N(rng);
    }
    A *= 0.9 / oracle::eigen_spectral_radius(A);
    const double primal = h2_norm_squared(A, B, C);
    EXPECT_NEAR(primal, h2_norm_squared_dual(A, B, C), 1e-9 * primal);
    EXPECT_NEAR(primal, oracle::h2_series(A, B, C), 1e-9 * primal);
  }
}

TEST(H2Test, KroneckerConsistency) {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int checked = 0;
  while (checked < 200) {
    const double mu = 0.05 + 0.5 * U(rng);
    const double L = mu + 2.0 * U(rng);
    const double a = 2.0 / L * U(rng);
    const double b = checked % 2 ? U(rng) : 0.0;
    if (!in_stability_region(a, b, mu, L).inside) continue;
    const QuadraticSpectrum s(oracle::random_spectrum(rng, 1 + checked % 8, mu, L));
    const AlgorithmSpec spec =
        checked % 4 == 0 ? AlgorithmSpec::gd(a) : AlgorithmSpec::ag(a, b);
    const SystemMatrices sys = build_system(spec, s.d());
    const MatrixXd AQ = closed_loop_matrix(sys, s);
    for (Output out : {Output::kFunctionValue, Output::kIterates}) {
      const double full = h2_norm_squared(AQ, sys.B, output_matrix(sys, s, out));
      EXPECT_NEAR(full, h2_structured(spec, s, out), 1e-10 * full);
    }
    ++checked;
  }
}

TEST(H2Test, GdSpectralRadiusEqualsRateFormula) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const QuadraticSpectrum s(oracle::random_spectrum(rng, 1 + trial % 8, 0.1, 1.0));
    const double a = 2.5 * U(rng);
    if (a == 0.0) continue;
    const SystemMatrices sys = build_system(AlgorithmSpec::gd(a), s.d());
    EXPECT_DOUBLE_EQ(spectral_radius(closed_loop_matrix(sys, s)),
                     std::max(std::abs(1 - a * s.mu()), std::abs(1 - a * s.L())));
  }
}

}  // namespace
}  // namespace gradnoise
