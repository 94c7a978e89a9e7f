#include "gradnoise/linsys.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include "gradnoise/error.h"

namespace gradnoise {

using Eigen::MatrixXd;

namespace {

constexpr int kDenseLyapunovMaxDim = 64;
constexpr int kJacobiMaxSweeps = 100;
constexpr double kJacobiTol = 1e-12;

double max_abs(const MatrixXd& M) {
  return M.size() == 0 ? 0.0 : M.cwiseAbs().maxCoeff();
}

void require_finite(const MatrixXd& M, const char* what) {
  if (!M.allFinite()) {
    fail(ErrorCode::kNonFinite, std::string(what) + " has non-finite entries");
  }
}

bool is_symmetric(const MatrixXd& M, double rel_tol) {
  return max_abs(M - M.transpose()) <= rel_tol * std::max(1.0, max_abs(M));
}

// Largest eigenvalue magnitude of [[a, b], [c, d]].
double spectral_radius_2x2(double a, double b, double c, double d) {
  const double half = 0.5 * (a + d);
  const double diff = 0.5 * (a - d);
  const double disc = diff * diff + b * c;
  if (disc >= 0.0) return std::abs(half) + std::sqrt(disc);
  return std::sqrt(half * half - disc);
}

// Detects [[D1, D2], [I, 0]] with diagonal D1, D2, the shape of every AG
// closed loop. Such a matrix is a permuted direct sum of 2x2 blocks.
bool has_ag_block_structure(const MatrixXd& M) {
  const int m = static_cast<int>(M.rows());
  if (m < 4 || m % 2 != 0) return false;
  const int n = m / 2;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && (M(i, j) != 0.0 || M(i, n + j) != 0.0)) return false;
      if (M(n + i, j) != (i == j ? 1.0 : 0.0)) return false;
      if (M(n + i, n + j) != 0.0) return false;
    }
  }
  return true;
}

// Eigen's general nonsymmetric solver is used for matrices with no
// exploitable structure.
double spectral_radius_general(const MatrixXd& M) {
  Eigen::EigenSolver<MatrixXd> solver(M, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    fail(ErrorCode::kNoConvergence, "eigenvalue iteration did not converge");
  }
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

int sym_index(int i, int j, int m) {
  if (i > j) std::swap(i, j);
  return i * m - i * (i - 1) / 2 + (j - i);
}

// Dense solve on the m(m+1)/2 independent entries of X.
MatrixXd solve_lyapunov_dense(const MatrixXd& A, const MatrixXd& W) {
  const int m = static_cast<int>(A.rows());
  const int n = m * (m + 1) / 2;
  MatrixXd K = MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) {
      const int r = sym_index(i, j, m);
      rhs(r) = -W(i, j);
      for (int k = 0; k < m; ++k) {
        for (int l = k; l < m; ++l) {
          double coef = A(i, k) * A(j, l);
          if (k != l) coef += A(i, l) * A(j, k);
          K(r, sym_index(k, l, m)) += coef;
        }
      }
      K(r, r) -= 1.0;
    }
  }
  Eigen::PartialPivLU<MatrixXd> lu(K);
  const Eigen::VectorXd diag = lu.matrixLU().diagonal().cwiseAbs();
  if (!(diag.minCoeff() > 1e-14 * diag.maxCoeff())) {
    fail(ErrorCode::kSingular, "vectorized Lyapunov system is rank-deficient");
  }
  Eigen::VectorXd x = lu.solve(rhs);
  for (int step = 0; step < 2; ++step) x += lu.solve(rhs - K * x);
  MatrixXd X(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) X(i, j) = X(j, i) = x(sym_index(i, j, m));
  }
  return X;
}

// Doubling iteration X <- X + A_k X A_k^T, A_k <- A_k^2.
MatrixXd solve_lyapunov_doubling(const MatrixXd& A, const MatrixXd& W) {
  MatrixXd X = W;
  MatrixXd Ak = A;
  for (int iter = 0; iter < 64; ++iter) {
    const MatrixXd increment = Ak * X * Ak.transpose();
    X += increment;
    if (max_abs(increment) <= 1e-17 * std::max(1.0, max_abs(X))) {
      return 0.5 * (X + X.transpose());
    }
    Ak = Ak * Ak;
  }
  fail(ErrorCode::kNoConvergence, "Lyapunov doubling iteration did not converge");
}

}  // namespace

const char* method_name(Method method) {
  return method == Method::kGD ? "gd" : "ag";
}

AlgorithmSpec AlgorithmSpec::gd(double alpha) {
  return AlgorithmSpec{Method::kGD, alpha, 0.0};
}

AlgorithmSpec AlgorithmSpec::ag(double alpha, double beta) {
  return AlgorithmSpec{Method::kAG, alpha, beta};
}

void AlgorithmSpec::validate() const {
  if (!std::isfinite(alpha) || !(alpha > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "alpha must be positive");
  }
  if (!std::isfinite(beta) || beta < 0.0) {
    fail(ErrorCode::kInvalidArgument, "beta must be nonnegative");
  }
  if (method == Method::kGD && beta != 0.0) {
    fail(ErrorCode::kInvalidArgument, "GD requires beta = 0");
  }
}

QuadraticSpectrum::QuadraticSpectrum(std::vector<double> eigenvalues)
    : eigenvalues_(std::move(eigenvalues)) {
  if (eigenvalues_.empty()) {
    fail(ErrorCode::kInvalidArgument, "spectrum must be nonempty");
  }
  for (double v : eigenvalues_) {
    if (!std::isfinite(v) || !(v > 0.0)) {
      fail(ErrorCode::kInvalidArgument, "eigenvalues must be positive and finite");
    }
  }
  std::sort(eigenvalues_.begin(), eigenvalues_.end());
}

QuadraticSpectrum QuadraticSpectrum::from_dense(const MatrixXd& Q) {
  if (Q.rows() != Q.cols() || Q.rows() == 0) {
    fail(ErrorCode::kInvalidArgument, "Q must be square and nonempty");
  }
  if (!is_symmetric(Q, 1e-12)) {
    fail(ErrorCode::kInvalidArgument, "Q must be symmetric");
  }
  return QuadraticSpectrum(symmetric_eigenvalues(Q));
}

SystemMatrices build_system(const AlgorithmSpec& spec, int d) {
  spec.validate();
  if (d < 1) fail(ErrorCode::kInvalidArgument, "d must be at least 1");
  const MatrixXd I = MatrixXd::Identity(d, d);
  const MatrixXd Z = MatrixXd::Zero(d, d);
  SystemMatrices sys;
  sys.io_dim = d;
  if (spec.method == Method::kGD) {
    sys.state_dim = d;
    sys.A = I;
    sys.B = -spec.alpha * I;
    sys.C = I;
    sys.T = I;
    return sys;
  }
  const double b = spec.beta;
  sys.state_dim = 2 * d;
  sys.A.resize(2 * d, 2 * d);
  sys.A << (1.0 + b) * I, -b * I, I, Z;
  sys.B.resize(2 * d, d);
  sys.B << -spec.alpha * I, Z;
  sys.C.resize(d, 2 * d);
  sys.C << (1.0 + b) * I, -b * I;
  sys.T.resize(d, 2 * d);
  sys.T << I, Z;
  return sys;
}

MatrixXd closed_loop_matrix(const SystemMatrices& sys,
                            const QuadraticSpectrum& spectrum) {
  if (spectrum.d() != sys.io_dim) {
    fail(ErrorCode::kInvalidArgument, "spectrum dimension does not match system");
  }
  const Eigen::VectorXd lambda = Eigen::Map<const Eigen::VectorXd>(
      spectrum.eigenvalues().data(), spectrum.d());
  return sys.A + sys.B * lambda.asDiagonal() * sys.C;
}

MatrixXd output_matrix(const SystemMatrices& sys,
                       const QuadraticSpectrum& spectrum, Output output) {
  if (spectrum.d() != sys.io_dim) {
    fail(ErrorCode::kInvalidArgument, "spectrum dimension does not match system");
  }
  if (output == Output::kIterates) return sys.T;
  Eigen::VectorXd w(spectrum.d());
  for (int i = 0; i < spectrum.d(); ++i) {
    w(i) = std::sqrt(0.5 * spectrum.eigenvalues()[i]);
  }
  return w.asDiagonal() * sys.T;
}

std::vector<double> symmetric_eigenvalues(const MatrixXd& M) {
  if (M.rows() != M.cols()) {
    fail(ErrorCode::kInvalidArgument, "matrix must be square");
  }
  require_finite(M, "matrix");
  const int n = static_cast<int>(M.rows());
  MatrixXd a = 0.5 * (M + M.transpose());
  const double scale = a.norm();
  int sweep = 0;
  for (;; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) off += 2.0 * a(p, q) * a(p, q);
    }
    if (std::sqrt(off) <= kJacobiTol * scale) break;
    if (sweep == kJacobiMaxSweeps) {
      fail(ErrorCode::kNoConvergence, "Jacobi sweeps did not converge");
    }
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> values(n);
  for (int i = 0; i < n; ++i) values[i] = a(i, i);
  std::sort(values.begin(), values.end());
  return values;
}

double spectral_radius(const MatrixXd& M) {
  if (M.rows() != M.cols()) {
    fail(ErrorCode::kInvalidArgument, "matrix must be square");
  }
  require_finite(M, "matrix");
  const int m = static_cast<int>(M.rows());
  if (m == 0) return 0.0;
  if (m == 1) return std::abs(M(0, 0));
  if (m == 2) return spectral_radius_2x2(M(0, 0), M(0, 1), M(1, 0), M(1, 1));
  if (is_symmetric(M, 1e-14)) {
    double r = 0.0;
    for (double v : symmetric_eigenvalues(M)) r = std::max(r, std::abs(v));
    return r;
  }
  if (has_ag_block_structure(M)) {
    const int n = m / 2;
    double r = 0.0;
    for (int i = 0; i < n; ++i) {
      r = std::max(r, spectral_radius_2x2(M(i, i), M(i, n + i), 1.0, 0.0));
    }
    return r;
  }
  return spectral_radius_general(M);
}

LyapunovSolution solve_discrete_lyapunov(const MatrixXd& A, const MatrixXd& W) {
  if (A.rows() != A.cols() || W.rows() != A.rows() || W.cols() != A.cols()) {
    fail(ErrorCode::kInvalidArgument, "Lyapunov operands have mismatched shapes");
  }
  require_finite(W, "W");
  if (!is_symmetric(W, 1e-12)) {
    fail(ErrorCode::kInvalidArgument, "W must be symmetric");
  }
  const double rho = spectral_radius(A);
  if (rho >= 1.0 - kStableTol) {
    std::ostringstream os;
    os << "spectral radius " << rho << " is not below one";
    fail(ErrorCode::kUnstable, os.str());
  }
  LyapunovSolution sol;
  sol.X = A.rows() <= kDenseLyapunovMaxDim ? solve_lyapunov_dense(A, W)
                                           : solve_lyapunov_doubling(A, W);
  sol.residual = max_abs(A * sol.X * A.transpose() - sol.X + W);
  if (!sol.X.allFinite() || sol.residual > 1e-10 * (1.0 + max_abs(W))) {
    fail(ErrorCode::kNumericalFailure, "Lyapunov residual exceeds tolerance");
  }
  return sol;
}

double h2_norm_squared(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Cout) {
  if (B.rows() != A.rows() || Cout.cols() != A.rows()) {
    fail(ErrorCode::kInvalidArgument, "H2 operands have mismatched shapes");
  }
  const LyapunovSolution sol = solve_discrete_lyapunov(A, B * B.transpose());
  return (Cout * sol.X * Cout.transpose()).trace();
}

double h2_norm_squared_dual(const MatrixXd& A, const MatrixXd& B,
                            const MatrixXd& Cout) {
  if (B.rows() != A.rows() || Cout.cols() != A.rows()) {
    fail(ErrorCode::kInvalidArgument, "H2 operands have mismatched shapes");
  }
  const LyapunovSolution sol =
      solve_discrete_lyapunov(A.transpose(), Cout.transpose() * Cout);
  return (B.transpose() * sol.X * B).trace();
}

double h2_structured(const AlgorithmSpec& spec, const QuadraticSpectrum& spectrum,
                     Output output) {
  spec.validate();
  const double a2 = spec.alpha * spec.alpha;
  double total = 0.0;
  for (double lambda : spectrum.eigenvalues()) {
    const double weight = output == Output::kFunctionValue ? 0.5 * lambda : 1.0;
    const double d = 1.0 - spec.alpha * lambda;
    double x = 0.0;
    if (spec.method == Method::kGD) {
      if (std::abs(d) >= 1.0 - kStableTol) {
        fail(ErrorCode::kUnstable, "closed loop is not stable");
      }
      x = a2 / (1.0 - d * d);
    } else {
      const double m11 = (1.0 + spec.beta) * d;
      const double m12 = -spec.beta * d;
      if (spectral_radius_2x2(m11, m12, 1.0, 0.0) >= 1.0 - kStableTol) {
        fail(ErrorCode::kUnstable, "closed loop is not stable");
      }
      // Unknowns (y11, y12, y22) of the symmetric 2x2 block solution.
      Eigen::Matrix3d K;
      K << m11 * m11 - 1.0, 2.0 * m11 * m12, m12 * m12,
           m11, m12 - 1.0, 0.0,
           1.0, 0.0, -1.0;
      const Eigen::Vector3d rhs(-a2, 0.0, 0.0);
      x = K.fullPivLu().solve(rhs)(0);
    }
    total += weight * x;
  }
  return total;
}

}  // namespace gradnoise
