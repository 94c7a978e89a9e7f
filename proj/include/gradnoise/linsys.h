#pragma once

#include <vector>

#include <Eigen/Dense>

namespace gradnoise {

enum class Method { kGD, kAG };

const char* method_name(Method method);

/// A first-order method with constant stepsize alpha and momentum beta.
struct AlgorithmSpec {
  Method method = Method::kGD;
  double alpha = 0.0;
  double beta = 0.0;

  static AlgorithmSpec gd(double alpha);
  static AlgorithmSpec ag(double alpha, double beta);

  /// Throws kInvalidArgument unless alpha > 0, beta >= 0 and beta == 0 for GD.
  void validate() const;
};

/// State-space realization xi_{k+1} = A xi_k + B u_k, y_k = C xi_k,
/// x_k = T xi_k, with u_k the (noisy) gradient evaluated at y_k.
struct SystemMatrices {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd C;
  Eigen::MatrixXd T;
  int state_dim = 0;
  int io_dim = 0;
};

/// Hessian eigenvalues of a strongly convex quadratic, sorted ascending.
class QuadraticSpectrum {
 public:
  /// Sorts the values; throws kInvalidArgument if any is not finite and > 0.
  explicit QuadraticSpectrum(std::vector<double> eigenvalues);

  /// Diagonalizes a dense symmetric positive definite Hessian.
  static QuadraticSpectrum from_dense(const Eigen::MatrixXd& Q);

  const std::vector<double>& eigenvalues() const { return eigenvalues_; }
  int d() const { return static_cast<int>(eigenvalues_.size()); }
  double mu() const { return eigenvalues_.front(); }
  double L() const { return eigenvalues_.back(); }
  double kappa() const { return L() / mu(); }

 private:
  std::vector<double> eigenvalues_;
};

struct LyapunovSolution {
  Eigen::MatrixXd X;
  double residual = 0.0;
};

/// Selects the measured output: sqrt(Q/2) x_k for J, x_k itself for J'.
enum class Output { kFunctionValue, kIterates };

SystemMatrices build_system(const AlgorithmSpec& spec, int d);

/// A_Q = A + B diag(lambda) C.
Eigen::MatrixXd closed_loop_matrix(const SystemMatrices& sys,
                                   const QuadraticSpectrum& spectrum);

/// The output matrix Cout for the requested measure.
Eigen::MatrixXd output_matrix(const SystemMatrices& sys,
                              const QuadraticSpectrum& spectrum, Output output);

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
std::vector<double> symmetric_eigenvalues(const Eigen::MatrixXd& M);

double spectral_radius(const Eigen::MatrixXd& M);

/// Solves A X A^T - X + W = 0 for symmetric W.
LyapunovSolution solve_discrete_lyapunov(const Eigen::MatrixXd& A,
                                         const Eigen::MatrixXd& W);

/// Tr(Cout X Cout^T) with A X A^T - X + B B^T = 0.
double h2_norm_squared(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                       const Eigen::MatrixXd& Cout);

/// Tr(B^T Y B) with A^T Y A - Y + Cout^T Cout = 0.
double h2_norm_squared_dual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                            const Eigen::MatrixXd& Cout);

/// H2 norm squared of the closed loop computed one eigenvalue at a time,
/// solving a 1x1 (GD) or 2x2 (AG) Lyapunov equation per eigenvalue.
double h2_structured(const AlgorithmSpec& spec,
                     const QuadraticSpectrum& spectrum, Output output);

/// Stability threshold: a matrix counts as stable when rho <= 1 - kStableTol.
inline constexpr double kStableTol = 1e-12;

}  // namespace gradnoise
