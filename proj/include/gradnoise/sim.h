#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "gradnoise/linsys.h"

namespace gradnoise {

/// Isotropic Gaussian gradient noise with covariance sigma^2 I.
struct NoiseModel {
  double sigma = 0.0;
};

/// Standard normal draw keyed by (seed, replica, k, coordinate). Equal keys
/// give equal values regardless of evaluation order.
double counter_normal(std::uint64_t seed, std::uint64_t replica, std::uint64_t k,
                      std::uint64_t coord);

enum class ObjectiveKind { kQuadratic, kLogisticL2 };

class Objective {
 public:
  /// f(x) = fstar + 0.5 sum_i lambda_i (x_i - xstar_i)^2 in its eigenbasis.
  static Objective quadratic(std::vector<double> eigenvalues, Eigen::VectorXd xstar,
                             double fstar = 0.0);

  /// f(x) = (1/n) sum_i log(1 + exp(-y_i m_i^T x)) + delta |x|^2. The minimizer
  /// is computed by noiseless AG to gradient norm 1e-10.
  static Objective logistic(Eigen::MatrixXd M, Eigen::VectorXd y, double delta);

  ObjectiveKind kind() const { return kind_; }
  int dim() const { return static_cast<int>(xstar_.size()); }
  double value(const Eigen::VectorXd& x) const;
  void gradient(const Eigen::VectorXd& x, Eigen::VectorXd* g) const;
  const Eigen::VectorXd& xstar() const { return xstar_; }
  double fstar() const { return fstar_; }
  double mu() const { return mu_; }
  double L() const { return L_; }
  /// Quadratic only: Hessian eigenvalues in basis order.
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }

 private:
  Objective() = default;

  ObjectiveKind kind_ = ObjectiveKind::kQuadratic;
  std::vector<double> eigenvalues_;
  Eigen::MatrixXd M_;
  Eigen::VectorXd y_;
  double delta_ = 0.0;
  Eigen::VectorXd xstar_;
  double fstar_ = 0.0;
  double mu_ = 0.0;
  double L_ = 0.0;
};

/// Cyclic-graph Laplacian plus 2 delta I with a seeded random linear term,
/// represented in the Fourier basis: lambda_j = 2 - 2 cos(2 pi j / d) + 2 delta.
Objective make_laplacian_objective(int d, double delta, std::uint64_t seed);

/// Synthetic classification data: standard normal M (n x d), labels
/// sign(M w) for a standard normal w, and delta chosen so L / mu = kappa.
Objective make_logistic_objective(int n, int d, double kappa, std::uint64_t seed);

/// Random quadratic with the given spectrum and a seeded standard normal x*.
Objective make_quadratic_objective(const QuadraticSpectrum& spectrum,
                                   std::uint64_t seed);

struct TrajectoryPoint {
  double subopt = 0.0;
  double dist2 = 0.0;
};

/// Iterates k = 0..k_max of the method with x_{-1} = x_0 and gradient noise
/// drawn from counter_normal(seed, replica, k, i).
std::vector<TrajectoryPoint> run_noisy(const AlgorithmSpec& spec,
                                       const Objective& objective,
                                       const Eigen::VectorXd& x0,
                                       const NoiseModel& noise, int k_max,
                                       std::uint64_t seed,
                                       std::uint64_t replica = 0);

struct EstimatorConfig {
  int replicas = 100;
  int k_max = 1000;
  /// Defaults to ceil(log(1e-6) / (2 log rho)) when the rate is known and
  /// k_max / 2 otherwise.
  std::optional<int> burn_in;
  std::uint64_t seed = 0;
};

struct Estimate {
  double value = 0.0;
  /// Standard error of the replica means; NaN with a single replica.
  double stderr_value = 0.0;
  int burn_in = 0;
};

/// Mean of (f(x_k) - f*) / sigma^2 over replicas and k in [burn_in, k_max],
/// starting every replica at x*.
Estimate estimate_J(const AlgorithmSpec& spec, const Objective& objective,
                    const NoiseModel& noise, const EstimatorConfig& config);

/// As estimate_J for |x_k - x*|^2 / sigma^2.
Estimate estimate_Jprime(const AlgorithmSpec& spec, const Objective& objective,
                         const NoiseModel& noise, const EstimatorConfig& config);

/// Both estimates from the same runs.
std::pair<Estimate, Estimate> estimate_J_and_Jprime(const AlgorithmSpec& spec,
                                                    const Objective& objective,
                                                    const NoiseModel& noise,
                                                    const EstimatorConfig& config);

/// Sum over coordinates i and k >= 0 of |x_k - x*|^2 for the noiseless
/// response started at x_0 = x* - alpha e_i, x_{-1} = x*.
double impulse_J_star(const AlgorithmSpec& spec, const Objective& objective);

/// Asymptotic rate of the method on quadratics with the objective's mu and L.
double method_rate(const AlgorithmSpec& spec, double mu, double L);

}  // namespace gradnoise
