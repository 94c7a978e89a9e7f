#include "gradnoise/sim.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gradnoise/error.h"
#include "gradnoise/quad.h"

namespace gradnoise {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_key(std::uint64_t seed, std::uint64_t replica, std::uint64_t k,
                       std::uint64_t slot) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ replica);
  h = splitmix64(h ^ k);
  return splitmix64(h ^ slot);
}

double unit_open(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Noise streams and data generators use disjoint replica keys.
constexpr std::uint64_t kLaplacianKey = 0xA11CE0000001ULL;
constexpr std::uint64_t kLogisticDataKey = 0xA11CE0000002ULL;
constexpr std::uint64_t kLogisticTruthKey = 0xA11CE0000003ULL;
constexpr std::uint64_t kQuadraticKey = 0xA11CE0000004ULL;

constexpr int kMaxSteps = 1000000;

void check_finite(const VectorXd& x, int k) {
  if (!x.allFinite()) {
    std::ostringstream os;
    os << "iterate became non-finite at k = " << k;
    fail(ErrorCode::kNonFinite, os.str());
  }
}

// One step of GD or AG from (x, x_prev); w is the already-scaled noise.
void method_step(const AlgorithmSpec& spec, const Objective& f, VectorXd* x,
                 VectorXd* x_prev, const VectorXd* w, VectorXd* y, VectorXd* g) {
  if (spec.method == Method::kGD) {
    *y = *x;
  } else {
    *y = (1.0 + spec.beta) * (*x) - spec.beta * (*x_prev);
  }
  f.gradient(*y, g);
  if (w != nullptr) *g += *w;
  *x_prev = *x;
  *x = *y - spec.alpha * (*g);
}

double logistic_value(const MatrixXd& M, const VectorXd& y, double delta,
                      const VectorXd& x) {
  const VectorXd margins = (M * x).cwiseProduct(y);
  double sum = 0.0;
  for (int i = 0; i < margins.size(); ++i) {
    const double t = -margins(i);
    sum += t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
  }
  return sum / M.rows() + delta * x.squaredNorm();
}

void logistic_gradient(const MatrixXd& M, const VectorXd& y, double delta,
                       const VectorXd& x, VectorXd* g) {
  const VectorXd margins = (M * x).cwiseProduct(y);
  VectorXd coef(margins.size());
  for (int i = 0; i < margins.size(); ++i) {
    // -y_i sigmoid(-margin_i) / n
    const double m = margins(i);
    const double s = m >= 0.0 ? std::exp(-m) / (1.0 + std::exp(-m))
                              : 1.0 / (1.0 + std::exp(m));
    coef(i) = -y(i) * s / M.rows();
  }
  *g = M.transpose() * coef + 2.0 * delta * x;
}

Estimate summarize(const std::vector<double>& means, int burn_in) {
  Estimate e;
  e.burn_in = burn_in;
  const int r = static_cast<int>(means.size());
  double sum = 0.0;
  for (double m : means) sum += m;
  e.value = sum / r;
  if (r < 2) {
    e.stderr_value = std::numeric_limits<double>::quiet_NaN();
    return e;
  }
  double ss = 0.0;
  for (double m : means) ss += (m - e.value) * (m - e.value);
  e.stderr_value = std::sqrt(ss / (r - 1) / r);
  return e;
}

}  // namespace

double counter_normal(std::uint64_t seed, std::uint64_t replica, std::uint64_t k,
                      std::uint64_t coord) {
  const std::uint64_t pair = coord / 2;
  const double u1 = unit_open(hash_key(seed, replica, k, 2 * pair));
  const double u2 = unit_open(hash_key(seed, replica, k, 2 * pair + 1));
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  return coord % 2 == 0 ? r * std::cos(theta) : r * std::sin(theta);
}

Objective Objective::quadratic(std::vector<double> eigenvalues, VectorXd xstar,
                               double fstar) {
  if (eigenvalues.empty() || static_cast<int>(eigenvalues.size()) != xstar.size()) {
    fail(ErrorCode::kInvalidArgument, "eigenvalues and x* must have equal size");
  }
  for (double v : eigenvalues) {
    if (!std::isfinite(v) || v < 0.0) {
      fail(ErrorCode::kInvalidArgument, "eigenvalues must be finite and nonnegative");
    }
  }
  Objective f;
  f.kind_ = ObjectiveKind::kQuadratic;
  f.mu_ = *std::min_element(eigenvalues.begin(), eigenvalues.end());
  f.L_ = *std::max_element(eigenvalues.begin(), eigenvalues.end());
  f.eigenvalues_ = std::move(eigenvalues);
  f.xstar_ = std::move(xstar);
  f.fstar_ = fstar;
  return f;
}

Objective Objective::logistic(MatrixXd M, VectorXd y, double delta) {
  if (M.rows() == 0 || M.cols() == 0 || y.size() != M.rows()) {
    fail(ErrorCode::kInvalidArgument, "data and labels have mismatched sizes");
  }
  if (!(delta > 0.0)) fail(ErrorCode::kInvalidArgument, "delta must be positive");
  Objective f;
  f.kind_ = ObjectiveKind::kLogisticL2;
  f.delta_ = delta;
  double smax2 = 0.0;
  for (double v : symmetric_eigenvalues(M.transpose() * M)) smax2 = std::max(smax2, v);
  f.mu_ = 2.0 * delta;
  f.L_ = 2.0 * delta + smax2 / (4.0 * M.rows());
  f.M_ = std::move(M);
  f.y_ = std::move(y);

  const double kappa = f.L_ / f.mu_;
  const AlgorithmSpec spec =
      AlgorithmSpec::ag(1.0 / f.L_, (std::sqrt(kappa) - 1.0) / (std::sqrt(kappa) + 1.0));
  VectorXd x = VectorXd::Zero(f.M_.cols());
  VectorXd x_prev = x, ybuf, g;
  f.xstar_ = x;
  for (int k = 0;; ++k) {
    if (k % 10 == 0) {
      logistic_gradient(f.M_, f.y_, delta, x, &g);
      if (g.norm() <= 1e-10) break;
    }
    if (k == kMaxSteps) {
      fail(ErrorCode::kNoConvergence, "logistic minimizer did not converge");
    }
    method_step(spec, f, &x, &x_prev, nullptr, &ybuf, &g);
    check_finite(x, k);
  }
  // Newton polish so impulse responses converge to x* to machine precision.
  for (int it = 0; it < 3; ++it) {
    logistic_gradient(f.M_, f.y_, delta, x, &g);
    const VectorXd margins = (f.M_ * x).cwiseProduct(f.y_);
    VectorXd curv(margins.size());
    for (int i = 0; i < margins.size(); ++i) {
      const double s = 1.0 / (1.0 + std::exp(-std::abs(margins(i))));
      curv(i) = s * (1.0 - s) / f.M_.rows();
    }
    MatrixXd H = f.M_.transpose() * curv.asDiagonal() * f.M_;
    H.diagonal().array() += 2.0 * delta;
    const VectorXd candidate = x - H.llt().solve(g);
    VectorXd g_new;
    logistic_gradient(f.M_, f.y_, delta, candidate, &g_new);
    if (!(g_new.norm() < g.norm())) break;
    x = candidate;
  }
  f.xstar_ = x;
  f.fstar_ = logistic_value(f.M_, f.y_, delta, x);
  return f;
}

double Objective::value(const VectorXd& x) const {
  if (kind_ == ObjectiveKind::kLogisticL2) return logistic_value(M_, y_, delta_, x);
  double sum = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    const double e = x(i) - xstar_(i);
    sum += eigenvalues_[i] * e * e;
  }
  return fstar_ + 0.5 * sum;
}

void Objective::gradient(const VectorXd& x, VectorXd* g) const {
  if (kind_ == ObjectiveKind::kLogisticL2) {
    logistic_gradient(M_, y_, delta_, x, g);
    return;
  }
  g->resize(x.size());
  for (int i = 0; i < x.size(); ++i) (*g)(i) = eigenvalues_[i] * (x(i) - xstar_(i));
}

Objective make_laplacian_objective(int d, double delta, std::uint64_t seed) {
  if (d < 2) fail(ErrorCode::kInvalidArgument, "d must be at least 2");
  if (!(delta >= 0.0)) fail(ErrorCode::kInvalidArgument, "delta must be nonnegative");
  std::vector<double> eig(d);
  VectorXd xstar(d);
  double fstar = 0.0;
  for (int j = 0; j < d; ++j) {
    eig[j] = 2.0 - 2.0 * std::cos(2.0 * M_PI * j / d) + 2.0 * delta;
    if (eig[j] < 1e-14) eig[j] = 0.0;
    // Isotropic Gaussian b has the same law in any orthonormal basis.
    const double b = eig[j] > 0.0 ? counter_normal(seed, kLaplacianKey, 0, j) : 0.0;
    xstar(j) = eig[j] > 0.0 ? -b / eig[j] : 0.0;
    fstar += eig[j] > 0.0 ? -0.5 * b * b / eig[j] : 0.0;
  }
  return Objective::quadratic(std::move(eig), std::move(xstar), fstar);
}

Objective make_logistic_objective(int n, int d, double kappa, std::uint64_t seed) {
  if (n < 1 || d < 1) fail(ErrorCode::kInvalidArgument, "n and d must be positive");
  if (!(kappa > 1.0)) fail(ErrorCode::kInvalidArgument, "kappa must exceed one");
  MatrixXd M(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) {
      M(i, j) = counter_normal(seed, kLogisticDataKey, i, j);
    }
  }
  VectorXd w(d);
  for (int j = 0; j < d; ++j) w(j) = counter_normal(seed, kLogisticTruthKey, 0, j);
  const VectorXd s = M * w;
  VectorXd y(n);
  for (int i = 0; i < n; ++i) y(i) = s(i) >= 0.0 ? 1.0 : -1.0;
  double smax2 = 0.0;
  for (double v : symmetric_eigenvalues(M.transpose() * M)) smax2 = std::max(smax2, v);
  const double data_L = smax2 / (4.0 * n);
  const double delta = data_L / (kappa - 1.0) / 2.0;
  return Objective::logistic(std::move(M), std::move(y), delta);
}

Objective make_quadratic_objective(const QuadraticSpectrum& spectrum,
                                   std::uint64_t seed) {
  VectorXd xstar(spectrum.d());
  for (int i = 0; i < spectrum.d(); ++i) {
    xstar(i) = counter_normal(seed, kQuadraticKey, 0, i);
  }
  return Objective::quadratic(spectrum.eigenvalues(), std::move(xstar), 0.0);
}

double method_rate(const AlgorithmSpec& spec, double mu, double L) {
  return spec.method == Method::kGD ? gd_rate(spec.alpha, mu, L)
                                    : ag_rate(spec.alpha, spec.beta, mu, L);
}

std::vector<TrajectoryPoint> run_noisy(const AlgorithmSpec& spec,
                                       const Objective& objective,
                                       const VectorXd& x0, const NoiseModel& noise,
                                       int k_max, std::uint64_t seed,
                                       std::uint64_t replica) {
  spec.validate();
  if (x0.size() != objective.dim()) {
    fail(ErrorCode::kInvalidArgument, "x0 has the wrong dimension");
  }
  if (k_max < 0) fail(ErrorCode::kInvalidArgument, "k_max must be nonnegative");
  if (!(noise.sigma >= 0.0)) fail(ErrorCode::kInvalidArgument, "sigma must be nonnegative");
  const int d = objective.dim();
  VectorXd x = x0, x_prev = x0, y, g, w(d);
  std::vector<TrajectoryPoint> traj;
  traj.reserve(k_max + 1);
  for (int k = 0;; ++k) {
    traj.push_back({objective.value(x) - objective.fstar(),
                    (x - objective.xstar()).squaredNorm()});
    if (k == k_max) break;
    for (int i = 0; i < d; ++i) w(i) = noise.sigma * counter_normal(seed, replica, k, i);
    method_step(spec, objective, &x, &x_prev, &w, &y, &g);
    check_finite(x, k + 1);
  }
  return traj;
}

std::pair<Estimate, Estimate> estimate_J_and_Jprime(const AlgorithmSpec& spec,
                                                    const Objective& objective,
                                                    const NoiseModel& noise,
                                                    const EstimatorConfig& config) {
  spec.validate();
  if (!(noise.sigma > 0.0)) fail(ErrorCode::kInvalidArgument, "sigma must be positive");
  if (config.replicas < 1 || config.k_max < 1) {
    fail(ErrorCode::kInvalidArgument, "replicas and k_max must be positive");
  }
  int burn_in = config.k_max / 2;
  if (config.burn_in) {
    burn_in = *config.burn_in;
  } else {
    const double rho = method_rate(spec, objective.mu(), objective.L());
    if (rho > 0.0 && rho < 1.0) {
      burn_in = static_cast<int>(std::ceil(std::log(1e-6) / (2.0 * std::log(rho))));
    } else if (rho == 0.0) {
      burn_in = 1;
    }
  }
  if (burn_in < 0 || burn_in >= config.k_max) {
    fail(ErrorCode::kInvalidArgument, "burn-in must lie in [0, k_max)");
  }
  const double s2 = noise.sigma * noise.sigma;
  const int count = config.k_max - burn_in + 1;
  std::vector<double> jm(config.replicas), jpm(config.replicas);
  for (int r = 0; r < config.replicas; ++r) {
    const auto traj = run_noisy(spec, objective, objective.xstar(), noise, config.k_max,
                                config.seed, static_cast<std::uint64_t>(r));
    double a = 0.0, b = 0.0;
    for (int k = burn_in; k <= config.k_max; ++k) {
      a += traj[k].subopt;
      b += traj[k].dist2;
    }
    jm[r] = a / count / s2;
    jpm[r] = b / count / s2;
  }
  return {summarize(jm, burn_in), summarize(jpm, burn_in)};
}

Estimate estimate_J(const AlgorithmSpec& spec, const Objective& objective,
                    const NoiseModel& noise, const EstimatorConfig& config) {
  return estimate_J_and_Jprime(spec, objective, noise, config).first;
}

Estimate estimate_Jprime(const AlgorithmSpec& spec, const Objective& objective,
                         const NoiseModel& noise, const EstimatorConfig& config) {
  return estimate_J_and_Jprime(spec, objective, noise, config).second;
}

double impulse_J_star(const AlgorithmSpec& spec, const Objective& objective) {
  spec.validate();
  const double rho = method_rate(spec, objective.mu(), objective.L());
  if (!(rho < 1.0 - kStableTol)) {
    fail(ErrorCode::kNotStable, "method does not converge on this objective");
  }
  const double tail_factor = 1.0 / (1.0 - rho * rho);
  const int window = std::max(10, static_cast<int>(std::ceil(1.0 / (1.0 - rho))));
  const int d = objective.dim();
  const VectorXd& xs = objective.xstar();
  double total = 0.0;
  VectorXd x, x_prev, y, g;
  for (int i = 0; i < d; ++i) {
    x = xs;
    x(i) -= spec.alpha;
    x_prev = xs;
    double sum = 0.0;
    int quiet = 0;
    for (int k = 0;; ++k) {
      const double e = (x - xs).squaredNorm();
      sum += e;
      quiet = e * tail_factor < 1e-13 * sum ? quiet + 1 : 0;
      if (quiet >= window || sum == 0.0) break;
      if (k == kMaxSteps) {
        fail(ErrorCode::kNoConvergence, "impulse response did not decay");
      }
      method_step(spec, objective, &x, &x_prev, nullptr, &y, &g);
      check_finite(x, k + 1);
    }
    total += sum;
  }
  return total;
}

}  // namespace gradnoise
