#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <vector>

#include "gradnoise/error.h"
#include "gradnoise/tradeoff.h"

namespace gradnoise {

namespace {

using Complex = std::complex<double>;

constexpr int kAberthMaxIter = 1000;
constexpr double kAberthTol = 1e-12;

// Horner evaluation of a monic polynomial (highest degree first) and its
// derivative.
void horner(const std::vector<double>& a, Complex z, Complex* p, Complex* dp) {
  Complex value = a[0];
  Complex deriv = 0.0;
  for (size_t i = 1; i < a.size(); ++i) {
    deriv = deriv * z + value;
    value = value * z + a[i];
  }
  *p = value;
  *dp = deriv;
}

double horner_error_bound(const std::vector<double>& a, double r) {
  double bound = std::abs(a[0]);
  for (size_t i = 1; i < a.size(); ++i) bound = bound * r + std::abs(a[i]);
  return 4.0 * a.size() * std::numeric_limits<double>::epsilon() * bound;
}

}  // namespace

std::vector<Complex> poly_roots(const std::vector<double>& coefficients) {
  if (coefficients.size() < 2) {
    fail(ErrorCode::kDegreeZero, "polynomial must have degree at least one");
  }
  for (double c : coefficients) {
    if (!std::isfinite(c)) fail(ErrorCode::kNonFinite, "non-finite coefficient");
  }
  if (!(std::abs(coefficients[0]) > 1e-300)) {
    fail(ErrorCode::kDegreeZero, "leading coefficient is zero");
  }
  std::vector<double> a(coefficients.size());
  for (size_t i = 0; i < a.size(); ++i) a[i] = coefficients[i] / coefficients[0];

  // Exact zero roots are split off before iterating.
  std::vector<Complex> roots;
  while (a.size() > 1 && a.back() == 0.0) {
    roots.emplace_back(0.0, 0.0);
    a.pop_back();
  }
  const int n = static_cast<int>(a.size()) - 1;
  if (n == 0) return roots;

  double radius = 0.0;
  for (int k = 1; k <= n; ++k) {
    radius = std::max(radius, std::pow(std::abs(a[k]), 1.0 / k));
  }
  radius = std::max(radius, 1e-3);

  std::mt19937_64 rng(0x5eedULL + n);
  std::uniform_real_distribution<double> jitter(-0.1, 0.1);
  std::vector<Complex> z(n);
  const double offset = 0.4 + jitter(rng);
  for (int k = 0; k < n; ++k) {
    const double angle = 2.0 * M_PI * k / n + offset;
    z[k] = std::polar(radius * (1.0 + jitter(rng)), angle);
  }

  std::vector<bool> settled(n, false);
  for (int iter = 0; iter < kAberthMaxIter; ++iter) {
    bool converged = true;
    for (int k = 0; k < n; ++k) {
      if (settled[k]) continue;
      Complex p, dp;
      horner(a, z[k], &p, &dp);
      // Stop refining once |p| is within Horner's rounding error bound.
      if (std::abs(p) <= horner_error_bound(a, std::abs(z[k]))) {
        settled[k] = true;
        continue;
      }
      if (dp == 0.0) {
        z[k] += Complex(1e-8 * radius, 1e-8 * radius);
        converged = false;
        continue;
      }
      const Complex ratio = p / dp;
      Complex repulsion = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j != k) repulsion += 1.0 / (z[k] - z[j]);
      }
      const Complex step = ratio / (1.0 - ratio * repulsion);
      z[k] -= step;
      if (std::abs(step) > kAberthTol * std::max(1.0, std::abs(z[k]))) {
        converged = false;
      }
    }
    if (converged) {
      roots.insert(roots.end(), z.begin(), z.end());
      return roots;
    }
  }
  fail(ErrorCode::kNoConvergence, "Aberth iteration reached its cap");
}

}  // namespace gradnoise
