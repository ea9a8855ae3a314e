#pragma once

// Test-only reference implementations, kept independent of the library code
// paths they check.

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace spiked::testsupport {

// Composite Simpson integration, brute force.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      int intervals) {
  if (intervals % 2 != 0) ++intervals;
  const double h = (b - a) / intervals;
  double sum = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) {
    sum += f(a + h * i) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return sum * h / 3.0;
}

// Marchenko-Pastur expectation by a sine substitution
// x = (a+b)/2 + ((b-a)/2) sin(t), which differs from the production cosine
// route, followed by plain Simpson. Standard law; the companion follows by
// the atom/mass relation.
inline double reference_mp_expect(const std::function<double(double)>& f, double gamma,
                                  bool companion, int intervals = 200000) {
  const double s = std::sqrt(gamma);
  const double a = (1.0 - s) * (1.0 - s);
  const double b = (1.0 + s) * (1.0 + s);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  auto integrand = [&](double t) {
    const double sn = std::sin(t);
    const double x = mid + half * sn;
    // sqrt((b-x)(x-a)) = half*cos(t); the ratio cos^2(t)/x has a finite limit
    // 2/half at the lower endpoint when a = 0 (gamma = 1).
    const double ratio = x > 0.0 ? half * half * (1.0 - sn) * (1.0 + sn) / x
                                 : 2.0 * half;
    return f(x) * ratio / (2.0 * M_PI * gamma);
  };
  const double continuous = simpson(integrand, -M_PI / 2.0, M_PI / 2.0, intervals);
  double atom = companion ? std::max(0.0, 1.0 - gamma) : std::max(0.0, 1.0 - 1.0 / gamma);
  const double scale = companion ? gamma : 1.0;
  return atom * (atom > 0.0 ? f(0.0) : 0.0) + scale * continuous;
}

// Quadratic-time KS distance, the obvious definition.
inline double brute_force_ks(std::span<const double> sorted,
                             const std::function<double(double)>& cdf) {
  const double n = static_cast<double>(sorted.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    double below = 0.0, at_or_below = 0.0;
    for (std::size_t j = 0; j < sorted.size(); ++j) {
      if (sorted[j] < sorted[i]) ++below;
      if (sorted[j] <= sorted[i]) ++at_or_below;
    }
    const double f = cdf(sorted[i]);
    sup = std::max({sup, std::abs(at_or_below / n - f), std::abs(below / n - f)});
  }
  return sup;
}

// Polynomial c_k with d^k/dx^k Phi(x) = c_k(x) phi(x), built by repeated
// symbolic differentiation: c_1 = 1 and c_{k+1} = c_k' - x c_k. Coefficients
// are in ascending powers.
inline std::vector<double> phi_derivative_polynomial(int k) {
  std::vector<double> c{1.0};  // c_1
  for (int level = 1; level < k; ++level) {
    std::vector<double> next(c.size() + 1, 0.0);
    for (std::size_t j = 1; j < c.size(); ++j) next[j - 1] += c[j] * static_cast<double>(j);
    for (std::size_t j = 0; j < c.size(); ++j) next[j + 1] -= c[j];
    c = std::move(next);
  }
  return c;
}

inline double eval_poly(std::span<const double> coeffs, double x) {
  double value = 0.0;
  for (std::size_t j = coeffs.size(); j-- > 0;) value = value * x + coeffs[j];
  return value;
}

// Largest eigenvalue of a symmetric 2x2 matrix, closed form.
inline double eig2x2_max(double a, double b, double d) {
  const double tr = a + d;
  const double disc = std::sqrt((a - d) * (a - d) + 4.0 * b * b);
  return 0.5 * (tr + disc);
}

inline double mean_of(std::span<const double> xs) {
  double m = 0.0;
  for (double x : xs) m += x;
  return m / static_cast<double>(xs.size());
}

inline double sd_of(std::span<const double> xs) {
  const double m = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / (static_cast<double>(xs.size()) - 1.0));
}

}  // namespace spiked::testsupport
