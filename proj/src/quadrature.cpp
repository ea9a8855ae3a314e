#include "spiked/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <string>

#include "spiked/errors.hpp"

namespace spiked {

namespace {

// Legendre P_n(x) and its derivative via the three-term recurrence.
std::pair<double, double> legendre_pair(int n, double x) {
  double p0 = 1.0;
  double p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  const double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

GaussLegendreRule build_rule(int order) {
  GaussLegendreRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi initial guess, then Newton.
    double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
    double p = 0.0, dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      std::tie(p, dp) = legendre_pair(order, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    std::tie(p, dp) = legendre_pair(order, x);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.weights[i] = w;
    rule.nodes[order - 1 - i] = x;
    rule.weights[order - 1 - i] = w;
  }
  return rule;
}

}  // namespace

const GaussLegendreRule& gauss_legendre(int order) {
  if (order < 1) throw DomainError("gauss_legendre: order must be positive");
  static std::mutex mtx;
  static std::map<int, GaussLegendreRule> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, build_rule(order)).first;
  return it->second;
}

double integrate_gl(const std::function<double(double)>& f, double a, double b, int order) {
  const auto& rule = gauss_legendre(order);
  const double mid = 0.5 * (a + b);
  const double hw = 0.5 * (b - a);
  double sum = 0.0;
  for (int i = 0; i < order; ++i) {
    sum += rule.weights[i] * f(mid + hw * rule.nodes[i]);
  }
  return hw * sum;
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, int initial_order, int max_doublings) {
  int order = initial_order;
  double prev = integrate_gl(f, a, b, order);
  double change = std::abs(prev);
  for (int k = 0; k < max_doublings; ++k) {
    order *= 2;
    const double cur = integrate_gl(f, a, b, order);
    change = std::abs(cur - prev);
    // Absolute floor so that integrals converging to zero terminate.
    if (change <= rel_tol * std::abs(cur) + 1e-300 ||
        change <= 1e-15 * (1.0 + std::abs(cur))) {
      return cur;
    }
    prev = cur;
  }
  throw NumericError("integrate_adaptive: not converged, last change " +
                     std::to_string(change) + " at order " + std::to_string(order));
}

}  // namespace spiked
