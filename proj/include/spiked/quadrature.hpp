#pragma once

#include <functional>
#include <span>
#include <vector>

namespace spiked {

// Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Nodes/weights for the given order, computed once and cached. Thread safe.
const GaussLegendreRule& gauss_legendre(int order);

// Integral of f over [a, b] with a fixed-order rule.
double integrate_gl(const std::function<double(double)>& f, double a, double b, int order);

// Fixed-order Gauss-Legendre with order doubling until the relative change of
// successive estimates drops below rel_tol (an absolute floor handles
// integrals that are exactly zero). Throws NumericError when the doubling
// budget runs out, reporting the tolerance actually reached.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol = 1e-12, int initial_order = 200,
                          int max_doublings = 5);

}  // namespace spiked
