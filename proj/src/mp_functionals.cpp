#include "spiked/mp_functionals.hpp"

#include <cmath>
#include <string>

#include "spiked/errors.hpp"
#include "spiked/quadrature.hpp"

namespace spiked::mp {

namespace {

void require_gamma(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw DomainError("gamma must be positive and finite, got " + std::to_string(gamma));
  }
}

// Supercriticality guard shared by all ell-dependent closed forms. gamma = 0
// is allowed: the formulas have a well-defined classical limit there.
void require_supercritical(double ell, double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw DomainError("gamma must be non-negative and finite, got " + std::to_string(gamma));
  }
  const double threshold = 1.0 + std::sqrt(gamma);
  if (!(ell > threshold)) {
    throw DomainError("supercritical spike required: ell > 1 + sqrt(gamma) = " +
                      std::to_string(threshold) + ", got ell = " + std::to_string(ell));
  }
}

// Continuous part of the standard MP law. The cosine substitution
// x(theta) = 1 + gamma + 2 sqrt(gamma) cos(theta) absorbs the square-root
// edge factors of the density sqrt((b-x)(x-a)) / (2 pi gamma x), leaving
//   Integral f dF_cont = (1/pi) Integral_{-pi}^{pi} f(x(t)) sin^2(t) / x(t) dt.
// The half-angle forms
//   x(theta)     = (1-s)^2 + 4 s cos^2(theta/2),   s = sqrt(gamma)
//   sin^2(theta) = 4 sin^2(theta/2) cos^2(theta/2)
// keep x(theta) cancellation-free even at gamma = 1 where the lower edge
// touches zero.
double continuous_standard(const std::function<double(double)>& f, double gamma) {
  const double s = std::sqrt(gamma);
  const double edge = (1.0 - s) * (1.0 - s);
  auto integrand = [&](double theta) {
    const double c = std::cos(0.5 * theta);
    const double sn = std::sin(0.5 * theta);
    const double c2 = c * c;
    const double x = edge + 4.0 * s * c2;
    return f(x) * (4.0 * sn * sn * c2) / x;
  };
  return integrate_adaptive(integrand, -M_PI, M_PI, 1e-12) / M_PI;
}

}  // namespace

double critical_ell(double gamma) {
  require_gamma(gamma);
  return 1.0 + std::sqrt(gamma);
}

SupportInterval support_edges(double gamma) {
  require_gamma(gamma);
  const double s = std::sqrt(gamma);
  return {(1.0 - s) * (1.0 - s), (1.0 + s) * (1.0 + s)};
}

CompanionLaw companion_law(double gamma) {
  require_gamma(gamma);
  const double atom = gamma < 1.0 ? 1.0 - gamma : 0.0;
  return {gamma, atom, 1.0 - atom};
}

double companion_stieltjes(double gamma, double z) {
  require_gamma(gamma);
  const double b = support_edges(gamma).b;
  if (!(z > b)) {
    throw DomainError("companion_stieltjes: z must exceed the bulk edge b = " +
                      std::to_string(b) + ", got z = " + std::to_string(z));
  }
  const double w = z - gamma - 1.0;
  return (-z + gamma - 1.0 + std::sqrt(w * w - 4.0 * gamma)) / (2.0 * z);
}

double f_g(double ell, double gamma) {
  require_supercritical(ell, gamma);
  return 1.0 / ell;
}

double f_g2(double ell, double gamma) {
  require_supercritical(ell, gamma);
  const double h = ell - 1.0;
  const double q = 1.0 - 1.0 / ell;
  return q * q / (h * h - gamma);
}

double f_g3(double ell, double gamma) {
  require_supercritical(ell, gamma);
  const double h = ell - 1.0;
  const double q = 1.0 - 1.0 / ell;
  const double d = h * h - gamma;
  return q * q * q * (h * h * h + gamma) / (d * d * d);
}

double mu_g(double ell, double gamma) {
  require_supercritical(ell, gamma);
  const double h = ell - 1.0;
  const double d = h * h - gamma;
  return gamma * h / (d * d);
}

double eta(double ell, double gamma) {
  require_supercritical(ell, gamma);
  const double h = ell - 1.0;
  const double r = h - std::sqrt(gamma);
  return r * r / h;
}

double mp_expect(const std::function<double(double)>& f, double gamma, Law law) {
  require_gamma(gamma);
  double atom_weight = 0.0;
  if (law == Law::companion) {
    atom_weight = gamma < 1.0 ? 1.0 - gamma : 0.0;
  } else {
    atom_weight = gamma > 1.0 ? 1.0 - 1.0 / gamma : 0.0;
  }

  double atom_part = 0.0;
  if (atom_weight > 0.0) {
    const double f0 = f(0.0);
    if (!std::isfinite(f0)) {
      throw DomainError("mp_expect: f undefined at the atom lambda = 0 (atom mass " +
                        std::to_string(atom_weight) + ")");
    }
    atom_part = atom_weight * f0;
  }

  const double cont = continuous_standard(f, gamma);
  // companion continuous part carries mass gamma * (standard continuous mass)
  const double scale = law == Law::companion ? gamma : 1.0;
  return atom_part + scale * cont;
}

double bs_mean(const std::function<double(double)>& f, double gamma) {
  require_gamma(gamma);
  const double s = std::sqrt(gamma);
  const auto edges = support_edges(gamma);
  const double fa = f(edges.a);
  const double fb = f(edges.b);
  if (!std::isfinite(fa) || !std::isfinite(fb)) {
    throw DomainError("bs_mean: f must be finite at the bulk edges");
  }
  const double lower_edge = edges.a;
  auto integrand = [&](double theta) {
    const double c = std::cos(0.5 * theta);
    return f(lower_edge + 4.0 * s * c * c);
  };
  const double integral = integrate_adaptive(integrand, -M_PI, M_PI, 1e-12);
  return 0.25 * (fa + fb) - integral / (4.0 * M_PI);
}

}  // namespace spiked::mp
