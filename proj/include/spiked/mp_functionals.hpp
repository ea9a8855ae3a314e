#pragma once

#include <functional>

namespace spiked::mp {

// Bulk support [a, b] of the Marchenko-Pastur law with aspect ratio gamma.
struct SupportInterval {
  double a;
  double b;
};

// The n-side spectral law of the white Wishart Gram matrix: an atom at zero of
// mass max(0, 1-gamma) plus gamma times the MP law. The p-side ("standard")
// law instead carries an atom of mass max(0, 1-1/gamma) when gamma > 1.
struct CompanionLaw {
  double gamma;
  double atom_weight;
  double continuous_weight;
};

enum class Law { standard, companion };

// Phase-transition threshold 1 + sqrt(gamma).
double critical_ell(double gamma);

SupportInterval support_edges(double gamma);

CompanionLaw companion_law(double gamma);

// Companion-law expectation of f_z(lambda) = (lambda - z)^{-1} for z strictly
// above the bulk edge, on the principal branch of the square root. Negative
// for all admissible z.
double companion_stieltjes(double gamma, double z);

// Closed forms of the companion-law moments of g(lambda) = (rho - lambda)^{-1}
// evaluated at the centering rho(ell, gamma). All require the supercritical
// regime ell > 1 + sqrt(gamma); gamma = 0 is accepted as the classical
// fixed-dimension limit of the formulas.
double f_g(double ell, double gamma);    // = 1/ell
double f_g2(double ell, double gamma);   // = (1-1/ell)^2 / ((ell-1)^2 - gamma)
double f_g3(double ell, double gamma);   // = (1-1/ell)^3 ((ell-1)^3+gamma) ((ell-1)^2-gamma)^{-3}
double mu_g(double ell, double gamma);   // = gamma (ell-1) ((ell-1)^2 - gamma)^{-2}

// Gap between the centering rho(ell,gamma) and the bulk edge b(gamma):
// (ell-1)^{-1} (ell-1-sqrt(gamma))^2 > 0.
double eta(double ell, double gamma);

// Expectation of f against the chosen spectral law, atoms added analytically
// and the continuous part integrated after the cosine substitution
// x = 1 + gamma + 2 sqrt(gamma) cos(theta), which removes the square-root
// edge singularities. Relative tolerance 1e-10.
double mp_expect(const std::function<double(double)>& f, double gamma, Law law);

// Asymptotic mean functional of the centered linear spectral statistic:
//   (f(a)+f(b))/4 - (1/(4 pi)) Integral_{-pi}^{pi} f(1+gamma+2 sqrt(gamma) cos t) dt.
double bs_mean(const std::function<double(double)>& f, double gamma);

}  // namespace spiked::mp
