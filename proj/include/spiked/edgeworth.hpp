#pragma once

#include <cstdint>
#include <span>

namespace spiked::edgeworth {

// Which aspect ratio enters the correction polynomial: the limiting value
// gamma or the finite-sample gamma_n = p/n. Finite-sample is the default; it
// avoids an O(n^{-1/2}) drift of the centering when gamma_n - gamma is not
// o(n^{-1/2}).
enum class GammaMode { limit_gamma, finite_gamma_n };

struct SpikeParams {
  double ell = 0.0;       // spike strength, > 1 + sqrt(gamma_n)
  double gamma_n = 0.0;   // finite-sample aspect ratio p/n, > 0
  std::int64_t n = 0;     // sample count
  std::int64_t p = 0;     // noise dimension
  double gamma_limit = 0.0;  // limiting ratio for GammaMode::limit_gamma; >= 0

  // gamma_n := p/n exactly.
  static SpikeParams from_dims(double ell, std::int64_t n, std::int64_t p);
  // Keeps gamma_n as given; p is recorded as round(gamma_n * n) for metadata.
  static SpikeParams from_gamma(double ell, double gamma_n, std::int64_t n);
  // Same params with a different limiting gamma (gamma_limit = 0 gives the
  // classical fixed-dimension polynomial).
  SpikeParams with_gamma_limit(double gamma) const;

  double gamma(GammaMode mode) const {
    return mode == GammaMode::finite_gamma_n ? gamma_n : gamma_limit;
  }
};

// Precomputed quantities for fast evaluation of the corrected CDF/density.
// Immutable value; safe to share across threads.
struct EdgeworthApprox {
  double rho = 0.0;     // centering
  double sigma = 0.0;   // scaling, > 0
  double kappa2 = 0.0;  // second conditional cumulant, = 4/sigma^2
  double kappa3 = 0.0;  // third conditional cumulant, > 0
  double mu_g = 0.0;    // asymptotic mean of the centered linear statistic
  double alpha2 = 0.0;  // Hermite coefficient, = kappa3 / (6 kappa2^{3/2})
  double alpha0 = 0.0;  // Hermite coefficient, = mu_g / sqrt(kappa2)
  double inv_sqrt_n = 0.0;
  std::int64_t n = 0;
};

struct GoeParams {
  double theta = 0.0;  // perturbation strength, > 1
  std::int64_t p = 0;  // matrix dimension
  static GoeParams make(double theta, std::int64_t p);
};

// Centering rho = ell + gamma ell/(ell-1) and scaling
// sigma = sqrt(2 ell^2 [1 - gamma/(ell-1)^2]).
struct CenteringScaling {
  double rho;
  double sigma;
};
CenteringScaling centering_scaling(double ell, double gamma_n);

// Populates EdgeworthApprox from the closed-form law functionals, evaluated
// at the gamma selected by mode.
EdgeworthApprox cumulants(const SpikeParams& params,
                          GammaMode mode = GammaMode::finite_gamma_n);

// First-order correction polynomial
//   p1(x) = sqrt(2) ( (1/3)[(ell-1)^3+gamma](1-x^2) - (1/2) gamma ell )
//           ((ell-1)^2 - gamma)^{-3/2},
// equal to (1/6) kappa2^{-3/2} kappa3 (1-x^2) - kappa2^{-1/2} mu_g.
double p1(double x, const SpikeParams& params,
          GammaMode mode = GammaMode::finite_gamma_n);

// Probabilists' Hermite polynomial H_k by the recurrence
// H_{k+1} = x H_k - k H_{k-1}.
double hermite(int k, double x);

// Phi(x) + n^{-1/2} p1(x) phi(x). Not clamped to [0,1] by default: the
// corrected measure is a signed one and the tails may exit the unit interval
// slightly. clamp = true restricts the output to [0,1] for consumers that
// need a proper distribution function.
double corrected_cdf(double x, const EdgeworthApprox& approx, bool clamp = false);

// phi(x) (1 + n^{-1/2} (alpha2 H3(x) + alpha0 H1(x))). Derivative of
// corrected_cdf; negative for x far enough into the left tail.
double corrected_density(double x, const EdgeworthApprox& approx);

// Density of the largest eigenvalue itself (change of variables from the
// standardized scale): (sqrt(n)/sigma) f_E(sqrt(n) (y - rho)/sigma).
double rescaled_density(double y, const EdgeworthApprox& approx);

// Same rescaling applied to the plain normal density.
double rescaled_normal_density(double y, const EdgeworthApprox& approx);

// Solves corrected_cdf(x) = u by safeguarded Newton from the Cornish-Fisher
// seed Phi^{-1}(u) - n^{-1/2} p1(Phi^{-1}(u)), with a bisection fallback on
// [-10, 10]. Residual below 1e-12.
double corrected_quantile(double u, const EdgeworthApprox& approx);

// Reliability heuristic (1/n) (h^3+gamma_n)^2 / (h^2-gamma_n)^3 with
// h = ell-1; the correction is usable when this is <= 0.2. Equals
// (9/2) alpha2^2 / n.
double validity_index(const SpikeParams& params);

// Rank-one additive perturbation of a GOE matrix: centering theta + 1/theta,
// scaling sqrt(2 (1 - theta^{-2})), and the analogous correction polynomial
//   p1(x) = sqrt(2) (theta^2-1)^{-3/2} ((1-x^2)/3 - 1/2).
// The returned approximation plugs into the same CDF/density machinery with
// n replaced by p; kappa2/kappa3/mu_g are backfilled consistently with
// (alpha2, alpha0).
EdgeworthApprox goe_correction(const GoeParams& params);
double goe_p1(double x, const GoeParams& params);

// Classical fixed-dimension expansion for sqrt(n)(ell_hat - ell)/(sqrt(2) ell):
//   Phi(x) + n^{-1/2} ( (sqrt(2)/3)(1-x^2) - p/(sqrt(2)(ell-1)) ) phi(x).
double muirhead_fixed_p_cdf(double x, double ell, std::int64_t p, std::int64_t n);

// Term Q_v of the expansion for sums of independent non-identically
// distributed variates, as a function of the average standardized cumulants
// (chi3 for v = 1; chi3, chi4 for v = 2). Includes the phi(x) factor:
//   Q_1(x) = chi3 (1-x^2) phi(x) / 6
//   Q_2(x) = -( chi4 H3(x)/24 + chi3^2 H5(x)/72 ) phi(x).
// Only v in {1, 2} is supported.
double petrov_q(int v, std::span<const double> avg_cumulants, double x);

}  // namespace spiked::edgeworth
