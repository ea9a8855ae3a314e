#include "spiked/edgeworth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spiked/errors.hpp"
#include "spiked/mp_functionals.hpp"
#include "spiked/normal.hpp"

namespace spiked::edgeworth {

namespace {

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

void require_n(std::int64_t n) {
  if (n < 1) throw DomainError("n must be a positive integer, got " + std::to_string(n));
}

}  // namespace

SpikeParams SpikeParams::from_dims(double ell, std::int64_t n, std::int64_t p) {
  require_n(n);
  if (p < 1) throw DomainError("p must be a positive integer, got " + std::to_string(p));
  const double gamma_n = static_cast<double>(p) / static_cast<double>(n);
  require_supercritical(ell, gamma_n);
  return {ell, gamma_n, n, p, gamma_n};
}

SpikeParams SpikeParams::from_gamma(double ell, double gamma_n, std::int64_t n) {
  require_n(n);
  if (!(gamma_n > 0.0) || !std::isfinite(gamma_n)) {
    throw DomainError("gamma_n must be positive and finite, got " + std::to_string(gamma_n));
  }
  require_supercritical(ell, gamma_n);
  const auto p = static_cast<std::int64_t>(std::llround(gamma_n * static_cast<double>(n)));
  return {ell, gamma_n, n, std::max<std::int64_t>(p, 1), gamma_n};
}

SpikeParams SpikeParams::with_gamma_limit(double gamma) const {
  require_supercritical(ell, gamma);
  SpikeParams out = *this;
  out.gamma_limit = gamma;
  return out;
}

GoeParams GoeParams::make(double theta, std::int64_t p) {
  if (!(theta > 1.0)) {
    throw DomainError("GOE perturbation requires theta > 1, got " + std::to_string(theta));
  }
  if (p < 1) throw DomainError("p must be a positive integer, got " + std::to_string(p));
  return {theta, p};
}

CenteringScaling centering_scaling(double ell, double gamma_n) {
  require_supercritical(ell, gamma_n);
  const double h = ell - 1.0;
  const double rho = ell + gamma_n * ell / h;
  const double sigma2 = 2.0 * ell * ell * (1.0 - gamma_n / (h * h));
  return {rho, std::sqrt(sigma2)};
}

EdgeworthApprox cumulants(const SpikeParams& params, GammaMode mode) {
  const double gamma = params.gamma(mode);
  require_supercritical(params.ell, gamma);
  require_n(params.n);

  const auto cs = centering_scaling(params.ell, gamma);
  EdgeworthApprox approx;
  approx.rho = cs.rho;
  approx.sigma = cs.sigma;
  approx.kappa2 = 2.0 * mp::f_g2(params.ell, gamma);
  approx.kappa3 = 8.0 * mp::f_g3(params.ell, gamma);
  approx.mu_g = mp::mu_g(params.ell, gamma);
  approx.alpha2 = approx.kappa3 / (6.0 * approx.kappa2 * std::sqrt(approx.kappa2));
  approx.alpha0 = approx.mu_g / std::sqrt(approx.kappa2);
  approx.n = params.n;
  approx.inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(params.n));
  return approx;
}

double p1(double x, const SpikeParams& params, GammaMode mode) {
  const double gamma = params.gamma(mode);
  require_supercritical(params.ell, gamma);
  const double h = params.ell - 1.0;
  const double d = h * h - gamma;
  return kSqrt2 *
         ((h * h * h + gamma) * (1.0 - x * x) / 3.0 - 0.5 * gamma * params.ell) /
         (d * std::sqrt(d));
}

double hermite(int k, double x) {
  if (k < 0) throw DomainError("hermite: order must be non-negative");
  if (k == 0) return 1.0;
  double hm1 = 1.0;
  double h = x;
  for (int j = 1; j < k; ++j) {
    const double hp1 = x * h - j * hm1;
    hm1 = h;
    h = hp1;
  }
  return h;
}

double corrected_cdf(double x, const EdgeworthApprox& approx, bool clamp) {
  const double q = approx.alpha2 * (1.0 - x * x) - approx.alpha0;  // = p1(x)
  double value = norm_cdf(x) + approx.inv_sqrt_n * q * norm_pdf(x);
  if (clamp) value = std::clamp(value, 0.0, 1.0);
  return value;
}

double corrected_density(double x, const EdgeworthApprox& approx) {
  const double cubic = approx.alpha2 * hermite(3, x) + approx.alpha0 * x;
  return norm_pdf(x) * (1.0 + approx.inv_sqrt_n * cubic);
}

double rescaled_density(double y, const EdgeworthApprox& approx) {
  const double scale = 1.0 / (approx.inv_sqrt_n * approx.sigma);
  return scale * corrected_density(scale * (y - approx.rho), approx);
}

double rescaled_normal_density(double y, const EdgeworthApprox& approx) {
  const double scale = 1.0 / (approx.inv_sqrt_n * approx.sigma);
  return scale * norm_pdf(scale * (y - approx.rho));
}

double corrected_quantile(double u, const EdgeworthApprox& approx) {
  if (!(u > 0.0 && u < 1.0)) {
    throw DomainError("corrected_quantile: u must lie in (0,1), got " + std::to_string(u));
  }
  double lo = -10.0;
  double hi = 10.0;
  double flo = corrected_cdf(lo, approx) - u;
  double fhi = corrected_cdf(hi, approx) - u;
  if (!(flo < 0.0 && fhi > 0.0)) {
    throw NumericError("corrected_quantile: target u = " + std::to_string(u) +
                       " not bracketed on [-10, 10]");
  }

  const double z = norm_quantile(u);
  const double seed = z - approx.inv_sqrt_n * (approx.alpha2 * (1.0 - z * z) - approx.alpha0);
  double x = std::clamp(seed, lo, hi);

  for (int it = 0; it < 200; ++it) {
    const double fx = corrected_cdf(x, approx) - u;
    if (std::abs(fx) < 1e-12) return x;
    if (fx > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    const double deriv = corrected_density(x, approx);
    double next = deriv > 0.0 ? x - fx / deriv : x;
    // Bisect whenever Newton leaves the bracket (non-monotone tail stretches).
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    x = next;
  }
  const double res = corrected_cdf(x, approx) - u;
  if (std::abs(res) < 1e-12) return x;
  throw NumericError("corrected_quantile: residual " + std::to_string(res) +
                     " after 200 iterations");
}

double validity_index(const SpikeParams& params) {
  require_supercritical(params.ell, params.gamma_n);
  require_n(params.n);
  const double h = params.ell - 1.0;
  const double num = h * h * h + params.gamma_n;
  const double den = h * h - params.gamma_n;
  return num * num / (den * den * den) / static_cast<double>(params.n);
}

EdgeworthApprox goe_correction(const GoeParams& params) {
  const double t2 = params.theta * params.theta;
  const double d = t2 - 1.0;
  const double scale = kSqrt2 / (d * std::sqrt(d));

  EdgeworthApprox approx;
  approx.rho = params.theta + 1.0 / params.theta;
  approx.sigma = std::sqrt(2.0 * (1.0 - 1.0 / t2));
  approx.alpha2 = scale / 3.0;
  approx.alpha0 = scale / 2.0;
  // Backfill so the cumulant identities of the approximation hold.
  approx.kappa2 = 4.0 / (approx.sigma * approx.sigma);
  approx.kappa3 = 6.0 * approx.alpha2 * approx.kappa2 * std::sqrt(approx.kappa2);
  approx.mu_g = approx.alpha0 * std::sqrt(approx.kappa2);
  approx.n = params.p;
  approx.inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(params.p));
  return approx;
}

double goe_p1(double x, const GoeParams& params) {
  const double d = params.theta * params.theta - 1.0;
  return kSqrt2 / (d * std::sqrt(d)) * ((1.0 - x * x) / 3.0 - 0.5);
}

double muirhead_fixed_p_cdf(double x, double ell, std::int64_t p, std::int64_t n) {
  if (!(ell > 1.0)) throw DomainError("muirhead_fixed_p_cdf: requires ell > 1");
  if (p < 0) throw DomainError("muirhead_fixed_p_cdf: p must be non-negative");
  require_n(n);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  const double poly = kSqrt2 / 3.0 * (1.0 - x * x) -
                      static_cast<double>(p) / (kSqrt2 * (ell - 1.0));
  return norm_cdf(x) + inv_sqrt_n * poly * norm_pdf(x);
}

double petrov_q(int v, std::span<const double> avg_cumulants, double x) {
  if (v == 1) {
    if (avg_cumulants.size() < 1) {
      throw DomainError("petrov_q: v = 1 needs the average third cumulant");
    }
    const double chi3 = avg_cumulants[0];
    return chi3 * (1.0 - x * x) * norm_pdf(x) / 6.0;
  }
  if (v == 2) {
    if (avg_cumulants.size() < 2) {
      throw DomainError("petrov_q: v = 2 needs the average third and fourth cumulants");
    }
    const double chi3 = avg_cumulants[0];
    const double chi4 = avg_cumulants[1];
    return -(chi4 * hermite(3, x) / 24.0 + chi3 * chi3 * hermite(5, x) / 72.0) * norm_pdf(x);
  }
  throw DomainError("petrov_q: unsupported order v = " + std::to_string(v) +
                    " (only v in {1,2})");
}

}  // namespace spiked::edgeworth
