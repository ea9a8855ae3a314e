#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include "spiked/edgeworth.hpp"
#include "spiked/errors.hpp"
#include "spiked/normal.hpp"
#include "spiked/quadrature.hpp"
#include "support.hpp"

using namespace spiked;
namespace ew = spiked::edgeworth;
namespace ts = spiked::testsupport;

namespace {

std::vector<std::pair<double, double>> supercritical_grid() {
  std::vector<std::pair<double, double>> out;
  for (double gamma : {0.1, 0.5, 1.0, 2.0, 4.0}) {
    for (double factor : {1.2, 1.4, 1.7, 2.2, 3.0}) {
      out.emplace_back(factor * (1.0 + std::sqrt(gamma)), gamma);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("centering and scaling") {
  auto cs = ew::centering_scaling(3.0, 1.0);
  CHECK(cs.rho == doctest::Approx(4.5).epsilon(1e-15));
  CHECK(cs.sigma == doctest::Approx(std::sqrt(13.5)).epsilon(1e-15));

  auto cs2 = ew::centering_scaling(2.0, 0.25);
  CHECK(cs2.rho == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(cs2.sigma == doctest::Approx(std::sqrt(6.0)).epsilon(1e-15));

  // gamma -> 0 limit: (ell, sqrt(2) ell).
  auto cs0 = ew::centering_scaling(3.0, 1e-14);
  CHECK(cs0.rho == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(cs0.sigma == doctest::Approx(kSqrt2 * 3.0).epsilon(1e-12));

  CHECK_THROWS_AS(ew::centering_scaling(1.9, 1.0), DomainError);
}

TEST_CASE("spike params validation") {
  auto params = ew::SpikeParams::from_dims(3.0, 100, 10);
  CHECK(params.gamma_n == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(params.p == 10);
  CHECK_THROWS_AS(ew::SpikeParams::from_dims(1.5, 100, 100), DomainError);
  CHECK_THROWS_AS(ew::SpikeParams::from_gamma(3.0, -0.1, 100), DomainError);
  CHECK_THROWS_AS(ew::SpikeParams::from_gamma(3.0, 1.0, 0), DomainError);
}

TEST_CASE("cumulants at the reference point") {
  const auto params = ew::SpikeParams::from_gamma(3.0, 1.0, 100);
  const auto approx = ew::cumulants(params);
  CHECK(approx.kappa2 == doctest::Approx(8.0 / 27.0).epsilon(1e-14));
  CHECK(approx.kappa3 == doctest::Approx(64.0 / 81.0).epsilon(1e-14));
  CHECK(approx.mu_g == doctest::Approx(2.0 / 9.0).epsilon(1e-14));
  CHECK(approx.rho == doctest::Approx(4.5).epsilon(1e-15));
  CHECK(approx.inv_sqrt_n == doctest::Approx(0.1).epsilon(1e-15));
}

TEST_CASE("cumulant identities on a supercritical grid") {
  for (auto [ell, gamma] : supercritical_grid()) {
    const auto params = ew::SpikeParams::from_gamma(ell, gamma, 100);
    const auto approx = ew::cumulants(params);
    CHECK(approx.kappa2 * approx.sigma * approx.sigma == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(approx.kappa3 > 0.0);
    CHECK(approx.alpha2 > 0.0);
    // Hermite coefficients against their closed forms in h = ell - 1.
    const double h = ell - 1.0;
    const double den = (h * h - gamma) * std::sqrt(h * h - gamma);
    CHECK(approx.alpha2 ==
          doctest::Approx(kSqrt2 / 3.0 * (h * h * h + gamma) / den).epsilon(1e-12));
    CHECK(approx.alpha0 ==
          doctest::Approx(gamma * ell / (kSqrt2 * den)).epsilon(1e-12));
  }
}

TEST_CASE("p1 dual forms agree") {
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> gamma_dist(0.05, 3.0);
  std::uniform_real_distribution<double> factor_dist(1.1, 2.5);
  std::uniform_real_distribution<double> x_dist(-4.0, 4.0);
  for (int i = 0; i < 100; ++i) {
    const double gamma = gamma_dist(gen);
    const double ell = factor_dist(gen) * (1.0 + std::sqrt(gamma));
    const double x = x_dist(gen);
    const auto params = ew::SpikeParams::from_gamma(ell, gamma, 50);
    const auto approx = ew::cumulants(params);
    const double via_cumulants =
        approx.kappa3 / (6.0 * approx.kappa2 * std::sqrt(approx.kappa2)) * (1.0 - x * x) -
        approx.mu_g / std::sqrt(approx.kappa2);
    CHECK(ew::p1(x, params) == doctest::Approx(via_cumulants).epsilon(1e-12));
  }
}

TEST_CASE("p1 special values") {
  // gamma = 0 limit: (sqrt(2)/3)(1 - x^2).
  const auto params = ew::SpikeParams::from_gamma(3.0, 1.0, 100).with_gamma_limit(0.0);
  for (double x : {-2.0, -1.0, 0.0, 0.5, 3.0}) {
    CHECK(ew::p1(x, params, ew::GammaMode::limit_gamma) ==
          doctest::Approx(kSqrt2 / 3.0 * (1.0 - x * x)).epsilon(1e-14));
  }

  const auto ref = ew::SpikeParams::from_gamma(3.0, 1.0, 100);
  CHECK(ew::p1(0.0, ref) == doctest::Approx(0.40824829046386302).epsilon(1e-14));
  // At x = 1 only the constant term survives.
  CHECK(ew::p1(1.0, ref) == doctest::Approx(-0.40824829046386302).epsilon(1e-14));
  CHECK(ew::p1(1.0, ref) < 0.0);
  // Even in x.
  CHECK(ew::p1(1.7, ref) == doctest::Approx(ew::p1(-1.7, ref)).epsilon(1e-15));
}

TEST_CASE("gamma -> 0 continuity of p1") {
  const auto params = ew::SpikeParams::from_gamma(3.0, 1.0, 100).with_gamma_limit(1e-8);
  for (double x = -4.0; x <= 4.0; x += 0.25) {
    CHECK(ew::p1(x, params, ew::GammaMode::limit_gamma) ==
          doctest::Approx(kSqrt2 / 3.0 * (1.0 - x * x)).epsilon(1e-6));
  }
}

TEST_CASE("hermite polynomials") {
  CHECK(ew::hermite(0, 123.0) == 1.0);
  CHECK(ew::hermite(1, 0.7) == doctest::Approx(0.7));
  CHECK(ew::hermite(2, 2.0) == doctest::Approx(3.0));
  CHECK(ew::hermite(3, 2.0) == doctest::Approx(2.0));
  for (double x : {-1.3, 0.0, 0.4, 2.9}) {
    CHECK(ew::hermite(2, x) == doctest::Approx(x * x - 1.0).epsilon(1e-15));
    CHECK(ew::hermite(3, x) == doctest::Approx(x * x * x - 3.0 * x).epsilon(1e-15));
    CHECK(ew::hermite(5, x) ==
          doctest::Approx(std::pow(x, 5) - 10.0 * x * x * x + 15.0 * x).epsilon(1e-13));
  }
  CHECK_THROWS_AS(ew::hermite(-1, 0.0), DomainError);
}

TEST_CASE("corrected cdf") {
  const auto params = ew::SpikeParams::from_gamma(3.0, 1.0, 100);
  const auto approx = ew::cumulants(params);

  CHECK(ew::corrected_cdf(0.0, approx) == doctest::Approx(0.51628675039676400).epsilon(1e-14));
  CHECK(ew::corrected_cdf(-40.0, approx) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(ew::corrected_cdf(40.0, approx) == doctest::Approx(1.0).epsilon(1e-14));

  // Hermite form agreement, pointwise.
  for (double x = -6.0; x <= 6.0; x += 0.1) {
    const double hermite_form =
        norm_cdf(x) - approx.inv_sqrt_n *
                          (approx.alpha2 * ew::hermite(2, x) + approx.alpha0) * norm_pdf(x);
    CHECK(ew::corrected_cdf(x, approx) == doctest::Approx(hermite_form).epsilon(1e-14));
  }

  // gamma = 0 mode: the correction vanishes at x = +-1.
  const auto approx0 = ew::cumulants(params.with_gamma_limit(0.0), ew::GammaMode::limit_gamma);
  CHECK(ew::corrected_cdf(1.0, approx0) == doctest::Approx(norm_cdf(1.0)).epsilon(1e-15));
  CHECK(ew::corrected_cdf(-1.0, approx0) == doctest::Approx(norm_cdf(-1.0)).epsilon(1e-15));

  // The clamp flag restricts to [0,1] where the raw value dips below zero.
  const auto tiny = ew::cumulants(ew::SpikeParams::from_gamma(2.6, 1.0, 50));
  bool dipped = false;
  for (double x = -8.0; x < -2.0; x += 0.01) {
    const double raw = ew::corrected_cdf(x, tiny);
    const double clamped = ew::corrected_cdf(x, tiny, true);
    CHECK(clamped >= 0.0);
    if (raw < 0.0) dipped = true;
  }
  CHECK(dipped);
}

TEST_CASE("corrected density") {
  const auto params = ew::SpikeParams::from_gamma(3.0, 1.0, 100);
  const auto approx = ew::cumulants(params);

  // Odd polynomial factors vanish at zero.
  CHECK(ew::corrected_density(0.0, approx) == doctest::Approx(norm_pdf(0.0)).epsilon(1e-15));

  // Central differences of the CDF reproduce the density.
  const double h = 1e-5;
  for (double x = -4.0; x <= 4.0; x += 0.25) {
    const double fd =
        (ew::corrected_cdf(x + h, approx) - ew::corrected_cdf(x - h, approx)) / (2.0 * h);
    CHECK(fd == doctest::Approx(ew::corrected_density(x, approx)).epsilon(1e-6));
  }

  // Unit mass and first moment n^{-1/2} alpha0.
  const double mass = integrate_adaptive(
      [&](double x) { return ew::corrected_density(x, approx); }, -15.0, 15.0, 1e-13);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
  const double mean = integrate_adaptive(
      [&](double x) { return x * ew::corrected_density(x, approx); }, -15.0, 15.0, 1e-13);
  CHECK(mean == doctest::Approx(approx.inv_sqrt_n * approx.alpha0).epsilon(1e-8));

  // The signed density goes negative for x far enough left.
  double most_negative = 0.0;
  for (double x = -10.0; x < 0.0; x += 0.05) {
    most_negative = std::min(most_negative, ew::corrected_density(x, approx));
  }
  CHECK(most_negative < 0.0);

  // Odd part: alpha2 H3 + alpha0 H1 is odd, so f(x) + f(-x) = 2 phi(x).
  for (double x : {0.3, 1.1, 2.7}) {
    CHECK(ew::corrected_density(x, approx) + ew::corrected_density(-x, approx) ==
          doctest::Approx(2.0 * norm_pdf(x)).epsilon(1e-14));
  }
}

TEST_CASE("relative-error cubic roots") {
  const auto params = ew::SpikeParams::from_gamma(3.0, 1.0, 100);
  const auto approx = ew::cumulants(params);
  REQUIRE(3.0 > approx.alpha0 / approx.alpha2);
  const double root = std::sqrt(3.0 - approx.alpha0 / approx.alpha2);

  auto cubic = [&](double x) {
    return approx.alpha2 * ew::hermite(3, x) + approx.alpha0 * ew::hermite(1, x);
  };
  CHECK(cubic(0.0) == 0.0);
  // Numeric root by bisection on [0.1, 4] against the closed form.
  double lo = 0.1, hi = 4.0;
  REQUIRE(cubic(lo) < 0.0);
  REQUIRE(cubic(hi) > 0.0);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (cubic(mid) < 0.0 ? lo : hi) = mid;
  }
  CHECK(0.5 * (lo + hi) == doctest::Approx(root).epsilon(1e-10));
  CHECK(cubic(-root) == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("rescaled density") {
  const auto params = ew::SpikeParams::from_dims(1.9743416490252569, 100, 10);
  const auto approx = ew::cumulants(params);

  CHECK(ew::rescaled_density(approx.rho, approx) ==
        doctest::Approx(norm_pdf(0.0) / (approx.inv_sqrt_n * approx.sigma)).epsilon(1e-13));

  const double w = 20.0 * approx.sigma * approx.inv_sqrt_n;
  const double mass = integrate_adaptive(
      [&](double y) { return ew::rescaled_density(y, approx); }, approx.rho - w,
      approx.rho + w, 1e-13);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));

  // Right skew: the mean sits right of rho while the mode sits slightly left
  // (the cubic factor has negative slope at the center, alpha0 < 3 alpha2).
  const double mean = integrate_adaptive(
      [&](double y) { return y * ew::rescaled_density(y, approx); }, approx.rho - w,
      approx.rho + w, 1e-13);
  CHECK(mean > approx.rho);
  CHECK(mean == doctest::Approx(approx.rho + approx.sigma * approx.inv_sqrt_n *
                                                approx.inv_sqrt_n * approx.alpha0)
                    .epsilon(1e-10));
  double best_y = approx.rho, best = -1.0;
  for (double y = approx.rho - w; y <= approx.rho + w; y += w / 4000.0) {
    const double d = ew::rescaled_density(y, approx);
    if (d > best) {
      best = d;
      best_y = y;
    }
  }
  CHECK(best_y < approx.rho);
}

TEST_CASE("corrected quantile") {
  const auto params = ew::SpikeParams::from_gamma(1.9743416490252569, 0.1, 100);
  const auto approx = ew::cumulants(params);

  for (double u : {0.025, 0.1, 0.5, 0.9, 0.975}) {
    const double x = ew::corrected_quantile(u, approx);
    CHECK(ew::corrected_cdf(x, approx) == doctest::Approx(u).epsilon(1e-12));
  }

  // Round trip on [-3, 3]. At n = 100 the left-tail dip pushes the CDF below
  // zero before x = -3, so the full-range trip uses n = 400; the n = 100
  // sweep stays on the region where the CDF value is a probability.
  const auto wide = ew::cumulants(ew::SpikeParams::from_gamma(1.9743416490252569, 0.1, 400));
  for (double x = -3.0; x <= 3.0; x += 0.25) {
    const double u = ew::corrected_cdf(x, wide);
    CHECK(ew::corrected_quantile(u, wide) == doctest::Approx(x).epsilon(1e-10));
  }
  for (double x = -3.0; x <= 3.0; x += 0.25) {
    const double u = ew::corrected_cdf(x, approx);
    if (u > 0.0 && u < 1.0) {
      CHECK(ew::corrected_quantile(u, approx) == doctest::Approx(x).epsilon(1e-10));
    }
  }

  // gamma = 0 mode: correction at zero is positive, so the median sits left of 0.
  const auto approx0 =
      ew::cumulants(ew::SpikeParams::from_gamma(3.0, 1.0, 100).with_gamma_limit(0.0),
                    ew::GammaMode::limit_gamma);
  const double median = ew::corrected_quantile(0.5, approx0);
  CHECK(median < 0.0);
  CHECK(ew::corrected_cdf(median, approx0) == doctest::Approx(0.5).epsilon(1e-12));

  CHECK_THROWS_AS(ew::corrected_quantile(0.0, approx), DomainError);
  CHECK_THROWS_AS(ew::corrected_quantile(1.0, approx), DomainError);
}

TEST_CASE("validity index") {
  const auto params = ew::SpikeParams::from_gamma(1.9743416490252569, 0.1, 100);
  CHECK(ew::validity_index(params) == doctest::Approx(0.017146921240506348).epsilon(1e-12));

  const auto approx = ew::cumulants(params);
  CHECK(ew::validity_index(params) ==
        doctest::Approx(4.5 * approx.alpha2 * approx.alpha2 / 100.0).epsilon(1e-12));

  // Blows up as h^2 approaches gamma_n.
  const auto near = ew::SpikeParams::from_gamma(1.0 + std::sqrt(0.5) + 1e-6, 0.5, 100);
  CHECK(ew::validity_index(near) > 1e10);
}

TEST_CASE("goe correction") {
  const auto params = ew::GoeParams::make(2.0, 200);
  const auto approx = ew::goe_correction(params);
  CHECK(approx.rho == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(approx.sigma == doctest::Approx(std::sqrt(1.5)).epsilon(1e-15));
  CHECK(ew::goe_p1(0.0, params) == doctest::Approx(-0.045360921162651446).epsilon(1e-14));
  CHECK(ew::goe_p1(0.0, params) < 0.0);

  // The approx reuses the CDF machinery: p1 = alpha2(1-x^2) - alpha0.
  for (double x : {-2.0, 0.0, 1.3}) {
    CHECK(approx.alpha2 * (1.0 - x * x) - approx.alpha0 ==
          doctest::Approx(ew::goe_p1(x, params)).epsilon(1e-14));
    const double cdf = norm_cdf(x) + approx.inv_sqrt_n * ew::goe_p1(x, params) * norm_pdf(x);
    CHECK(ew::corrected_cdf(x, approx) == doctest::Approx(cdf).epsilon(1e-14));
  }
  CHECK(approx.kappa2 * approx.sigma * approx.sigma == doctest::Approx(4.0).epsilon(1e-13));

  CHECK_THROWS_AS(ew::GoeParams::make(1.0, 200), DomainError);
}

TEST_CASE("muirhead fixed-p expansion") {
  // p = 0 formally drops the dimension term.
  for (double x : {-1.5, 0.0, 2.0}) {
    CHECK(ew::muirhead_fixed_p_cdf(x, 3.0, 0, 100) ==
          doctest::Approx(norm_cdf(x) + 0.1 * kSqrt2 / 3.0 * (1.0 - x * x) * norm_pdf(x))
              .epsilon(1e-14));
  }
  // At x = +-1 only the dimension term is left.
  const double expected =
      norm_cdf(1.0) - 0.1 * 5.0 / (kSqrt2 * 2.0) * norm_pdf(1.0);
  CHECK(ew::muirhead_fixed_p_cdf(1.0, 3.0, 5, 100) == doctest::Approx(expected).epsilon(1e-14));
  CHECK_THROWS_AS(ew::muirhead_fixed_p_cdf(0.0, 1.0, 5, 100), DomainError);
}

TEST_CASE("muirhead consistency transform approaches the gamma = 0 correction") {
  // Evaluating the fixed-p expansion at c_n x + d_n reproduces the gamma = 0
  // corrected CDF up to O(1/n).
  const double ell = 3.0;
  const std::int64_t p = 5;
  std::array<double, 2> sup{};
  std::array<std::int64_t, 2> ns{1000, 100000};
  for (std::size_t k = 0; k < ns.size(); ++k) {
    const auto n = ns[k];
    const double gamma_n = static_cast<double>(p) / static_cast<double>(n);
    const double cn = std::sqrt(1.0 - gamma_n / ((ell - 1.0) * (ell - 1.0)));
    const double dn = std::sqrt(static_cast<double>(n) / 2.0) * gamma_n / (ell - 1.0);
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    double worst = 0.0;
    for (double x = -4.0; x <= 4.0; x += 0.05) {
      const double lhs = ew::muirhead_fixed_p_cdf(cn * x + dn, ell, p, n);
      const double rhs =
          norm_cdf(x) + inv_sqrt_n * kSqrt2 / 3.0 * (1.0 - x * x) * norm_pdf(x);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
    sup[k] = worst;
  }
  // O(1/n) decay: a hundredfold n drop shrinks the gap accordingly.
  CHECK(sup[1] < sup[0] / 50.0);
}

TEST_CASE("petrov expansion terms") {
  // v = 1 reduces to chi3 (1 - x^2) phi / 6 and vanishes at +-1.
  const double chi3 = 0.8;
  std::array<double, 1> c1{chi3};
  CHECK(ew::petrov_q(1, c1, 1.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(ew::petrov_q(1, c1, -1.0) == doctest::Approx(0.0).epsilon(1e-15));
  for (double x : {-2.0, 0.0, 0.7}) {
    CHECK(ew::petrov_q(1, c1, x) ==
          doctest::Approx(chi3 * (1.0 - x * x) * norm_pdf(x) / 6.0).epsilon(1e-15));
  }

  // Against the symbolic derivative oracle: for v = 1 the term is
  // (chi3/3!) (-1)^3 d^3 Phi/dx^3; for v = 2 with chi3 = 0 only the w = 1
  // partition (chi4/4!) (+1) d^4 Phi/dx^4 contributes.
  const auto c3 = ts::phi_derivative_polynomial(3);
  const auto c4 = ts::phi_derivative_polynomial(4);
  const auto c6 = ts::phi_derivative_polynomial(6);
  for (double x = -3.0; x <= 3.0; x += 0.37) {
    const double oracle1 = chi3 / 6.0 * -ts::eval_poly(c3, x) * norm_pdf(x);
    CHECK(ew::petrov_q(1, c1, x) == doctest::Approx(oracle1).epsilon(1e-13));

    std::array<double, 2> c_only4{0.0, 1.3};
    const double oracle2 = 1.3 / 24.0 * ts::eval_poly(c4, x) * norm_pdf(x);
    CHECK(ew::petrov_q(2, c_only4, x) == doctest::Approx(oracle2).epsilon(1e-13));

    // Full v = 2: add the (1,1) partition (chi3/3!)^2 d^6 Phi/dx^6 / 2!.
    std::array<double, 2> c_both{0.8, 1.3};
    const double oracle_full =
        oracle2 + 0.5 * (0.8 / 6.0) * (0.8 / 6.0) * ts::eval_poly(c6, x) * norm_pdf(x);
    CHECK(ew::petrov_q(2, c_both, x) == doctest::Approx(oracle_full).epsilon(1e-13));
  }

  // Parity: Q1 even, Q2 odd.
  std::array<double, 2> cs{0.8, 1.3};
  for (double x : {0.4, 1.9}) {
    CHECK(ew::petrov_q(1, cs, x) == doctest::Approx(ew::petrov_q(1, cs, -x)).epsilon(1e-15));
    CHECK(ew::petrov_q(2, cs, x) == doctest::Approx(-ew::petrov_q(2, cs, -x)).epsilon(1e-15));
  }

  CHECK_THROWS_AS(ew::petrov_q(3, cs, 0.0), DomainError);
  CHECK_THROWS_AS(ew::petrov_q(0, cs, 0.0), DomainError);
}

TEST_CASE("petrov v=1 matches the first p1 term") {
  for (auto [ell, gamma] : supercritical_grid()) {
    const auto params = ew::SpikeParams::from_gamma(ell, gamma, 100);
    const auto approx = ew::cumulants(params);
    const double chi3 = approx.kappa3 / (approx.kappa2 * std::sqrt(approx.kappa2));
    std::array<double, 1> cs{chi3};
    for (double x = -3.0; x <= 3.0; x += 0.5) {
      const double first_term = chi3 / 6.0 * (1.0 - x * x) * norm_pdf(x);
      CHECK(ew::petrov_q(1, cs, x) == doctest::Approx(first_term).epsilon(1e-12));
      // and that first term is exactly p1 + the mu shift.
      const double p1_first =
          (ew::p1(x, params) + approx.mu_g / std::sqrt(approx.kappa2)) * norm_pdf(x);
      CHECK(ew::petrov_q(1, cs, x) == doctest::Approx(p1_first).epsilon(1e-12));
    }
  }
}

TEST_CASE("normal quantile") {
  for (double u : {1e-8, 0.01, 0.3, 0.5, 0.8, 0.99, 1.0 - 1e-8}) {
    CHECK(norm_cdf(norm_quantile(u)) == doctest::Approx(u).epsilon(1e-13));
  }
  CHECK(norm_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK_THROWS_AS(norm_quantile(0.0), DomainError);
  CHECK_THROWS_AS(norm_quantile(1.5), DomainError);
}
