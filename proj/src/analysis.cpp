#include "spiked/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spiked/errors.hpp"
#include "spiked/normal.hpp"

namespace spiked::analysis {

namespace {

struct Moments {
  double mean;
  double var;       // unbiased
  double skewness;  // m3 / m2^{3/2} with central sample moments
};

Moments sample_moments(std::span<const double> xs) {
  const double nn = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= nn;
  double m2 = 0.0, m3 = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  const double var = xs.size() > 1 ? m2 / (nn - 1.0) : 0.0;
  m2 /= nn;
  m3 /= nn;
  const double skew = m2 > 0.0 ? m3 / (m2 * std::sqrt(m2)) : 0.0;
  return {mean, var, skew};
}

ComparisonReport build_report(const sim::SampleSet& samples,
                              const edgeworth::EdgeworthApprox& approx,
                              double predicted_skewness, double validity) {
  const std::vector<double> sorted = samples.sorted_rn();
  if (sorted.empty()) throw DomainError("compare: empty sample set");

  ComparisonReport report;
  report.ks_vs_normal = ks_distance(sorted, [](double x) { return norm_cdf(x); });

  // The corrected CDF is clamped to [0,1] and monotone-rectified by a running
  // max so that the KS sweep sees a distribution function.
  double running = 0.0;
  report.ks_vs_corrected = ks_distance(sorted, [&](double x) {
    const double v = edgeworth::corrected_cdf(x, approx, /*clamp=*/true);
    running = std::max(running, v);
    return running;
  });

  const auto mom = sample_moments(sorted);
  report.sample_mean = mom.mean;
  report.sample_var = mom.var;
  report.sample_skewness = mom.skewness;
  report.predicted_skewness = predicted_skewness;
  report.validity_index = validity;
  report.n_samples = static_cast<std::int64_t>(sorted.size());
  report.metadata = samples.config;
  return report;
}

}  // namespace

double ks_distance(std::span<const double> sorted_samples,
                   const std::function<double(double)>& cdf) {
  const std::size_t n = sorted_samples.size();
  if (n == 0) throw DomainError("ks_distance: empty sample vector");
  const double nn = static_cast<double>(n);
  double sup = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = cdf(sorted_samples[i]);
    const double hi = (static_cast<double>(i) + 1.0) / nn - f;
    const double lo = f - static_cast<double>(i) / nn;
    sup = std::max({sup, std::abs(hi), std::abs(lo)});
  }
  return sup;
}

double kolmogorov_q(double t) {
  if (t <= 0.0) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * t * t);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_two_sample: empty sample vector");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double sup = 0.0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) {
      ++i;
    } else {
      ++j;
    }
    sup = std::max(sup, std::abs(static_cast<double>(i) / na -
                                 static_cast<double>(j) / nb));
  }
  return sup;
}

ComparisonReport compare(const sim::SampleSet& samples,
                         const edgeworth::SpikeParams& params) {
  const auto& cfg = samples.config;
  if (cfg.method == sim::Method::goe) {
    throw DomainError("compare: GOE sample sets go through compare_goe");
  }
  if (params.n != cfg.n || params.p != cfg.p ||
      std::abs(params.ell - cfg.ell) > 1e-12 ||
      std::abs(params.gamma_n - cfg.gamma_n()) > 1e-12) {
    throw DomainError("compare: params do not match sample metadata");
  }
  const auto approx = edgeworth::cumulants(params);
  const double predicted =
      approx.inv_sqrt_n * approx.kappa3 / (approx.kappa2 * std::sqrt(approx.kappa2));
  return build_report(samples, approx, predicted, edgeworth::validity_index(params));
}

ComparisonReport compare_goe(const sim::SampleSet& samples,
                             const edgeworth::GoeParams& params) {
  const auto& cfg = samples.config;
  if (cfg.method != sim::Method::goe || params.p != cfg.p ||
      std::abs(params.theta - cfg.ell) > 1e-12) {
    throw DomainError("compare_goe: params do not match sample metadata");
  }
  const auto approx = edgeworth::goe_correction(params);
  const double predicted = 6.0 * approx.alpha2 * approx.inv_sqrt_n;
  const double validity =
      4.5 * approx.alpha2 * approx.alpha2 / static_cast<double>(params.p);
  return build_report(samples, approx, predicted, validity);
}

FigureData figure_data(const sim::SampleSet& samples,
                       const edgeworth::SpikeParams& params, int bins,
                       std::int64_t grid_points) {
  if (bins < 10) throw DomainError("figure_data: bins must be >= 10");
  if (grid_points < 100) throw DomainError("figure_data: grid_points must be >= 100");
  const std::vector<double> ell_hats = samples.sorted_ell_hat();
  if (ell_hats.empty()) throw DomainError("figure_data: empty sample set");
  const double lo_sample = ell_hats.front();
  const double hi_sample = ell_hats.back();
  if (!(hi_sample > lo_sample)) {
    throw DomainError("figure_data: degenerate sample range");
  }

  const auto approx = edgeworth::cumulants(params);
  const double pad = 0.05 * (hi_sample - lo_sample);
  const double lo = lo_sample - pad;
  const double hi = hi_sample + pad;

  FigureData fig;
  fig.bins = bins;
  fig.grid_points = grid_points;
  const double edge_root = 1.0 + std::sqrt(params.gamma_n);
  fig.bulk_edge = edge_root * edge_root;

  fig.grid.resize(static_cast<std::size_t>(grid_points));
  fig.corrected_density.resize(fig.grid.size());
  fig.normal_density.resize(fig.grid.size());
  const double step = (hi - lo) / static_cast<double>(grid_points - 1);
  for (std::size_t k = 0; k < fig.grid.size(); ++k) {
    const double y = lo + step * static_cast<double>(k);
    fig.grid[k] = y;
    fig.corrected_density[k] = edgeworth::rescaled_density(y, approx);
    fig.normal_density[k] = edgeworth::rescaled_normal_density(y, approx);
  }

  // Area-normalized histogram over the padded range.
  fig.histogram_edges.resize(static_cast<std::size_t>(bins) + 1);
  fig.histogram_density.assign(static_cast<std::size_t>(bins), 0.0);
  const double bin_width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t k = 0; k < fig.histogram_edges.size(); ++k) {
    fig.histogram_edges[k] = lo + bin_width * static_cast<double>(k);
  }
  for (double v : ell_hats) {
    auto idx = static_cast<std::int64_t>((v - lo) / bin_width);
    idx = std::clamp<std::int64_t>(idx, 0, bins - 1);
    fig.histogram_density[static_cast<std::size_t>(idx)] += 1.0;
  }
  const double mass_per_count = 1.0 / (static_cast<double>(ell_hats.size()) * bin_width);
  for (auto& d : fig.histogram_density) d *= mass_per_count;

  // Standardized coordinates of the grid ends give the truncated reference mass.
  const double scale = std::sqrt(static_cast<double>(params.n)) / approx.sigma;
  const double x_lo = scale * (lo - approx.rho);
  const double x_hi = scale * (hi - approx.rho);
  fig.truncated_mass_normal = 1.0 - (norm_cdf(x_hi) - norm_cdf(x_lo));
  fig.truncated_mass_corrected =
      1.0 - (edgeworth::corrected_cdf(x_hi, approx) - edgeworth::corrected_cdf(x_lo, approx));
  return fig;
}

}  // namespace spiked::analysis
