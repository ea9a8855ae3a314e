#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "spiked/edgeworth.hpp"
#include "spiked/simulation.hpp"

namespace spiked::analysis {

struct ComparisonReport {
  double ks_vs_normal = 0.0;
  double ks_vs_corrected = 0.0;
  double sample_mean = 0.0;
  double sample_var = 0.0;
  double sample_skewness = 0.0;
  double predicted_skewness = 0.0;  // n^{-1/2} kappa3 kappa2^{-3/2}
  double validity_index = 0.0;
  std::int64_t n_samples = 0;
  sim::SimConfig metadata;
};

struct FigureData {
  std::vector<double> grid;               // y values on the eigenvalue scale
  std::vector<double> corrected_density;  // rescaled corrected density
  std::vector<double> normal_density;     // rescaled normal density
  std::vector<double> histogram_edges;    // bins + 1 edges
  std::vector<double> histogram_density;  // area-normalized
  double bulk_edge = 0.0;                 // (1 + sqrt(gamma_n))^2
  int bins = 0;
  std::int64_t grid_points = 0;
  // Mass of each reference law outside the grid; the integral checks hold up
  // to this truncation.
  double truncated_mass_corrected = 0.0;
  double truncated_mass_normal = 0.0;
};

// Kolmogorov-Smirnov sup distance between the empirical CDF of the sorted
// samples and a non-decreasing reference CDF:
//   sup_i max(|i/N - F(x_i)|, |(i-1)/N - F(x_i)|).
double ks_distance(std::span<const double> sorted_samples,
                   const std::function<double(double)>& cdf);

// Asymptotic tail probability of the scaled KS statistic,
// Q(t) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 t^2).
double kolmogorov_q(double t);

// Two-sample KS distance between two sorted samples.
double ks_two_sample(std::span<const double> sorted_a, std::span<const double> sorted_b);

// Goodness of fit of the standardized replicates against the plain normal and
// the corrected CDF (clamped and monotone-rectified for the KS sweep), plus
// moment diagnostics. Throws when params disagree with the sample metadata.
ComparisonReport compare(const sim::SampleSet& samples,
                         const edgeworth::SpikeParams& params);

// GOE variant of the same report.
ComparisonReport compare_goe(const sim::SampleSet& samples,
                             const edgeworth::GoeParams& params);

// Plot-ready densities and histogram on the eigenvalue scale. The grid spans
// the sample range padded by 5% on each side.
FigureData figure_data(const sim::SampleSet& samples,
                       const edgeworth::SpikeParams& params, int bins = 100,
                       std::int64_t grid_points = 512);

}  // namespace spiked::analysis
