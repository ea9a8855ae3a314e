#pragma once

#include <iosfwd>
#include <string>

#include "spiked/analysis.hpp"
#include "spiked/simulation.hpp"

namespace spiked::io {

// Shortest round-trip decimal form (17 significant digits).
std::string format_g17(double value);

// Sample sets are stored as <prefix>.csv with header
// replicate_index,ell_hat,r_n plus a JSON sidecar <prefix>.json holding
// {seed, n, p, gamma_n, ell, method, replicates, rho_n, sigma_n}.
void write_sample_set(const sim::SampleSet& samples, const std::string& prefix);
sim::SampleSet read_sample_set(const std::string& prefix);

std::string comparison_report_json(const analysis::ComparisonReport& report);

// Figure data is stored as <prefix>_density.csv (y,f_corrected,f_normal),
// <prefix>_hist.csv (bin_left,bin_right,density) and a metadata JSON
// <prefix>.json.
void write_figure_data(const analysis::FigureData& fig, const sim::SampleSet& samples,
                       const std::string& prefix);

}  // namespace spiked::io
