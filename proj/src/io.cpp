#include "spiked/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "spiked/errors.hpp"

namespace spiked::io {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw NumericError("cannot open '" + path + "' for writing");
  return out;
}

json config_json(const sim::SimConfig& cfg) {
  return json{{"seed", cfg.seed},
              {"n", cfg.n},
              {"p", cfg.p},
              {"gamma_n", cfg.gamma_n()},
              {"ell", cfg.ell},
              {"method", sim::method_name(cfg.method)},
              {"replicates", cfg.replicates}};
}

}  // namespace

std::string format_g17(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_sample_set(const sim::SampleSet& samples, const std::string& prefix) {
  auto csv = open_out(prefix + ".csv");
  csv << "replicate_index,ell_hat,r_n\n";
  for (const auto& r : samples.replicates) {
    csv << r.index << ',' << format_g17(r.ell_hat) << ',' << format_g17(r.r_n) << '\n';
  }

  json sidecar = config_json(samples.config);
  sidecar["rho_n"] = samples.rho_n;
  sidecar["sigma_n"] = samples.sigma_n;
  auto js = open_out(prefix + ".json");
  js << sidecar.dump(2) << '\n';
}

sim::SampleSet read_sample_set(const std::string& prefix) {
  std::ifstream js(prefix + ".json");
  if (!js) throw NumericError("cannot open '" + prefix + ".json'");
  json sidecar = json::parse(js);

  sim::SampleSet out;
  out.config.seed = sidecar.at("seed").get<std::uint64_t>();
  out.config.n = sidecar.at("n").get<std::int64_t>();
  out.config.p = sidecar.at("p").get<std::int64_t>();
  out.config.ell = sidecar.at("ell").get<double>();
  out.config.method = sim::method_from_name(sidecar.at("method").get<std::string>());
  out.config.replicates = sidecar.at("replicates").get<std::int64_t>();
  out.rho_n = sidecar.at("rho_n").get<double>();
  out.sigma_n = sidecar.at("sigma_n").get<double>();

  std::ifstream csv(prefix + ".csv");
  if (!csv) throw NumericError("cannot open '" + prefix + ".csv'");
  std::string line;
  if (!std::getline(csv, line) || line != "replicate_index,ell_hat,r_n") {
    throw NumericError("unexpected sample CSV header in '" + prefix + ".csv'");
  }
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    sim::Replicate rep;
    std::istringstream row(line);
    std::string field;
    std::getline(row, field, ',');
    rep.index = std::stoll(field);
    std::getline(row, field, ',');
    rep.ell_hat = std::stod(field);
    std::getline(row, field, ',');
    rep.r_n = std::stod(field);
    out.replicates.push_back(rep);
  }
  if (out.replicates.size() != static_cast<std::size_t>(out.config.replicates)) {
    throw NumericError("sample CSV row count disagrees with sidecar replicates");
  }
  return out;
}

std::string comparison_report_json(const analysis::ComparisonReport& report) {
  json doc{{"ks_vs_normal", report.ks_vs_normal},
           {"ks_vs_corrected", report.ks_vs_corrected},
           {"sample_mean", report.sample_mean},
           {"sample_var", report.sample_var},
           {"sample_skewness", report.sample_skewness},
           {"predicted_skewness", report.predicted_skewness},
           {"validity_index", report.validity_index},
           {"n_samples", report.n_samples},
           {"metadata", config_json(report.metadata)}};
  return doc.dump(2);
}

void write_figure_data(const analysis::FigureData& fig, const sim::SampleSet& samples,
                       const std::string& prefix) {
  auto density = open_out(prefix + "_density.csv");
  density << "y,f_corrected,f_normal\n";
  for (std::size_t i = 0; i < fig.grid.size(); ++i) {
    density << format_g17(fig.grid[i]) << ',' << format_g17(fig.corrected_density[i])
            << ',' << format_g17(fig.normal_density[i]) << '\n';
  }

  auto hist = open_out(prefix + "_hist.csv");
  hist << "bin_left,bin_right,density\n";
  for (std::size_t i = 0; i < fig.histogram_density.size(); ++i) {
    hist << format_g17(fig.histogram_edges[i]) << ','
         << format_g17(fig.histogram_edges[i + 1]) << ','
         << format_g17(fig.histogram_density[i]) << '\n';
  }

  json meta = config_json(samples.config);
  meta["rho_n"] = samples.rho_n;
  meta["sigma_n"] = samples.sigma_n;
  meta["bulk_edge"] = fig.bulk_edge;
  meta["bins"] = fig.bins;
  meta["grid_points"] = fig.grid_points;
  meta["truncated_mass_corrected"] = fig.truncated_mass_corrected;
  meta["truncated_mass_normal"] = fig.truncated_mass_normal;
  auto js = open_out(prefix + ".json");
  js << meta.dump(2) << '\n';
}

}  // namespace spiked::io
