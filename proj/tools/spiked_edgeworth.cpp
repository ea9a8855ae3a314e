// Command-line interface: evaluation of the corrected approximation,
// identity checks, Monte Carlo simulation, goodness-of-fit comparison and
// figure-data export.

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "spiked/analysis.hpp"
#include "spiked/edgeworth.hpp"
#include "spiked/errors.hpp"
#include "spiked/io.hpp"
#include "spiked/mp_functionals.hpp"
#include "spiked/normal.hpp"
#include "spiked/simulation.hpp"

namespace ew = spiked::edgeworth;
namespace sm = spiked::sim;
namespace an = spiked::analysis;
namespace mp = spiked::mp;
namespace io = spiked::io;

namespace {

struct GridSpec {
  double lo = 0.0;
  double hi = 0.0;
  double step = 0.0;

  std::vector<double> points() const {
    std::vector<double> xs;
    for (double x = lo; x <= hi + 1e-12 * std::max(1.0, std::abs(hi)); x += step) {
      xs.push_back(x);
    }
    return xs;
  }
};

GridSpec parse_grid(const std::string& text) {
  GridSpec g;
  const auto first = text.find(':');
  const auto second = text.find(':', first + 1);
  if (first == std::string::npos || second == std::string::npos) {
    throw spiked::DomainError("--grid expects lo:hi:step, got '" + text + "'");
  }
  try {
    g.lo = std::stod(text.substr(0, first));
    g.hi = std::stod(text.substr(first + 1, second - first - 1));
    g.step = std::stod(text.substr(second + 1));
  } catch (const std::exception&) {
    throw spiked::DomainError("--grid expects numeric lo:hi:step, got '" + text + "'");
  }
  if (!(g.step > 0.0) || g.hi < g.lo) {
    throw spiked::DomainError("--grid requires lo <= hi and step > 0");
  }
  return g;
}

// Shared model flags: --p overrides --gamma; giving both inconsistently
// (beyond rounding of gamma*n) is fatal. ell can come directly or through
// --ell-factor f, resolving ell = (1+f)(1+sqrt(gamma_n)).
struct ModelFlags {
  std::int64_t n = 100;
  std::int64_t p = -1;
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double ell = std::numeric_limits<double>::quiet_NaN();
  double ell_factor = std::numeric_limits<double>::quiet_NaN();

  void add_to(CLI::App* cmd, bool require_n) {
    auto* n_opt = cmd->add_option("--n", n, "sample count n (default 100)");
    if (require_n) n_opt->required();
    cmd->add_option("--p", p, "noise dimension p (overrides --gamma)");
    cmd->add_option("--gamma", gamma, "aspect ratio gamma_n = p/n");
    auto* e_opt = cmd->add_option("--ell", ell, "spike strength ell");
    auto* f_opt = cmd->add_option("--ell-factor", ell_factor,
                                  "relative spike strength ell/(1+sqrt(gamma_n)) - 1");
    e_opt->excludes(f_opt);
  }

  bool has_gamma() const { return !std::isnan(gamma); }

  void check_gamma_p_consistency() const {
    if (p >= 1 && has_gamma() &&
        std::llround(gamma * static_cast<double>(n)) != p) {
      throw spiked::DomainError(
          "--gamma and --p disagree beyond rounding (round(gamma*n) = " +
          std::to_string(std::llround(gamma * static_cast<double>(n))) + ", p = " +
          std::to_string(p) + ")");
    }
  }

  // gamma_n used by pure evaluation commands: as given unless p is supplied.
  double resolve_gamma_real() const {
    check_gamma_p_consistency();
    if (p >= 1) return static_cast<double>(p) / static_cast<double>(n);
    if (!has_gamma()) throw spiked::DomainError("one of --gamma or --p is required");
    if (!(gamma > 0.0)) throw spiked::DomainError("gamma must be positive");
    return gamma;
  }

  // Integer p for simulation: the flag value, or round(gamma*n).
  std::int64_t resolve_p() const {
    check_gamma_p_consistency();
    if (p >= 1) return p;
    if (!has_gamma()) throw spiked::DomainError("one of --gamma or --p is required");
    const auto rounded = std::llround(gamma * static_cast<double>(n));
    if (rounded < 1) throw spiked::DomainError("round(gamma*n) must be >= 1");
    return rounded;
  }

  double resolve_ell(double gamma_n) const {
    if (!std::isnan(ell)) return ell;
    if (!std::isnan(ell_factor)) {
      return (1.0 + ell_factor) * (1.0 + std::sqrt(gamma_n));
    }
    throw spiked::DomainError("one of --ell or --ell-factor is required");
  }
};

void echo_params(std::int64_t n, std::int64_t p, double gamma_n, double ell,
                 std::optional<std::uint64_t> seed) {
  std::cerr << "# effective: n=" << n << " p=" << p
            << " gamma_n=" << io::format_g17(gamma_n) << " ell=" << io::format_g17(ell);
  if (seed) std::cerr << " seed=" << *seed;
  std::cerr << '\n';
}

std::ostream& out_stream(const std::string& path, std::ofstream& file) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw spiked::NumericError("cannot open '" + path + "' for writing");
  return file;
}

int run_approx(std::int64_t n, const ModelFlags& model, double x,
               const std::string& grid_text, double gamma_limit, bool clamp,
               const std::string& out_path) {
  const double gamma_n = model.resolve_gamma_real();
  const double ell = model.resolve_ell(gamma_n);
  auto params = ew::SpikeParams::from_gamma(ell, gamma_n, n);
  auto mode = ew::GammaMode::finite_gamma_n;
  if (gamma_limit >= 0.0) {
    params = params.with_gamma_limit(gamma_limit);
    mode = ew::GammaMode::limit_gamma;
  }
  echo_params(n, params.p, gamma_n, ell, std::nullopt);
  const auto approx = ew::cumulants(params, mode);

  std::ofstream file;
  auto& out = out_stream(out_path, file);
  if (!grid_text.empty()) {
    const auto grid = parse_grid(grid_text);
    out << "x,p1,corrected_cdf,corrected_density\n";
    for (double xi : grid.points()) {
      out << io::format_g17(xi) << ',' << io::format_g17(ew::p1(xi, params, mode)) << ','
          << io::format_g17(ew::corrected_cdf(xi, approx, clamp)) << ','
          << io::format_g17(ew::corrected_density(xi, approx)) << '\n';
    }
  } else {
    out << "p1 " << io::format_g17(ew::p1(x, params, mode)) << '\n';
    out << "corrected_cdf " << io::format_g17(ew::corrected_cdf(x, approx, clamp)) << '\n';
    out << "corrected_density " << io::format_g17(ew::corrected_density(x, approx)) << '\n';
    out << "rho_n " << io::format_g17(approx.rho) << '\n';
    out << "sigma_n " << io::format_g17(approx.sigma) << '\n';
    out << "validity_index " << io::format_g17(ew::validity_index(params)) << '\n';
  }
  return 0;
}

int run_quantile(std::int64_t n, const ModelFlags& model, double u) {
  const double gamma_n = model.resolve_gamma_real();
  const double ell = model.resolve_ell(gamma_n);
  const auto params = ew::SpikeParams::from_gamma(ell, gamma_n, n);
  echo_params(n, params.p, gamma_n, ell, std::nullopt);
  const auto approx = ew::cumulants(params);
  const double x = ew::corrected_quantile(u, approx);
  std::cout << "quantile " << io::format_g17(x) << '\n';
  std::cout << "residual " << io::format_g17(ew::corrected_cdf(x, approx) - u) << '\n';
  return 0;
}

int run_check_identities(std::int64_t n, const ModelFlags& model, double tol) {
  const double gamma_n = model.resolve_gamma_real();
  const double ell = model.resolve_ell(gamma_n);
  const auto params = ew::SpikeParams::from_gamma(ell, gamma_n, n);
  echo_params(n, params.p, gamma_n, ell, std::nullopt);
  const auto approx = ew::cumulants(params);

  const double rho = approx.rho;
  auto g = [rho](double lam) { return 1.0 / (rho - lam); };
  auto g2 = [&](double lam) { return g(lam) * g(lam); };
  auto g3 = [&](double lam) { return g(lam) * g(lam) * g(lam); };

  std::vector<std::pair<std::string, double>> rows;
  rows.emplace_back("kappa2*sigma^2 - 4",
                    std::abs(approx.kappa2 * approx.sigma * approx.sigma - 4.0));

  double dual = 0.0, hermite_form = 0.0, fd = 0.0;
  for (double x = -4.0; x <= 4.0; x += 0.125) {
    const double via_cumulants =
        approx.kappa3 / (6.0 * approx.kappa2 * std::sqrt(approx.kappa2)) * (1.0 - x * x) -
        approx.mu_g / std::sqrt(approx.kappa2);
    dual = std::max(dual, std::abs(ew::p1(x, params) - via_cumulants));
    const double hf = spiked::norm_cdf(x) -
                      approx.inv_sqrt_n *
                          (approx.alpha2 * ew::hermite(2, x) + approx.alpha0) *
                          spiked::norm_pdf(x);
    hermite_form = std::max(hermite_form, std::abs(ew::corrected_cdf(x, approx) - hf));
    const double h = 1e-5;
    const double diff =
        (ew::corrected_cdf(x + h, approx) - ew::corrected_cdf(x - h, approx)) / (2.0 * h);
    fd = std::max(fd, std::abs(diff - ew::corrected_density(x, approx)));
  }
  rows.emplace_back("p1 dual forms (sup over x)", dual);
  rows.emplace_back("hermite-form cdf (sup over x)", hermite_form);
  rows.emplace_back("density vs cdf derivative (sup over x)", fd);

  const double h = ell - 1.0;
  const double den = (h * h - gamma_n) * std::sqrt(h * h - gamma_n);
  rows.emplace_back("alpha2 closed form",
                    std::abs(approx.alpha2 - spiked::kSqrt2 / 3.0 * (h * h * h + gamma_n) / den));
  rows.emplace_back("alpha0 closed form",
                    std::abs(approx.alpha0 - gamma_n * ell / (spiked::kSqrt2 * den)));
  rows.emplace_back("F(g) - 1/ell (quadrature)",
                    std::abs(mp::mp_expect(g, gamma_n, mp::Law::companion) - 1.0 / ell));
  rows.emplace_back(
      "F(g^2) - closed form (quadrature)",
      std::abs(mp::mp_expect(g2, gamma_n, mp::Law::companion) - mp::f_g2(ell, gamma_n)));
  rows.emplace_back(
      "F(g^3) - closed form (quadrature)",
      std::abs(mp::mp_expect(g3, gamma_n, mp::Law::companion) - mp::f_g3(ell, gamma_n)));
  rows.emplace_back("bs_mean(g) - mu(g)",
                    std::abs(mp::bs_mean(g, gamma_n) - mp::mu_g(ell, gamma_n)));
  rows.emplace_back(
      "stieltjes(rho) + 1/ell",
      std::abs(mp::companion_stieltjes(gamma_n, rho) + 1.0 / ell));

  bool all_ok = true;
  for (const auto& [name, residual] : rows) {
    const bool ok = residual < tol;
    all_ok = all_ok && ok;
    std::cout << (ok ? "ok   " : "FAIL ") << name << " = " << io::format_g17(residual)
              << '\n';
  }
  return all_ok ? 0 : 2;
}

int run_simulate(const ModelFlags& model, std::int64_t replicates, std::uint64_t seed,
                 const std::string& method, int workers, std::int64_t noise_reuse,
                 const std::string& out_prefix) {
  sm::SimConfig cfg;
  cfg.n = model.n;
  cfg.p = model.resolve_p();
  cfg.ell = model.resolve_ell(static_cast<double>(cfg.p) / static_cast<double>(cfg.n));
  cfg.replicates = replicates;
  cfg.seed = seed;
  cfg.method = sm::method_from_name(method);
  cfg.workers = workers;
  cfg.noise_reuse = noise_reuse;
  cfg.validate();
  echo_params(cfg.n, cfg.p, cfg.gamma_n(), cfg.ell, seed);

  const auto samples = sm::monte_carlo(cfg);
  io::write_sample_set(samples, out_prefix);
  std::cerr << "# wrote " << out_prefix << ".csv and " << out_prefix << ".json\n";
  return 0;
}

int run_compare(const std::string& input_prefix, const std::string& out_path) {
  const auto samples = io::read_sample_set(input_prefix);
  an::ComparisonReport report;
  if (samples.config.method == sm::Method::goe) {
    report = an::compare_goe(
        samples, ew::GoeParams::make(samples.config.ell, samples.config.p));
    echo_params(samples.config.n, samples.config.p, samples.config.gamma_n(),
                samples.config.ell, samples.config.seed);
  } else {
    const auto params = ew::SpikeParams::from_dims(samples.config.ell, samples.config.n,
                                                   samples.config.p);
    echo_params(samples.config.n, samples.config.p, params.gamma_n, params.ell,
                samples.config.seed);
    report = an::compare(samples, params);
  }
  std::ofstream file;
  auto& out = out_stream(out_path, file);
  out << io::comparison_report_json(report) << '\n';
  return 0;
}

int run_goe(double theta, std::int64_t p, std::int64_t replicates, std::uint64_t seed,
            int workers, double x, bool has_x, const std::string& grid_text,
            const std::string& out_prefix) {
  const auto params = ew::GoeParams::make(theta, p);
  const auto approx = ew::goe_correction(params);
  std::cerr << "# effective: p=" << p << " theta=" << io::format_g17(theta);
  if (replicates > 0) std::cerr << " seed=" << seed;
  std::cerr << '\n';

  if (replicates > 0) {
    sm::GoeConfig cfg;
    cfg.p = p;
    cfg.theta = theta;
    cfg.replicates = replicates;
    cfg.seed = seed;
    cfg.workers = workers;
    const auto samples = sm::goe_monte_carlo(cfg);
    if (!out_prefix.empty()) {
      io::write_sample_set(samples, out_prefix);
      std::cerr << "# wrote " << out_prefix << ".csv and " << out_prefix << ".json\n";
    }
    const auto report = an::compare_goe(samples, params);
    std::cout << io::comparison_report_json(report) << '\n';
    return 0;
  }

  if (!grid_text.empty()) {
    const auto grid = parse_grid(grid_text);
    std::cout << "x,p1,corrected_cdf,corrected_density\n";
    for (double xi : grid.points()) {
      std::cout << io::format_g17(xi) << ',' << io::format_g17(ew::goe_p1(xi, params))
                << ',' << io::format_g17(ew::corrected_cdf(xi, approx)) << ','
                << io::format_g17(ew::corrected_density(xi, approx)) << '\n';
    }
    return 0;
  }
  if (!has_x) {
    throw spiked::DomainError("goe: provide --replicates, --x or --grid");
  }
  std::cout << "rho " << io::format_g17(approx.rho) << '\n';
  std::cout << "sigma " << io::format_g17(approx.sigma) << '\n';
  std::cout << "p1 " << io::format_g17(ew::goe_p1(x, params)) << '\n';
  std::cout << "corrected_cdf " << io::format_g17(ew::corrected_cdf(x, approx)) << '\n';
  return 0;
}

int run_figure(const ModelFlags& model, std::int64_t replicates, std::uint64_t seed,
               const std::string& method, int workers, int bins,
               std::int64_t grid_points, const std::string& out_prefix) {
  sm::SimConfig cfg;
  cfg.n = model.n;
  cfg.p = model.resolve_p();
  cfg.ell = model.resolve_ell(static_cast<double>(cfg.p) / static_cast<double>(cfg.n));
  cfg.replicates = replicates;
  cfg.seed = seed;
  cfg.method = sm::method_from_name(method);
  cfg.workers = workers;
  cfg.validate();
  echo_params(cfg.n, cfg.p, cfg.gamma_n(), cfg.ell, seed);

  const auto samples = sm::monte_carlo(cfg);
  const auto params = ew::SpikeParams::from_dims(cfg.ell, cfg.n, cfg.p);
  const auto fig = an::figure_data(samples, params, bins, grid_points);
  io::write_figure_data(fig, samples, out_prefix);
  std::cerr << "# wrote " << out_prefix << "_density.csv, " << out_prefix
            << "_hist.csv and " << out_prefix << ".json\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Corrected largest-eigenvalue distribution for the rank-one spiked "
               "covariance model: evaluation, simulation and validation"};
  app.require_subcommand(1);

  // approx
  auto* approx_cmd = app.add_subcommand("approx", "evaluate p1, corrected CDF and density");
  ModelFlags approx_model;
  approx_model.add_to(approx_cmd, /*require_n=*/true);
  double approx_x = 0.0;
  std::string approx_grid;
  double gamma_limit = -1.0;
  bool clamp = false;
  std::string approx_out;
  auto* x_opt = approx_cmd->add_option("--x", approx_x, "evaluation point");
  approx_cmd->add_option("--grid", approx_grid, "lo:hi:step table output")->excludes(x_opt);
  approx_cmd->add_option("--gamma-limit", gamma_limit,
                         "use the limiting-gamma polynomial with this value (0 = classical)");
  approx_cmd->add_flag("--clamp", clamp, "clamp the CDF to [0,1]");
  approx_cmd->add_option("--out", approx_out, "output file (default stdout)");

  // quantile
  auto* quantile_cmd = app.add_subcommand("quantile", "invert the corrected CDF");
  ModelFlags quantile_model;
  quantile_model.add_to(quantile_cmd, /*require_n=*/true);
  double u = 0.5;
  quantile_cmd->add_option("--u", u, "probability level in (0,1)")->required();

  // check-identities
  auto* check_cmd = app.add_subcommand("check-identities",
                                       "closed-form vs quadrature identity table");
  ModelFlags check_model;
  check_model.add_to(check_cmd, /*require_n=*/false);
  double tol = 1e-8;
  check_cmd->add_option("--tol", tol, "residual tolerance (default 1e-8)");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo replicates of ell_hat");
  ModelFlags sim_model;
  sim_model.add_to(sim_cmd, /*require_n=*/true);
  std::int64_t replicates = 1000;
  std::uint64_t seed = 1;
  std::string method = "secular";
  int workers = 1;
  std::int64_t noise_reuse = 1;
  std::string sim_out;
  sim_cmd->add_option("--replicates", replicates, "replicate count")->required();
  sim_cmd->add_option("--seed", seed, "RNG seed")->required();
  sim_cmd->add_option("--method", method, "dense|secular (default secular)");
  sim_cmd->add_option("--workers", workers, "worker threads")
      ->envname("SPIKED_EDGEWORTH_WORKERS");
  sim_cmd->add_option("--noise-reuse", noise_reuse,
                      "replicates sharing one noise spectrum (secular only)");
  sim_cmd->add_option("--out", sim_out, "output prefix (<out>.csv, <out>.json)")->required();

  // compare
  auto* compare_cmd = app.add_subcommand("compare", "goodness-of-fit report for samples");
  std::string input_prefix;
  std::string compare_out;
  compare_cmd->add_option("--input", input_prefix, "sample prefix (<input>.csv/.json)")
      ->required();
  compare_cmd->add_option("--out", compare_out, "report path (default stdout)");

  // goe
  auto* goe_cmd = app.add_subcommand("goe", "rank-one GOE variant");
  double theta = 2.0;
  std::int64_t goe_p = 0;
  std::int64_t goe_replicates = 0;
  std::uint64_t goe_seed = 1;
  int goe_workers = 1;
  double goe_x = 0.0;
  std::string goe_grid;
  std::string goe_out;
  goe_cmd->add_option("--theta", theta, "perturbation strength > 1")->required();
  goe_cmd->add_option("--p", goe_p, "matrix dimension")->required();
  goe_cmd->add_option("--replicates", goe_replicates, "simulate this many replicates");
  goe_cmd->add_option("--seed", goe_seed, "RNG seed");
  goe_cmd->add_option("--workers", goe_workers, "worker threads")
      ->envname("SPIKED_EDGEWORTH_WORKERS");
  auto* goe_x_opt = goe_cmd->add_option("--x", goe_x, "evaluation point");
  goe_cmd->add_option("--grid", goe_grid, "lo:hi:step table output");
  goe_cmd->add_option("--out", goe_out, "sample output prefix");

  // figure
  auto* figure_cmd = app.add_subcommand("figure", "plot-ready densities and histogram");
  ModelFlags fig_model;
  fig_model.add_to(figure_cmd, /*require_n=*/true);
  std::int64_t fig_replicates = 100000;
  std::uint64_t fig_seed = 1;
  std::string fig_method = "secular";
  int fig_workers = 1;
  int bins = 100;
  std::int64_t grid_points = 512;
  std::string fig_out;
  figure_cmd->add_option("--replicates", fig_replicates, "replicate count");
  figure_cmd->add_option("--seed", fig_seed, "RNG seed")->required();
  figure_cmd->add_option("--method", fig_method, "dense|secular (default secular)");
  figure_cmd->add_option("--workers", fig_workers, "worker threads")
      ->envname("SPIKED_EDGEWORTH_WORKERS");
  figure_cmd->add_option("--bins", bins, "histogram bins (default 100)");
  figure_cmd->add_option("--grid-points", grid_points, "density grid size (default 512)");
  figure_cmd->add_option("--out", fig_out, "output prefix")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*approx_cmd) {
      if (approx_grid.empty() && x_opt->count() == 0) {
        throw spiked::DomainError("approx: provide --x or --grid");
      }
      return run_approx(approx_model.n, approx_model, approx_x, approx_grid, gamma_limit,
                        clamp, approx_out);
    }
    if (*quantile_cmd) return run_quantile(quantile_model.n, quantile_model, u);
    if (*check_cmd) return run_check_identities(check_model.n, check_model, tol);
    if (*sim_cmd) {
      return run_simulate(sim_model, replicates, seed, method, workers, noise_reuse,
                          sim_out);
    }
    if (*compare_cmd) return run_compare(input_prefix, compare_out);
    if (*goe_cmd) {
      return run_goe(theta, goe_p, goe_replicates, goe_seed, goe_workers, goe_x,
                     goe_x_opt->count() > 0, goe_grid, goe_out);
    }
    if (*figure_cmd) {
      return run_figure(fig_model, fig_replicates, fig_seed, fig_method, fig_workers,
                        bins, grid_points, fig_out);
    }
  } catch (const spiked::DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return 1;
  } catch (const spiked::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
