#include "spiked/simulation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

#include "spiked/edgeworth.hpp"
#include "spiked/errors.hpp"
#include "spiked/mp_functionals.hpp"
#include "spiked/rng.hpp"

namespace spiked::sim {

std::string method_name(Method m) {
  switch (m) {
    case Method::dense: return "dense";
    case Method::secular: return "secular";
    case Method::goe: return "goe";
  }
  return "unknown";
}

Method method_from_name(const std::string& name) {
  if (name == "dense") return Method::dense;
  if (name == "secular") return Method::secular;
  if (name == "goe") return Method::goe;
  throw DomainError("unknown method '" + name + "' (expected dense|secular|goe)");
}

void SimConfig::validate() const {
  if (n < 1 || p < 1) throw DomainError("n and p must be positive integers");
  if (replicates < 1) throw DomainError("replicates must be >= 1");
  if (workers < 1) throw DomainError("workers must be >= 1");
  if (noise_reuse < 1) throw DomainError("noise_reuse must be >= 1");
  if (noise_reuse > 1 && method != Method::secular) {
    throw DomainError("noise_reuse > 1 is only meaningful for the secular method");
  }
  const double threshold = 1.0 + std::sqrt(gamma_n());
  if (!(ell > threshold)) {
    throw DomainError("supercritical spike required: ell > 1 + sqrt(gamma_n) = " +
                      std::to_string(threshold) + ", got ell = " + std::to_string(ell));
  }
}

void GoeConfig::validate() const {
  if (p < 1) throw DomainError("p must be a positive integer");
  if (replicates < 1) throw DomainError("replicates must be >= 1");
  if (workers < 1) throw DomainError("workers must be >= 1");
  if (!(theta > 1.0)) throw DomainError("GOE perturbation requires theta > 1");
}

std::vector<double> SampleSet::sorted_rn() const {
  std::vector<double> out;
  out.reserve(replicates.size());
  for (const auto& r : replicates) out.push_back(r.r_n);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> SampleSet::sorted_ell_hat() const {
  std::vector<double> out;
  out.reserve(replicates.size());
  for (const auto& r : replicates) out.push_back(r.ell_hat);
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// Draw order is part of the determinism contract: row-major for matrices,
// index order for vectors.
Eigen::VectorXd draw_vector(rng::SplitMix64& stream, std::int64_t n) {
  Eigen::VectorXd v(n);
  for (std::int64_t i = 0; i < n; ++i) v(i) = stream.next_normal();
  return v;
}

Eigen::MatrixXd draw_matrix(rng::SplitMix64& stream, std::int64_t rows, std::int64_t cols) {
  Eigen::MatrixXd m(rows, cols);
  for (std::int64_t i = 0; i < rows; ++i) {
    for (std::int64_t j = 0; j < cols; ++j) m(i, j) = stream.next_normal();
  }
  return m;
}

double largest_eigenvalue(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericError("symmetric eigensolver failed on a " +
                       std::to_string(sym.rows()) + "x" + std::to_string(sym.cols()) +
                       " matrix");
  }
  return solver.eigenvalues().maxCoeff();
}

// Eigenvalues of n^{-1} Z2 Z2' (descending, zero-padded to length n) from the
// smaller Gram side: the two forms share their nonzero spectrum.
std::vector<double> noise_spectrum(const Eigen::MatrixXd& z2, std::int64_t n,
                                   std::int64_t p) {
  Eigen::MatrixXd gram;
  if (p <= n) {
    gram = (z2.transpose() * z2) / static_cast<double>(n);
  } else {
    gram = (z2 * z2.transpose()) / static_cast<double>(n);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericError("noise spectrum eigensolve failed (n=" + std::to_string(n) +
                       ", p=" + std::to_string(p) + ")");
  }
  const auto& ev = solver.eigenvalues();  // ascending
  std::vector<double> lambdas(static_cast<std::size_t>(n), 0.0);
  const std::int64_t k = ev.size();
  for (std::int64_t i = 0; i < k; ++i) {
    lambdas[static_cast<std::size_t>(i)] = std::max(ev(k - 1 - i), 0.0);
  }
  return lambdas;
}

struct StandardizedScale {
  double rho;
  double sigma;
  double sqrt_n;
};

Replicate run_spiked_replicate(const SimConfig& cfg, const StandardizedScale& scale,
                               std::int64_t index, const NoiseDraw* shared_noise) {
  double ell_hat;
  if (cfg.method == Method::dense) {
    ell_hat = sample_dense(cfg.n, cfg.p, cfg.ell, cfg.seed, index);
  } else if (shared_noise != nullptr) {
    NoiseDraw draw = *shared_noise;
    auto signal = rng::replicate_stream(cfg.seed, static_cast<std::uint64_t>(index),
                                        rng::StreamRole::signal);
    for (auto& zi : draw.z) zi = signal.next_normal();
    ell_hat = secular_solve(draw, cfg.ell);
  } else {
    const NoiseDraw draw = sample_noise(cfg.n, cfg.p, cfg.seed, index);
    ell_hat = secular_solve(draw, cfg.ell);
  }
  const double r_n = scale.sqrt_n * (ell_hat - scale.rho) / scale.sigma;
  return {index, ell_hat, r_n};
}

template <typename Body>
void replicate_loop(std::int64_t blocks, int workers, bool parallel, Body&& body) {
  std::atomic<bool> failed{false};
  std::atomic<std::int64_t> failed_index{-1};
  std::string message;

  if (parallel && workers > 1) {
#pragma omp parallel for schedule(dynamic) num_threads(workers)
    for (std::int64_t b = 0; b < blocks; ++b) {
      if (failed.load(std::memory_order_relaxed)) continue;
      try {
        body(b);
      } catch (const std::exception& e) {
        bool expected = false;
        if (failed.compare_exchange_strong(expected, true)) {
          failed_index.store(b);
#pragma omp critical(spiked_mc_error)
          message = e.what();
        }
      }
    }
  } else {
    for (std::int64_t b = 0; b < blocks; ++b) {
      try {
        body(b);
      } catch (const std::exception& e) {
        failed.store(true);
        failed_index.store(b);
        message = e.what();
        break;
      }
    }
  }

  if (failed.load()) {
    throw NumericError("replicate block " + std::to_string(failed_index.load()) +
                       " failed: " + message);
  }
}

SampleSet run_monte_carlo(const SimConfig& config, bool parallel) {
  config.validate();
  const auto cs = edgeworth::centering_scaling(config.ell, config.gamma_n());
  const StandardizedScale scale{cs.rho, cs.sigma,
                                std::sqrt(static_cast<double>(config.n))};

  SampleSet out;
  out.config = config;
  out.rho_n = cs.rho;
  out.sigma_n = cs.sigma;
  out.replicates.resize(static_cast<std::size_t>(config.replicates));

  const std::int64_t reuse = config.noise_reuse;
  const std::int64_t blocks = (config.replicates + reuse - 1) / reuse;

  replicate_loop(blocks, config.workers, parallel, [&](std::int64_t b) {
    const std::int64_t first = b * reuse;
    const std::int64_t last = std::min(first + reuse, config.replicates);
    if (config.method == Method::secular && reuse > 1) {
      // The block shares the spectrum drawn at its first replicate index.
      const NoiseDraw shared = sample_noise(config.n, config.p, config.seed, first);
      for (std::int64_t i = first; i < last; ++i) {
        out.replicates[static_cast<std::size_t>(i)] =
            run_spiked_replicate(config, scale, i, &shared);
      }
    } else {
      for (std::int64_t i = first; i < last; ++i) {
        out.replicates[static_cast<std::size_t>(i)] =
            run_spiked_replicate(config, scale, i, nullptr);
      }
    }
  });
  return out;
}

SampleSet run_goe_monte_carlo(const GoeConfig& config, bool parallel) {
  config.validate();
  const auto approx = edgeworth::goe_correction(edgeworth::GoeParams::make(config.theta, config.p));
  const double sqrt_p = std::sqrt(static_cast<double>(config.p));

  SampleSet out;
  out.config.n = config.p;
  out.config.p = config.p;
  out.config.ell = config.theta;
  out.config.replicates = config.replicates;
  out.config.seed = config.seed;
  out.config.method = Method::goe;
  out.config.workers = config.workers;
  out.rho_n = approx.rho;
  out.sigma_n = approx.sigma;
  out.replicates.resize(static_cast<std::size_t>(config.replicates));

  const std::int64_t p = config.p;
  const double diag_sd = std::sqrt(2.0 / static_cast<double>(p));
  const double off_sd = std::sqrt(1.0 / static_cast<double>(p));

  replicate_loop(config.replicates, config.workers, parallel, [&](std::int64_t i) {
    auto stream = rng::replicate_stream(config.seed, static_cast<std::uint64_t>(i),
                                        rng::StreamRole::goe);
    Eigen::MatrixXd x(p, p);
    // Upper triangle in row-major order, diagonal included.
    for (std::int64_t r = 0; r < p; ++r) {
      x(r, r) = diag_sd * stream.next_normal();
      for (std::int64_t c = r + 1; c < p; ++c) {
        const double v = off_sd * stream.next_normal();
        x(r, c) = v;
        x(c, r) = v;
      }
    }
    x(0, 0) += config.theta;
    const double theta_hat = largest_eigenvalue(x);
    const double r_p = sqrt_p * (theta_hat - approx.rho) / approx.sigma;
    out.replicates[static_cast<std::size_t>(i)] = {i, theta_hat, r_p};
  });
  return out;
}

}  // namespace

double sample_dense(std::int64_t n, std::int64_t p, double ell, std::uint64_t seed,
                    std::int64_t replicate_index) {
  return sample_dense_with_noise(n, p, ell, seed, replicate_index, nullptr);
}

double sample_dense_with_noise(std::int64_t n, std::int64_t p, double ell,
                               std::uint64_t seed, std::int64_t replicate_index,
                               NoiseDraw* noise_out) {
  if (n < 1 || p < 1) throw DomainError("n and p must be positive integers");
  if (!(ell > 0.0)) throw DomainError("ell must be positive");

  auto signal = rng::replicate_stream(seed, static_cast<std::uint64_t>(replicate_index),
                                      rng::StreamRole::signal);
  auto noise = rng::replicate_stream(seed, static_cast<std::uint64_t>(replicate_index),
                                     rng::StreamRole::noise);
  const Eigen::VectorXd z1 = draw_vector(signal, n);
  const Eigen::MatrixXd z2 = draw_matrix(noise, n, p);

  Eigen::MatrixXd x(n, p + 1);
  x.col(0) = std::sqrt(ell) * z1;
  x.rightCols(p) = z2;

  Eigen::MatrixXd gram;
  if (p + 1 <= n) {
    gram = (x.transpose() * x) / static_cast<double>(n);
  } else {
    gram = (x * x.transpose()) / static_cast<double>(n);
  }
  const double ell_hat = largest_eigenvalue(gram);

  if (noise_out != nullptr) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        (z2 * z2.transpose()) / static_cast<double>(n));
    if (solver.info() != Eigen::Success) {
      throw NumericError("full noise eigendecomposition failed");
    }
    // Ascending from Eigen; flip to descending and rotate the signal.
    noise_out->lambdas.assign(static_cast<std::size_t>(n), 0.0);
    noise_out->z.assign(static_cast<std::size_t>(n), 0.0);
    const Eigen::VectorXd rotated = solver.eigenvectors().transpose() * z1;
    for (std::int64_t i = 0; i < n; ++i) {
      noise_out->lambdas[static_cast<std::size_t>(i)] =
          std::max(solver.eigenvalues()(n - 1 - i), 0.0);
      noise_out->z[static_cast<std::size_t>(i)] = rotated(n - 1 - i);
    }
  }
  return ell_hat;
}

NoiseDraw sample_noise(std::int64_t n, std::int64_t p, std::uint64_t seed,
                       std::int64_t replicate_index) {
  if (n < 1 || p < 1) throw DomainError("n and p must be positive integers");
  auto signal = rng::replicate_stream(seed, static_cast<std::uint64_t>(replicate_index),
                                      rng::StreamRole::signal);
  auto noise = rng::replicate_stream(seed, static_cast<std::uint64_t>(replicate_index),
                                     rng::StreamRole::noise);
  NoiseDraw draw;
  draw.z.resize(static_cast<std::size_t>(n));
  for (auto& zi : draw.z) zi = signal.next_normal();
  const Eigen::MatrixXd z2 = draw_matrix(noise, n, p);
  draw.lambdas = noise_spectrum(z2, n, p);
  return draw;
}

double secular_solve(const NoiseDraw& draw, double ell) {
  const std::size_t n = draw.lambdas.size();
  if (n == 0 || draw.z.size() != n) {
    throw DomainError("secular_solve: lambdas and z must be non-empty and equal length");
  }
  if (!(ell > 0.0)) throw DomainError("secular_solve: ell must be positive");

  double lambda1 = draw.lambdas[0];
  double sum_z2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lambda1 = std::max(lambda1, draw.lambdas[i]);
    sum_z2 += draw.z[i] * draw.z[i];
  }
  if (sum_z2 == 0.0) {
    throw NumericError("secular_solve: z is identically zero");
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  auto f = [&](double x) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double zi = draw.z[i];
      if (zi != 0.0) s += zi * zi / (x - draw.lambdas[i]);
    }
    return ell * inv_n * s - 1.0;
  };

  const double scale = std::max(1.0, lambda1);
  double lo = lambda1 + 1e-12 * scale;
  double hi = lambda1 + ell * (1.0 + sum_z2 * inv_n);

  // f decreases from +inf at the largest active pole; push the bracket ends
  // until the signs straddle the root, geometrically in the gap.
  int tries = 0;
  while (!(f(lo) > 0.0) && tries++ < 200) lo = lambda1 + 0.5 * (lo - lambda1);
  if (!(f(lo) > 0.0)) {
    throw NumericError("secular_solve: no positive value near lambda_1; corrupt input");
  }
  tries = 0;
  while (!(f(hi) < 0.0) && tries++ < 200) hi = lambda1 + 2.0 * (hi - lambda1);
  if (!(f(hi) < 0.0)) {
    throw NumericError("secular_solve: upper bracket expansion failed; corrupt input");
  }

  while (hi - lo > 1e-13 * scale) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }

  // Newton polish. The residual target is 1e-13; when the root sits very
  // close to the top pole (tiny leading z component) the evaluation noise of
  // the sum exceeds that, so a machine-precision step is accepted as well:
  // the root location is then determined to ~eps even though the residual
  // cannot be driven further down.
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 30; ++it) {
    const double fx = f(x);
    if (std::abs(fx) < 1e-13) return x;
    double deriv = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double zi = draw.z[i];
      if (zi != 0.0) {
        const double d = x - draw.lambdas[i];
        deriv -= zi * zi / (d * d);
      }
    }
    deriv *= ell * inv_n;
    const double step = fx / deriv;
    const double next = x - step;
    if (!(next > lambda1) || !std::isfinite(next)) break;
    x = next;
    if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(x))) return x;
  }
  if (std::abs(f(x)) < 1e-13) return x;
  throw NumericError("secular_solve: Newton polish did not converge");
}

LinearStats linear_statistics(const NoiseDraw& draw,
                              const std::function<double(double)>& f, double gamma_n) {
  const std::size_t n = draw.lambdas.size();
  if (n == 0 || draw.z.size() != n) {
    throw DomainError("linear_statistics: lambdas and z must be non-empty and equal length");
  }
  double s = 0.0;
  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double fi = f(draw.lambdas[i]);
    trace += fi;
    s += fi * (draw.z[i] * draw.z[i] - 1.0);
  }
  const double nn = static_cast<double>(n);
  const double integral = mp::mp_expect(f, gamma_n, mp::Law::companion);
  return {s / std::sqrt(nn), trace - nn * integral};
}

SampleSet monte_carlo(const SimConfig& config) { return run_monte_carlo(config, true); }

SampleSet monte_carlo_serial(const SimConfig& config) {
  return run_monte_carlo(config, false);
}

SampleSet goe_monte_carlo(const GoeConfig& config) {
  return run_goe_monte_carlo(config, true);
}

SampleSet goe_monte_carlo_serial(const GoeConfig& config) {
  return run_goe_monte_carlo(config, false);
}

}  // namespace spiked::sim
