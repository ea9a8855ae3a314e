#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace spiked::sim {

enum class Method { dense, secular, goe };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

struct SimConfig {
  std::int64_t n = 0;
  std::int64_t p = 0;
  double ell = 0.0;
  std::int64_t replicates = 0;
  std::uint64_t seed = 0;
  Method method = Method::secular;
  int workers = 1;
  // Number of consecutive replicates sharing one noise spectrum (secular path
  // only). 1 = fresh spectrum per replicate, the default: the spectrum
  // fluctuations are part of the statistic being studied.
  std::int64_t noise_reuse = 1;

  double gamma_n() const { return static_cast<double>(p) / static_cast<double>(n); }
  void validate() const;
};

// One realization of the noise spectrum and the rotated signal vector.
// lambdas is sorted descending with exactly max(n-p, 0) trailing zeros;
// z has the same length n.
struct NoiseDraw {
  std::vector<double> lambdas;
  std::vector<double> z;
};

struct Replicate {
  std::int64_t index = 0;
  double ell_hat = 0.0;
  double r_n = 0.0;
};

struct SampleSet {
  SimConfig config;
  double rho_n = 0.0;
  double sigma_n = 0.0;
  std::vector<Replicate> replicates;

  std::vector<double> sorted_rn() const;
  std::vector<double> sorted_ell_hat() const;
};

// Largest eigenvalue of S = n^{-1} X'X with X = [sqrt(ell) Z1, Z2], computed
// from the smaller of the two Gram forms. Deterministic in
// (seed, replicate_index).
double sample_dense(std::int64_t n, std::int64_t p, double ell, std::uint64_t seed,
                    std::int64_t replicate_index);

// Same draw, additionally exporting the (Lambda, z) pair implied by the noise
// block: Lambda from the eigendecomposition of n^{-1} Z2 Z2' and z = U' Z1.
double sample_dense_with_noise(std::int64_t n, std::int64_t p, double ell,
                               std::uint64_t seed, std::int64_t replicate_index,
                               NoiseDraw* noise_out);

// Noise spectrum of n^{-1} Z2 Z2' (eigenvalues only, from the smaller Gram
// side) plus a fresh standard normal z. Valid because the eigenvector matrix
// is Haar distributed and independent of the spectrum.
NoiseDraw sample_noise(std::int64_t n, std::int64_t p, std::uint64_t seed,
                       std::int64_t replicate_index);

// Unique root x > lambda_1 of (ell/n) sum_i z_i^2 / (x - lambda_i) = 1.
// The left side is strictly decreasing above the spectrum, so bracketing
// bisection followed by a Newton polish converges to residual < 1e-13.
double secular_solve(const NoiseDraw& draw, double ell);

struct LinearStats {
  double s_n = 0.0;  // n^{-1/2} sum f(lambda_i)(z_i^2 - 1)
  double g_n = 0.0;  // sum f(lambda_i) - n * companion-law integral of f
};
LinearStats linear_statistics(const NoiseDraw& draw,
                              const std::function<double(double)>& f, double gamma_n);

// Monte Carlo over replicates. Per-replicate RNG streams are derived from
// (seed, replicate_index), so the result is byte-identical for any worker
// count; replicates are distributed over OpenMP threads.
SampleSet monte_carlo(const SimConfig& config);

// Single-threaded reference implementation with identical semantics; kept for
// validating the parallel path and for benchmarking.
SampleSet monte_carlo_serial(const SimConfig& config);

struct GoeConfig {
  std::int64_t p = 0;
  double theta = 0.0;
  std::int64_t replicates = 0;
  std::uint64_t seed = 0;
  int workers = 1;
  void validate() const;
};

// Largest eigenvalue of theta e1 e1' + Z for a GOE matrix Z, standardized by
// the deformation law centering/scaling. Dense symmetric eigensolve.
SampleSet goe_monte_carlo(const GoeConfig& config);
SampleSet goe_monte_carlo_serial(const GoeConfig& config);

}  // namespace spiked::sim
