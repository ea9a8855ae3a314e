// Benchmark: serial reference vs OpenMP replicate loop, with a consistency
// check that both produce identical samples.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <omp.h>

#include "spiked/simulation.hpp"

namespace sm = spiked::sim;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool identical(const sm::SampleSet& a, const sm::SampleSet& b) {
  if (a.replicates.size() != b.replicates.size()) return false;
  for (std::size_t i = 0; i < a.replicates.size(); ++i) {
    if (a.replicates[i].ell_hat != b.replicates[i].ell_hat) return false;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  sm::SimConfig cfg;
  cfg.n = 100;
  cfg.p = 100;
  cfg.ell = 3.0;
  cfg.replicates = 20000;
  cfg.seed = 42;
  cfg.method = sm::Method::secular;

  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    const std::string value = argv[i + 1];
    if (flag == "--n") cfg.n = std::stoll(value);
    else if (flag == "--p") cfg.p = std::stoll(value);
    else if (flag == "--ell") cfg.ell = std::stod(value);
    else if (flag == "--replicates") cfg.replicates = std::stoll(value);
    else if (flag == "--seed") cfg.seed = std::stoull(value);
    else if (flag == "--method") cfg.method = sm::method_from_name(value);
    else {
      std::fprintf(stderr, "unknown flag %s\n", flag.c_str());
      return 1;
    }
  }
  cfg.workers = 1;
  cfg.validate();

  std::printf("n=%lld p=%lld ell=%g replicates=%lld method=%s\n",
              static_cast<long long>(cfg.n), static_cast<long long>(cfg.p), cfg.ell,
              static_cast<long long>(cfg.replicates), sm::method_name(cfg.method).c_str());

  auto t0 = std::chrono::steady_clock::now();
  const auto reference = sm::monte_carlo_serial(cfg);
  const double serial_s = seconds_since(t0);
  std::printf("%-12s %8.3f s  %10.0f reps/s  speedup %5.2f\n", "serial", serial_s,
              cfg.replicates / serial_s, 1.0);

  const int hw = omp_get_max_threads();
  for (int workers = 1; workers <= hw; workers *= 2) {
    cfg.workers = workers;
    t0 = std::chrono::steady_clock::now();
    const auto run = sm::monte_carlo(cfg);
    const double s = seconds_since(t0);
    std::printf("%-9s %2d %8.3f s  %10.0f reps/s  speedup %5.2f  %s\n", "omp", workers,
                s, cfg.replicates / s, serial_s / s,
                identical(reference, run) ? "identical" : "MISMATCH");
    if (!identical(reference, run)) return 1;
  }
  return 0;
}
