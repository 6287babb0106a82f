#pragma once

#include <algorithm>
#include <cstdint>
#include <random>

namespace slicearena::testing {

/// Mean sojourn time of a FIFO M/M/1 queue fed a 1/M share of Poisson(alpha)
/// traffic, by Lindley's recursion over `arrivals` customers.
inline double simulate_mm1_sojourn(double mu, double alpha, int vnf_count, long arrivals, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> interarrival(alpha / vnf_count);
  std::exponential_distribution<double> service(mu);
  double wait = 0.0;
  double total = 0.0;
  for (long i = 0; i < arrivals; ++i) {
    const double s = service(rng);
    total += wait + s;
    wait = std::max(0.0, wait + s - interarrival(rng));
  }
  return total / static_cast<double>(arrivals);
}

} // namespace slicearena::testing
