#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slicearena/dimensioning.hpp"
#include "slicearena/resources.hpp"

namespace slicearena {

enum class PowerMode {
  utilization, // only active chains draw power
  always_on,   // every reserved chain of every slice draws power
};

struct SliceSpec {
  int slice_id = 0;
  double priority = 1.0;
  ResourceVector per_request_demand = ResourceVector::Zero(); // one O-DU+O-CU chain
  TrafficProfile traffic;
  int chain_capacity = 1;      // M_s, concurrency cap on active chains
  double arrival_mean = 0.0;   // Poisson mean of requests per slot
  double departure_prob = 0.0; // per active chain, per slot

  void validate() const;
};

struct DataCenterSpec {
  int dc_id = 0;
  ResourceVector capacity = ResourceVector::Zero();
  double power_lo = 0.0; // watts per active chain, drawn uniformly in [lo, hi]
  double power_hi = 0.0;

  double power_mid() const { return 0.5 * (power_lo + power_hi); }
  void validate() const;
};

struct ScenarioConfig {
  std::vector<DataCenterSpec> data_centers;
  std::vector<SliceSpec> slices;
  double kappa = 100.0;
  double penalty = 1000.0; // M, charged per infeasible placement attempt
  int horizon = 200;       // slots per episode
  std::vector<double> arrival_sweep{2, 4, 6, 8, 10, 12};
  PowerMode power_mode = PowerMode::utilization;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10,
                                   11, 12, 13, 14, 15, 16, 17, 18, 19, 20};

  int dc_count() const { return static_cast<int>(data_centers.size()); }
  int slice_count() const { return static_cast<int>(slices.size()); }

  /// Sum over slices of M_s times the largest per-chain draw: the slot maximum
  /// of total power. Normalized power divides by this.
  double power_normalizer() const;

  /// Copy with every slice's arrival mean replaced.
  ScenarioConfig with_arrival_mean(double mean) const;
  /// Copy with every slice's chain capacity replaced.
  ScenarioConfig with_chain_capacity(int capacity) const;
  ScenarioConfig with_kappa(double value) const;

  void validate() const; // throws ValidationError naming the field
};

const char* to_string(PowerMode mode);

} // namespace slicearena
