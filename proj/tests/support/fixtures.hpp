#pragma once

#include <filesystem>
#include <string>

#include "slicearena/config.hpp"
#include "slicearena/scenario.hpp"

namespace slicearena::testing {

inline std::filesystem::path source_dir() { return SLICEARENA_SOURCE_DIR; }

inline ScenarioConfig reference_scenario() { return load_config(source_dir() / "configs" / "paper.cfg"); }

/// Two identical data centers and `slices` slices with the given demand.
inline ScenarioConfig small_scenario(int slices = 2, double arrival_mean = 0.0, double power_lo = 100.0,
                                     double power_hi = 200.0) {
  ScenarioConfig sc;
  for (int n = 0; n < 2; ++n) {
    DataCenterSpec dc;
    dc.dc_id = n + 1;
    dc.capacity = make_resources(32, 50, 5000);
    dc.power_lo = power_lo;
    dc.power_hi = power_hi;
    sc.data_centers.push_back(dc);
  }
  for (int s = 0; s < slices; ++s) {
    SliceSpec sl;
    sl.slice_id = s + 1;
    sl.per_request_demand = s % 2 == 0 ? make_resources(2, 7, 30) : make_resources(3, 5, 50);
    sl.traffic = {1.0, 2.0, 1.07};
    sl.chain_capacity = 8;
    sl.arrival_mean = arrival_mean;
    sl.departure_prob = 0.3;
    sc.slices.push_back(sl);
  }
  sc.seeds = {1, 2, 3};
  sc.horizon = 20;
  return sc;
}

} // namespace slicearena::testing
