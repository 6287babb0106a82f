#include "slicearena/baselines.hpp"
#include "slicearena/dimensioning.hpp"
#include "slicearena/errors.hpp"
#include "slicearena/evaluation.hpp"
#include "slicearena/scenario.hpp"

namespace slicearena {

namespace {

double mean_power(const ScenarioConfig& scenario) {
  double total = 0.0;
  for (std::uint64_t seed : scenario.seeds) {
    // First fit is not monotone here: extra slice-1 chains crowd out slice 2.
    ExhaustivePolicy policy(scenario.kappa);
    total += run_episode(scenario, seed, policy, std::nullopt, "optimal").mean_power;
  }
  return total / static_cast<double>(scenario.seeds.size());
}

} // namespace

double overprovision_power_ratio(const DimensioningResult& base, int inflated_count, const ScenarioConfig& scenario) {
  if (inflated_count < 1 || base.vnf_count < 1) {
    throw ValidationError("vnf_count", "must be >= 1");
  }
  if (scenario.seeds.empty()) {
    throw ValidationError("seeds", "at least one seed is required");
  }
  const double reference = mean_power(scenario.with_chain_capacity(base.vnf_count));
  if (reference <= 0.0) {
    throw ValidationError("power", "baseline draws no power");
  }
  const double inflated = mean_power(scenario.with_chain_capacity(inflated_count));
  return (inflated - reference) / reference;
}

} // namespace slicearena
