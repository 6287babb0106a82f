#include "slicearena/adversary.hpp"

#include "slicearena/errors.hpp"

namespace slicearena {

void AttackConfig::validate() const {
  if (!(attack_probability >= 0.0 && attack_probability <= 1.0)) {
    throw ValidationError("attack_probability", "must lie in [0, 1]");
  }
  if (target_model_index < 0) {
    throw ValidationError("target_model_index", "must be non-negative");
  }
}

double forged_power_estimate(const Observation& forged, const ScenarioConfig& scenario) {
  const int n = scenario.dc_count();
  double utilization = 0.0;
  for (int i = 0; i < n; ++i) {
    utilization += 1.0 - forged.segment<3>(3 * i).mean();
  }
  return scenario.power_normalizer() * utilization / n;
}

double forged_reward(const Observation& forged, int action, const StepOutcome& true_outcome,
                     const ScenarioConfig& scenario) {
  const auto& slice = scenario.slices.at(static_cast<std::size_t>(true_outcome.decided_slice));
  double reward = 0.0;
  bool forged_admit = false;
  if (action != 0) {
    const int dc = action - 1;
    const ResourceVector need = slice.per_request_demand / scenario.data_centers.at(static_cast<std::size_t>(dc)).capacity;
    const ResourceVector seen = forged.segment<3>(3 * dc).array();
    if (fits(seen, need)) {
      forged_admit = true;
    } else {
      reward -= scenario.penalty;
    }
  }
  if (true_outcome.slot_closed) {
    double priority = true_outcome.slot_admitted_priority;
    if (true_outcome.admitted) {
      priority -= slice.priority;
    }
    if (forged_admit) {
      priority += slice.priority;
    }
    reward += scenario.kappa * priority - forged_power_estimate(forged, scenario);
  }
  return reward;
}

AttackResult apply_attack(const Observation& true_observation, double true_reward, const ClusterState& true_state,
                          int action, const StepOutcome& true_outcome, const ScenarioConfig& scenario,
                          const AttackConfig& config, Rng& rng) {
  config.validate();
  const bool attacked = std::bernoulli_distribution(config.attack_probability)(rng);
  if (!attacked) {
    return {true_observation, true_reward, false};
  }
  AttackResult result;
  result.observation = forge_observation(true_state, scenario, rng);
  result.reward = forged_reward(result.observation, action, true_outcome, scenario);
  result.attacked = true;
  return result;
}

} // namespace slicearena
