#pragma once

#include <cstdint>
#include <random>

#include "slicearena/environment.hpp"
#include "slicearena/rng.hpp"

namespace slicearena {

/// Black-box forgery of what the agent sees: the observation and the reward.
/// Nothing here touches model parameters.
struct AttackConfig {
  double attack_probability = 0.25; // per decision step
  int target_model_index = 0;       // ensemble member whose training is poisoned
  std::uint64_t seed = 0;
  bool during_training = true;
  bool during_evaluation = true;

  void validate() const;
};

/// Default randomness source for forgery.
class RngSampler {
public:
  explicit RngSampler(Rng& rng) : rng_(rng) {}
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }
  int poisson(double mean) { return mean > 0.0 ? std::poisson_distribution<int>(mean)(rng_) : 0; }

private:
  Rng& rng_;
};

/// A forged observation in the true layout: each remaining-resource entry is
/// an independent U[0,1] draw and each pending entry is a fresh
/// Poisson(arrival_mean_s) count, normalized like the real ones.
template <typename Sampler>
Observation forge_observation(const ClusterState& true_state, const ScenarioConfig& scenario, Sampler& sampler) {
  const int n = scenario.dc_count();
  const int s = scenario.slice_count();
  Observation forged(observation_size(n, s));
  for (int i = 0; i < 3 * n; ++i) {
    forged(i) = sampler.uniform();
  }
  for (int j = 0; j < s; ++j) {
    forged(3 * n + j) = std::min(static_cast<double>(sampler.poisson(scenario.slices[j].arrival_mean)) / kPendingCap, 1.0);
  }
  (void)true_state; // only the shape of the true state is used
  return forged;
}

inline Observation forge_observation(const ClusterState& true_state, const ScenarioConfig& scenario, Rng& rng) {
  RngSampler sampler(rng);
  return forge_observation(true_state, scenario, sampler);
}

/// Power the forged picture implies: the normalizer times the mean forged
/// utilization (1 - mean remaining fraction) over data centers.
double forged_power_estimate(const Observation& forged, const ScenarioConfig& scenario);

/// The reward the decision would have earned had the forged picture been
/// real: the chosen data center's feasibility is judged against the forged
/// remaining fractions, and a slot-closing step pays kappa times the admitted
/// priority minus the forged power estimate.
double forged_reward(const Observation& forged, int action, const StepOutcome& true_outcome,
                     const ScenarioConfig& scenario);

struct AttackResult {
  Observation observation;
  double reward = 0.0;
  bool attacked = false;
};

/// With probability p_atk replaces (true observation, true reward) by
/// (forged observation, forged reward); otherwise passes them through.
AttackResult apply_attack(const Observation& true_observation, double true_reward, const ClusterState& true_state,
                          int action, const StepOutcome& true_outcome, const ScenarioConfig& scenario,
                          const AttackConfig& config, Rng& rng);

} // namespace slicearena
