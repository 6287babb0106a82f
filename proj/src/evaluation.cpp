#include "slicearena/evaluation.hpp"

#include <algorithm>
#include <map>

#include "slicearena/errors.hpp"

namespace slicearena {

RunMetrics metrics_from_records(std::span<const MetricRecord> records) {
  RunMetrics m;
  std::map<int, std::size_t> index;
  for (const auto& r : records) {
    if (index.emplace(r.slice_id, m.slice_ids.size()).second) {
      m.slice_ids.push_back(r.slice_id);
    }
  }
  const std::size_t s = m.slice_ids.size();
  m.arrived.assign(s, 0);
  m.admitted.assign(s, 0);
  m.rejected.assign(s, 0);
  m.infeasible.assign(s, 0);
  std::map<std::pair<std::uint64_t, int>, std::pair<double, double>> per_slot; // (seed, slot) -> (power, reward)
  std::map<std::pair<std::uint64_t, int>, double> per_slot_normalized;
  long attacked = 0;
  for (const auto& r : records) {
    const std::size_t j = index[r.slice_id];
    m.arrived[j] += r.arrived;
    m.admitted[j] += r.admitted;
    m.rejected[j] += r.rejected;
    m.infeasible[j] += r.infeasible;
    attacked += r.attacked;
    auto& slot = per_slot[{r.seed, r.slot}];
    slot.first += r.power;
    slot.second += r.reward;
    per_slot_normalized[{r.seed, r.slot}] += r.normalized_power;
  }
  long arrived = 0;
  long admitted = 0;
  m.slice_admission_rate.assign(s, 0.0);
  for (std::size_t j = 0; j < s; ++j) {
    arrived += m.arrived[j];
    admitted += m.admitted[j];
    m.slice_admission_rate[j] =
        m.arrived[j] > 0 ? static_cast<double>(m.admitted[j]) / static_cast<double>(m.arrived[j]) : 0.0;
  }
  m.admission_rate = arrived > 0 ? static_cast<double>(admitted) / static_cast<double>(arrived) : 0.0;
  m.attacked_fraction = arrived > 0 ? static_cast<double>(attacked) / static_cast<double>(arrived) : 0.0;
  m.slots = static_cast<int>(per_slot.size());
  if (m.slots > 0) {
    double power = 0.0, reward = 0.0, normalized = 0.0;
    for (const auto& [key, v] : per_slot) {
      power += v.first;
      reward += v.second;
      normalized += per_slot_normalized[key];
    }
    m.mean_power = power / m.slots;
    m.mean_reward = reward / m.slots;
    m.mean_normalized_power = normalized / m.slots;
  }
  return m;
}

AdmissionDecision FirstFitPolicy::decide(const SlicingEnv& env, const Observation& seen) {
  (void)seen;
  const int slice = *env.current_slice();
  for (int dc = 0; dc < env.scenario().dc_count(); ++dc) {
    if (admission_feasible(env.state(), env.scenario(), slice, dc)) {
      return AdmissionDecision::to_dc(dc);
    }
  }
  return AdmissionDecision::reject();
}

AdmissionDecision GreedyModelPolicy::decide(const SlicingEnv& env, const Observation& seen) {
  (void)env;
  return AdmissionDecision::from_action(greedy_action(policy_forward(params_, seen)));
}

RunMetrics run_episode(const ScenarioConfig& scenario, std::uint64_t seed, DecisionPolicy& policy,
                       const std::optional<AttackConfig>& attack, const std::string& scenario_name,
                       std::vector<MetricRecord>* records) {
  SlicingEnv env(scenario);
  env.reset(seed);
  Rng attack_rng = make_rng(attack ? attack->seed : 0, Stream::adversary, seed);
  const auto s = static_cast<std::size_t>(scenario.slice_count());
  const double normalizer = scenario.power_normalizer();

  std::vector<MetricRecord> local;
  std::vector<int> attacked_in_slot(s, 0);
  int model_in_slot = -1;
  std::size_t emitted = 0;

  // The first record closed after a decision belongs to the decided slot;
  // any further ones are empty slots closed automatically.
  const auto emit = [&]() {
    const auto history = env.history();
    for (; emitted < history.size(); ++emitted) {
      const SlotRecord& rec = history[emitted];
      for (std::size_t j = 0; j < s; ++j) {
        MetricRecord row;
        row.scenario = scenario_name;
        row.seed = seed;
        row.slot = rec.slot;
        row.slice_id = scenario.slices[j].slice_id;
        row.arrived = rec.arrived[j];
        row.admitted = rec.admitted[j];
        row.rejected = rec.rejected[j];
        row.infeasible = rec.infeasible[j];
        row.power = rec.power[j];
        row.normalized_power = normalizer > 0.0 ? rec.power[j] / normalizer : 0.0;
        row.reward = rec.reward[j];
        row.model_index = model_in_slot;
        row.attacked = attacked_in_slot[j];
        local.push_back(std::move(row));
      }
      std::fill(attacked_in_slot.begin(), attacked_in_slot.end(), 0);
      model_in_slot = -1;
    }
  };

  emit();
  int last_slot = -1;
  while (!env.done()) {
    if (env.state().slot_index != last_slot) {
      last_slot = env.state().slot_index;
      policy.begin_slot(env);
      model_in_slot = policy.model_index();
    }
    const int slice = *env.current_slice();
    Observation seen = env.observation();
    if (attack && attack->during_evaluation && std::bernoulli_distribution(attack->attack_probability)(attack_rng)) {
      seen = forge_observation(env.state(), scenario, attack_rng);
      ++attacked_in_slot[static_cast<std::size_t>(slice)];
    }
    env.step(policy.decide(env, seen));
    emit();
  }
  RunMetrics metrics = metrics_from_records(local);
  if (records) {
    records->insert(records->end(), std::make_move_iterator(local.begin()), std::make_move_iterator(local.end()));
  }
  return metrics;
}

} // namespace slicearena
