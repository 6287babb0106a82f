#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slicearena/adversary.hpp"
#include "slicearena/environment.hpp"
#include "slicearena/policy.hpp"

namespace slicearena {

/// One metrics.csv row: one slice in one slot.
struct MetricRecord {
  std::string scenario;
  std::uint64_t seed = 0;
  int slot = 0;
  int slice_id = 0;
  int arrived = 0;
  int admitted = 0;
  int rejected = 0;
  int infeasible = 0;
  double power = 0.0;
  double normalized_power = 0.0;
  double reward = 0.0;
  int model_index = -1; // -1 for non-learning policies
  int attacked = 0;     // decisions of this slice in this slot that saw forged input
};

struct RunMetrics {
  std::vector<int> slice_ids;
  std::vector<long> arrived, admitted, rejected, infeasible; // per slice
  double admission_rate = 0.0;
  std::vector<double> slice_admission_rate;
  double mean_power = 0.0;
  double mean_normalized_power = 0.0;
  double mean_reward = 0.0; // per slot
  double attacked_fraction = 0.0;
  int slots = 0;
};

/// Aggregates records belonging to one run. Counts are integers, so the
/// admission rates are reproduced exactly from a reloaded metrics.csv.
RunMetrics metrics_from_records(std::span<const MetricRecord> records);

class DecisionPolicy {
public:
  virtual ~DecisionPolicy() = default;
  /// Called before the first decision of every slot that has requests.
  virtual void begin_slot(const SlicingEnv& env) { (void)env; }
  /// `seen` is the observation the policy is shown, possibly forged.
  virtual AdmissionDecision decide(const SlicingEnv& env, const Observation& seen) = 0;
  /// Model that served the current slot, -1 when not applicable.
  virtual int model_index() const { return -1; }
};

/// Admit to the first data center that fits; reject otherwise.
class FirstFitPolicy : public DecisionPolicy {
public:
  AdmissionDecision decide(const SlicingEnv& env, const Observation& seen) override;
};

/// Acts with argmax probability of a trained model.
class GreedyModelPolicy : public DecisionPolicy {
public:
  explicit GreedyModelPolicy(const PolicyParams& params, int index = 0) : params_(params), index_(index) {}
  AdmissionDecision decide(const SlicingEnv& env, const Observation& seen) override;
  int model_index() const override { return index_; }

private:
  const PolicyParams& params_;
  int index_;
};

/// Runs one episode of `scenario.horizon` slots from `seed`. When `attack` is
/// set, each decision independently sees a forged observation with
/// probability p_atk (adversary stream seeded from attack->seed and `seed`).
RunMetrics run_episode(const ScenarioConfig& scenario, std::uint64_t seed, DecisionPolicy& policy,
                       const std::optional<AttackConfig>& attack, const std::string& scenario_name,
                       std::vector<MetricRecord>* records = nullptr);

} // namespace slicearena
