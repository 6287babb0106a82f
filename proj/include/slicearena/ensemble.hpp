#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "slicearena/adversary.hpp"
#include "slicearena/evaluation.hpp"
#include "slicearena/ppo.hpp"

namespace slicearena {

struct EnsembleMember {
  std::string config_id;
  PpoConfig config;
  PolicyParams params;
  bool attacked = false;
  double clean_admission_rate = 0.0;
  long attacked_training_steps = 0;
};

struct EnsembleSpec {
  std::vector<EnsembleMember> members;
  std::uint64_t selection_seed = 0;

  int size() const { return static_cast<int>(members.size()); }
  /// Index of the member trained under attack, -1 if none.
  int attacked_member() const;
  void validate() const;
};

/// Compact, parseable description such as "h64x64_b64_g0.99_lr0.0003".
std::string config_id(const PpoConfig& config);
/// Applies the fields encoded by config_id onto `base`.
PpoConfig parse_config_id(const std::string& id, PpoConfig base);

/// Four members crossing hidden width (64/128), minibatch (64/128),
/// discount (0.99/0.995) and learning rate (3e-4/1e-4).
std::vector<PpoConfig> default_member_configs(const PpoConfig& base);

struct EnsembleTrainOptions {
  std::uint64_t seed = 0;           // member k trains with seed (seed, k)
  std::vector<std::uint64_t> gate_seeds{1, 2, 3, 4, 5};
  double quality_ratio = 0.9;       // clean admission >= ratio * best member
};

/// Trains each member on its own environment. With an adversary, exactly one
/// member, drawn uniformly from the attack seed, is trained under attack.
/// Throws QualityGateError for a member below the gate.
EnsembleSpec train_ensemble(const ScenarioConfig& scenario, const std::vector<PpoConfig>& member_configs,
                            const std::optional<AttackConfig>& adversary, const EnsembleTrainOptions& options);

/// train_ensemble without the gate; members carry their clean admission rates.
EnsembleSpec train_ensemble_members(const ScenarioConfig& scenario, const std::vector<PpoConfig>& member_configs,
                                    const std::optional<AttackConfig>& adversary, const EnsembleTrainOptions& options);

/// Every member not trained under attack must reach quality_ratio x the best
/// clean admission rate; throws QualityGateError naming the first that does not.
void apply_quality_gate(const EnsembleSpec& spec, double quality_ratio);

/// Uniform member index for a slot.
int select_model(const EnsembleSpec& spec, int slot_index, Rng& rng);

/// Picks a member uniformly at the start of every slot and acts greedily with it.
class MtdPolicy : public DecisionPolicy {
public:
  MtdPolicy(const EnsembleSpec& spec, std::uint64_t episode_seed);
  void begin_slot(const SlicingEnv& env) override;
  AdmissionDecision decide(const SlicingEnv& env, const Observation& seen) override;
  int model_index() const override { return current_; }

private:
  const EnsembleSpec& spec_;
  Rng rng_;
  int current_ = 0;
};

struct EnsembleEvaluation {
  std::vector<RunMetrics> per_seed;
  double admission_rate = 0.0;        // mean across seeds
  double mean_normalized_power = 0.0;
  double mean_reward = 0.0;
  double target_served_fraction = 0.0; // slots served by attack.target_model_index
};

EnsembleEvaluation evaluate_under_attack(const EnsembleSpec& spec, const ScenarioConfig& scenario,
                                         const std::optional<AttackConfig>& attack,
                                         const std::vector<std::uint64_t>& seeds,
                                         std::vector<MetricRecord>* records = nullptr,
                                         const std::string& scenario_name = "ppo-mtd");

/// Manifest text:
///   SLICE-ARENA-ENSEMBLE v1
///   K
///   checkpoint_path<TAB>config_id<TAB>attacked{0|1}   (K lines)
/// Writes each member's checkpoint as member_<k>.ckpt next to the manifest.
void save_ensemble(const EnsembleSpec& spec, const std::filesystem::path& manifest_path);
EnsembleSpec load_ensemble(const std::filesystem::path& manifest_path, const PpoConfig& base);

} // namespace slicearena
