#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slicearena/adversary.hpp"
#include "slicearena/ensemble.hpp"
#include "slicearena/evaluation.hpp"
#include "slicearena/ppo.hpp"

namespace slicearena {

enum class ScenarioName { optimal, ppo_clean, ppo_attacked, ppo_mtd, random };

inline constexpr ScenarioName kAllScenarios[] = {ScenarioName::optimal, ScenarioName::ppo_clean,
                                                 ScenarioName::ppo_attacked, ScenarioName::ppo_mtd,
                                                 ScenarioName::random};

const char* to_string(ScenarioName name);
ScenarioName parse_scenario_name(std::string_view text); // ValidationError on unknown names

/// Trained models the ppo-* scenarios evaluate.
struct ScenarioArtifacts {
  std::optional<PolicyParams> clean;
  std::optional<PolicyParams> attacked;
  std::optional<EnsembleSpec> ensemble;
  AttackConfig attack;
};

struct SeedSummary {
  std::uint64_t seed = 0;
  RunMetrics metrics;
};

struct ScenarioRun {
  ScenarioName name = ScenarioName::optimal;
  double arrival_mean = 0.0;
  std::vector<SeedSummary> per_seed;
  std::vector<MetricRecord> records;

  // mean and sample standard deviation across seeds
  double admission_rate_mean = 0.0, admission_rate_std = 0.0;
  double normalized_power_mean = 0.0, normalized_power_std = 0.0;
  double reward_mean = 0.0, reward_std = 0.0;
  double attacked_fraction_mean = 0.0;
};

/// PPO defaults for a scenario: rewards scaled by 1 / penalty.
PpoConfig default_ppo_config(const ScenarioConfig& scenario, std::uint64_t seed);

/// Trains one PPO model on the scenario, optionally under attack.
TrainResult train_model(const ScenarioConfig& scenario, const PpoConfig& config,
                        const std::optional<AttackConfig>& attack);

/// Executes one of the five scenarios over the seeds. Every scenario consumes
/// the same environment seeds. Throws MissingCheckpoint when a ppo-* scenario
/// lacks its model.
ScenarioRun run_scenario(ScenarioName name, const ScenarioConfig& scenario, std::span<const std::uint64_t> seeds,
                         const ScenarioArtifacts& artifacts);

/// Reruns the scenarios at every arrival mean, reusing the artifacts.
std::vector<ScenarioRun> sweep(const ScenarioConfig& scenario, std::span<const double> arrival_means,
                               std::span<const ScenarioName> names, std::span<const std::uint64_t> seeds,
                               const ScenarioArtifacts& artifacts);

/// metrics.csv (all records of all runs) and summary.csv (per seed, then mean
/// and std rows per run) under `out_dir`.
void write_metrics(std::span<const ScenarioRun> runs, const std::filesystem::path& out_dir);

/// One row per (scenario, arrival mean).
void write_sweep(std::span<const ScenarioRun> runs, const std::filesystem::path& path);

void write_learning_curve(std::span<const LearningCurvePoint> curve, const std::filesystem::path& path);

} // namespace slicearena
