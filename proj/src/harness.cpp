#include "slicearena/harness.hpp"

#include <cmath>
#include <memory>

#include "slicearena/baselines.hpp"
#include "slicearena/errors.hpp"
#include "slicearena/metrics_io.hpp"
#include "slicearena/slicing_task.hpp"

namespace slicearena {

const char* to_string(ScenarioName name) {
  switch (name) {
  case ScenarioName::optimal:
    return "optimal";
  case ScenarioName::ppo_clean:
    return "ppo-clean";
  case ScenarioName::ppo_attacked:
    return "ppo-attacked";
  case ScenarioName::ppo_mtd:
    return "ppo-mtd";
  case ScenarioName::random:
    return "random";
  }
  return "?";
}

ScenarioName parse_scenario_name(std::string_view text) {
  for (ScenarioName name : kAllScenarios) {
    if (text == to_string(name)) {
      return name;
    }
  }
  throw ValidationError("scenario", "unknown scenario '" + std::string(text) + "'");
}

PpoConfig default_ppo_config(const ScenarioConfig& scenario, std::uint64_t seed) {
  PpoConfig config;
  config.seed = seed;
  config.reward_scale = scenario.penalty > 0.0 ? 1.0 / scenario.penalty : 1.0;
  return config;
}

TrainResult train_model(const ScenarioConfig& scenario, const PpoConfig& config,
                        const std::optional<AttackConfig>& attack) {
  std::optional<AttackConfig> poison;
  if (attack && attack->during_training) {
    poison = attack;
  }
  return train([&] { return std::make_unique<SlicingTask>(scenario, poison); }, config);
}

namespace {

void mean_std(const std::vector<double>& xs, double& mean, double& sd) {
  mean = 0.0;
  sd = 0.0;
  if (xs.empty()) {
    return;
  }
  for (double x : xs) {
    mean += x;
  }
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) {
    return;
  }
  double ss = 0.0;
  for (double x : xs) {
    ss += (x - mean) * (x - mean);
  }
  sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

template <typename T>
const T& require_artifact(const std::optional<T>& artifact, ScenarioName name) {
  if (!artifact) {
    throw MissingCheckpoint(std::string("scenario ") + to_string(name) + " needs a trained model");
  }
  return *artifact;
}

} // namespace

ScenarioRun run_scenario(ScenarioName name, const ScenarioConfig& scenario, std::span<const std::uint64_t> seeds,
                         const ScenarioArtifacts& artifacts) {
  ScenarioRun run;
  run.name = name;
  run.arrival_mean = scenario.slices.empty() ? 0.0 : scenario.slices.front().arrival_mean;
  const std::string label = to_string(name);
  std::optional<AttackConfig> attack;
  if (name == ScenarioName::ppo_attacked || name == ScenarioName::ppo_mtd) {
    attack = artifacts.attack;
    attack->validate();
  }
  for (std::uint64_t seed : seeds) {
    std::unique_ptr<DecisionPolicy> policy;
    switch (name) {
    case ScenarioName::optimal:
      policy = std::make_unique<ExhaustivePolicy>(scenario.kappa);
      break;
    case ScenarioName::ppo_clean:
      policy = std::make_unique<GreedyModelPolicy>(require_artifact(artifacts.clean, name));
      break;
    case ScenarioName::ppo_attacked:
      policy = std::make_unique<GreedyModelPolicy>(require_artifact(artifacts.attacked, name));
      break;
    case ScenarioName::ppo_mtd:
      policy = std::make_unique<MtdPolicy>(require_artifact(artifacts.ensemble, name), seed);
      break;
    case ScenarioName::random:
      policy = std::make_unique<RandomPolicy>(seed);
      break;
    }
    RunMetrics metrics = run_episode(scenario, seed, *policy, attack, label, &run.records);
    run.per_seed.push_back({seed, std::move(metrics)});
  }
  std::vector<double> admission, power, reward;
  double attacked = 0.0;
  for (const auto& s : run.per_seed) {
    admission.push_back(s.metrics.admission_rate);
    power.push_back(s.metrics.mean_normalized_power);
    reward.push_back(s.metrics.mean_reward);
    attacked += s.metrics.attacked_fraction;
  }
  mean_std(admission, run.admission_rate_mean, run.admission_rate_std);
  mean_std(power, run.normalized_power_mean, run.normalized_power_std);
  mean_std(reward, run.reward_mean, run.reward_std);
  run.attacked_fraction_mean = run.per_seed.empty() ? 0.0 : attacked / static_cast<double>(run.per_seed.size());
  return run;
}

std::vector<ScenarioRun> sweep(const ScenarioConfig& scenario, std::span<const double> arrival_means,
                               std::span<const ScenarioName> names, std::span<const std::uint64_t> seeds,
                               const ScenarioArtifacts& artifacts) {
  std::vector<ScenarioRun> runs;
  for (double mean : arrival_means) {
    const ScenarioConfig point = scenario.with_arrival_mean(mean);
    for (ScenarioName name : names) {
      runs.push_back(run_scenario(name, point, seeds, artifacts));
    }
  }
  return runs;
}

void write_metrics(std::span<const ScenarioRun> runs, const std::filesystem::path& out_dir) {
  {
    auto out = open_output(out_dir / "metrics.csv");
    out << kMetricsHeader << '\n';
    for (const auto& run : runs) {
      write_metric_rows(out, run.records);
    }
    if (!out) {
      throw IoError("write failed: metrics.csv");
    }
  }
  auto out = open_output(out_dir / "summary.csv");
  out << "scenario,arrival_mean,seed,admission_rate,normalized_power,reward,attacked_fraction\n";
  for (const auto& run : runs) {
    const std::string head = std::string(to_string(run.name)) + ',' + format_decimal(run.arrival_mean) + ',';
    for (const auto& s : run.per_seed) {
      out << head << s.seed << ',' << format_decimal(s.metrics.admission_rate) << ','
          << format_decimal(s.metrics.mean_normalized_power) << ',' << format_decimal(s.metrics.mean_reward) << ','
          << format_decimal(s.metrics.attacked_fraction) << '\n';
    }
    out << head << "mean," << format_decimal(run.admission_rate_mean) << ','
        << format_decimal(run.normalized_power_mean) << ',' << format_decimal(run.reward_mean) << ','
        << format_decimal(run.attacked_fraction_mean) << '\n';
    out << head << "std," << format_decimal(run.admission_rate_std) << ','
        << format_decimal(run.normalized_power_std) << ',' << format_decimal(run.reward_std) << ",0\n";
  }
  if (!out) {
    throw IoError("write failed: summary.csv");
  }
}

void write_sweep(std::span<const ScenarioRun> runs, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "scenario,arrival_mean,admission_rate_mean,admission_rate_std,normalized_power_mean,"
         "normalized_power_std,reward_mean,reward_std\n";
  for (const auto& run : runs) {
    out << to_string(run.name) << ',' << format_decimal(run.arrival_mean) << ','
        << format_decimal(run.admission_rate_mean) << ',' << format_decimal(run.admission_rate_std) << ','
        << format_decimal(run.normalized_power_mean) << ',' << format_decimal(run.normalized_power_std) << ','
        << format_decimal(run.reward_mean) << ',' << format_decimal(run.reward_std) << '\n';
  }
  if (!out) {
    throw IoError("write failed: " + path.string());
  }
}

void write_learning_curve(std::span<const LearningCurvePoint> curve, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "update_index,env_steps,mean_episode_reward,clip_fraction,entropy\n";
  for (const auto& p : curve) {
    out << p.update_index << ',' << p.env_steps << ',' << format_decimal(p.mean_episode_reward) << ','
        << format_decimal(p.clip_fraction) << ',' << format_decimal(p.entropy) << '\n';
  }
  if (!out) {
    throw IoError("write failed: " + path.string());
  }
}

} // namespace slicearena
