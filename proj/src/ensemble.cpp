#include "slicearena/ensemble.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <future>
#include <sstream>

#include "slicearena/errors.hpp"
#include "slicearena/metrics_io.hpp"
#include "slicearena/slicing_task.hpp"

namespace slicearena {

int EnsembleSpec::attacked_member() const {
  for (std::size_t k = 0; k < members.size(); ++k) {
    if (members[k].attacked) {
      return static_cast<int>(k);
    }
  }
  return -1;
}

void EnsembleSpec::validate() const {
  if (members.empty()) {
    throw ValidationError("members", "ensemble is empty");
  }
  const auto& first = members.front().params;
  for (const auto& m : members) {
    if (m.params.observation_size() != first.observation_size() || m.params.action_count() != first.action_count()) {
      throw DimensionMismatch("ensemble members disagree on observation or action size");
    }
  }
  if (std::count_if(members.begin(), members.end(), [](const EnsembleMember& m) { return m.attacked; }) > 1) {
    throw ValidationError("attacked", "at most one member is trained under attack");
  }
}

namespace {

std::string shortest(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", value);
  return buf;
}

} // namespace

std::string config_id(const PpoConfig& config) {
  std::string id = "h";
  for (std::size_t i = 0; i < config.hidden_sizes.size(); ++i) {
    id += (i ? "x" : "") + std::to_string(config.hidden_sizes[i]);
  }
  id += "_b" + std::to_string(config.minibatch_size);
  id += "_g" + shortest(config.discount);
  id += "_lr" + shortest(config.learning_rate);
  return id;
}

PpoConfig parse_config_id(const std::string& id, PpoConfig base) {
  std::istringstream in(id);
  std::string part;
  try {
    while (std::getline(in, part, '_')) {
      if (part.rfind("lr", 0) == 0) {
        base.learning_rate = std::stod(part.substr(2));
      } else if (part.rfind('h', 0) == 0) {
        base.hidden_sizes.clear();
        std::istringstream widths(part.substr(1));
        std::string w;
        while (std::getline(widths, w, 'x')) {
          base.hidden_sizes.push_back(std::stoi(w));
        }
      } else if (part.rfind('b', 0) == 0) {
        base.minibatch_size = std::stoi(part.substr(1));
      } else if (part.rfind('g', 0) == 0) {
        base.discount = std::stod(part.substr(1));
      } else {
        throw ValidationError("config_id", "unknown component '" + part + "'");
      }
    }
  } catch (const std::logic_error&) {
    throw ValidationError("config_id", "malformed '" + id + "'");
  }
  base.validate();
  return base;
}

std::vector<PpoConfig> default_member_configs(const PpoConfig& base) {
  struct Variant {
    int width, minibatch;
    double discount, lr;
  };
  const Variant variants[] = {{64, 64, 0.99, 3e-4}, {128, 64, 0.995, 3e-4}, {64, 128, 0.995, 1e-4},
                              {128, 128, 0.99, 1e-4}};
  std::vector<PpoConfig> out;
  for (const auto& v : variants) {
    PpoConfig c = base;
    c.hidden_sizes = {v.width, v.width};
    c.minibatch_size = v.minibatch;
    c.discount = v.discount;
    c.learning_rate = v.lr;
    out.push_back(c);
  }
  return out;
}

EnsembleSpec train_ensemble_members(const ScenarioConfig& scenario, const std::vector<PpoConfig>& member_configs,
                                    const std::optional<AttackConfig>& adversary,
                                    const EnsembleTrainOptions& options) {
  if (member_configs.empty()) {
    throw ValidationError("members", "ensemble is empty");
  }
  const int k = static_cast<int>(member_configs.size());
  int attacked = -1;
  if (adversary) {
    adversary->validate();
    Rng pick = make_rng(adversary->seed, Stream::selection);
    attacked = std::uniform_int_distribution<int>(0, k - 1)(pick);
  }

  std::vector<std::future<TrainResult>> jobs;
  for (int m = 0; m < k; ++m) {
    PpoConfig config = member_configs[static_cast<std::size_t>(m)];
    config.seed = derive_seed(options.seed, static_cast<std::uint64_t>(m));
    std::optional<AttackConfig> attack;
    if (m == attacked && adversary->during_training) {
      attack = adversary;
      attack->target_model_index = m;
    }
    jobs.push_back(std::async(std::launch::async, [&scenario, config, attack] {
      return train([&] { return std::make_unique<SlicingTask>(scenario, attack); }, config);
    }));
  }

  EnsembleSpec spec;
  spec.selection_seed = derive_seed(options.seed, 0xE5E5u);
  for (int m = 0; m < k; ++m) {
    TrainResult result = jobs[static_cast<std::size_t>(m)].get();
    EnsembleMember member;
    member.config = member_configs[static_cast<std::size_t>(m)];
    member.config_id = config_id(member.config);
    member.params = std::move(result.params);
    member.attacked = m == attacked;
    member.attacked_training_steps = result.attacked_steps;
    double rate = 0.0;
    for (std::uint64_t seed : options.gate_seeds) {
      GreedyModelPolicy policy(member.params, m);
      rate += run_episode(scenario, seed, policy, std::nullopt, "gate").admission_rate;
    }
    member.clean_admission_rate = options.gate_seeds.empty() ? 0.0 : rate / options.gate_seeds.size();
    spec.members.push_back(std::move(member));
  }

  spec.validate();
  return spec;
}

void apply_quality_gate(const EnsembleSpec& spec, double quality_ratio) {
  // The poisoned member is the adversary's doing; the gate screens the rest.
  double best = 0.0;
  for (const auto& m : spec.members) {
    best = std::max(best, m.clean_admission_rate);
  }
  for (std::size_t m = 0; m < spec.members.size(); ++m) {
    const auto& member = spec.members[m];
    if (!member.attacked && member.clean_admission_rate < quality_ratio * best) {
      throw QualityGateError(m, "clean admission " + format_decimal(member.clean_admission_rate) +
                                    " is below " + format_decimal(quality_ratio) + " x best " +
                                    format_decimal(best));
    }
  }
}

EnsembleSpec train_ensemble(const ScenarioConfig& scenario, const std::vector<PpoConfig>& member_configs,
                            const std::optional<AttackConfig>& adversary, const EnsembleTrainOptions& options) {
  EnsembleSpec spec = train_ensemble_members(scenario, member_configs, adversary, options);
  apply_quality_gate(spec, options.quality_ratio);
  return spec;
}

int select_model(const EnsembleSpec& spec, int slot_index, Rng& rng) {
  (void)slot_index;
  return std::uniform_int_distribution<int>(0, spec.size() - 1)(rng);
}

MtdPolicy::MtdPolicy(const EnsembleSpec& spec, std::uint64_t episode_seed)
    : spec_(spec), rng_(make_rng(spec.selection_seed, Stream::selection, episode_seed)) {
  spec_.validate();
}

void MtdPolicy::begin_slot(const SlicingEnv& env) { current_ = select_model(spec_, env.state().slot_index, rng_); }

AdmissionDecision MtdPolicy::decide(const SlicingEnv& env, const Observation& seen) {
  (void)env;
  const auto& params = spec_.members[static_cast<std::size_t>(current_)].params;
  return AdmissionDecision::from_action(greedy_action(policy_forward(params, seen)));
}

EnsembleEvaluation evaluate_under_attack(const EnsembleSpec& spec, const ScenarioConfig& scenario,
                                         const std::optional<AttackConfig>& attack,
                                         const std::vector<std::uint64_t>& seeds, std::vector<MetricRecord>* records,
                                         const std::string& scenario_name) {
  EnsembleEvaluation out;
  int target = spec.attacked_member();
  if (target < 0 && attack) {
    target = attack->target_model_index;
  }
  long served = 0;
  long target_served = 0;
  for (std::uint64_t seed : seeds) {
    MtdPolicy policy(spec, seed);
    std::vector<MetricRecord> local;
    RunMetrics metrics = run_episode(scenario, seed, policy, attack, scenario_name, &local);
    const int first_slice = scenario.slices.front().slice_id;
    for (const auto& r : local) {
      if (r.slice_id == first_slice && r.model_index >= 0) {
        ++served;
        target_served += r.model_index == target;
      }
    }
    out.admission_rate += metrics.admission_rate;
    out.mean_normalized_power += metrics.mean_normalized_power;
    out.mean_reward += metrics.mean_reward;
    out.per_seed.push_back(std::move(metrics));
    if (records) {
      records->insert(records->end(), local.begin(), local.end());
    }
  }
  if (!seeds.empty()) {
    const double n = static_cast<double>(seeds.size());
    out.admission_rate /= n;
    out.mean_normalized_power /= n;
    out.mean_reward /= n;
  }
  out.target_served_fraction = served > 0 ? static_cast<double>(target_served) / served : 0.0;
  return out;
}

void save_ensemble(const EnsembleSpec& spec, const std::filesystem::path& manifest_path) {
  spec.validate();
  const auto dir = manifest_path.parent_path();
  auto out = open_output(manifest_path);
  out << "SLICE-ARENA-ENSEMBLE v1\n" << spec.size() << '\n';
  for (int k = 0; k < spec.size(); ++k) {
    const auto& m = spec.members[static_cast<std::size_t>(k)];
    const std::string file = "member_" + std::to_string(k) + ".ckpt";
    save_checkpoint(m.params, dir / file);
    out << file << '\t' << m.config_id << '\t' << (m.attacked ? 1 : 0) << '\n';
  }
  if (!out) {
    throw IoError("write failed: " + manifest_path.string());
  }
}

EnsembleSpec load_ensemble(const std::filesystem::path& manifest_path, const PpoConfig& base) {
  if (!std::filesystem::exists(manifest_path)) {
    throw MissingCheckpoint("no ensemble manifest at " + manifest_path.string());
  }
  std::ifstream in(manifest_path, std::ios::binary);
  std::string line;
  if (!std::getline(in, line) || line != "SLICE-ARENA-ENSEMBLE v1") {
    throw ParseError(1, "bad ensemble manifest header");
  }
  if (!std::getline(in, line)) {
    throw ParseError(2, "missing member count");
  }
  int k = 0;
  try {
    k = std::stoi(line);
  } catch (const std::logic_error&) {
    throw ParseError(2, "bad member count");
  }
  if (k < 1) {
    throw ParseError(2, "member count must be positive");
  }
  EnsembleSpec spec;
  for (int i = 0; i < k; ++i) {
    const int number = 3 + i;
    if (!std::getline(in, line)) {
      throw ParseError(number, "missing member line");
    }
    std::istringstream fields(line);
    std::string path, id, flag;
    if (!std::getline(fields, path, '\t') || !std::getline(fields, id, '\t') || !std::getline(fields, flag) ||
        (flag != "0" && flag != "1")) {
      throw ParseError(number, "expected checkpoint_path<TAB>config_id<TAB>attacked");
    }
    std::filesystem::path ckpt(path);
    if (ckpt.is_relative()) {
      ckpt = manifest_path.parent_path() / ckpt;
    }
    EnsembleMember m;
    m.config_id = id;
    m.config = parse_config_id(id, base);
    m.params = load_checkpoint(ckpt);
    m.attacked = flag == "1";
    spec.members.push_back(std::move(m));
  }
  spec.selection_seed = derive_seed(base.seed, 0xE5E5u);
  spec.validate();
  return spec;
}

} // namespace slicearena
