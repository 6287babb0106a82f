#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "slicearena/ensemble.hpp"
#include "slicearena/errors.hpp"
#include "slicearena/slicing_task.hpp"

namespace slicearena {
namespace {

EnsembleSpec untrained_ensemble(int k, bool identical, std::uint64_t seed = 1) {
  EnsembleSpec spec;
  spec.selection_seed = seed;
  PpoConfig base;
  const auto configs = default_member_configs(base);
  Rng rng(seed);
  PolicyParams shared(8, {16, 16}, 3);
  shared.initialize(rng);
  for (int m = 0; m < k; ++m) {
    EnsembleMember member;
    member.config = configs[static_cast<std::size_t>(m) % configs.size()];
    member.config_id = config_id(member.config);
    member.params = PolicyParams(8, {16, 16}, 3);
    if (identical) {
      member.params = shared;
    } else {
      member.params.initialize(rng);
    }
    member.attacked = m == 1;
    spec.members.push_back(std::move(member));
  }
  return spec;
}

TEST(SelectModel, SingleMemberAlwaysZero) {
  const auto spec = untrained_ensemble(1, false);
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    EXPECT_EQ(select_model(spec, t, rng), 0);
  }
}

TEST(SelectModel, UniformIndependentReproducible) {
  const auto spec = untrained_ensemble(4, false);
  Rng rng(make_rng(7, Stream::selection));
  const int n = 40000;
  std::vector<int> picks(n);
  int counts[4] = {0, 0, 0, 0};
  for (int t = 0; t < n; ++t) {
    picks[static_cast<std::size_t>(t)] = select_model(spec, t, rng);
    ++counts[picks[static_cast<std::size_t>(t)]];
  }
  double chi2 = 0.0;
  for (int c : counts) {
    EXPECT_NEAR(static_cast<double>(c) / n, 0.25, 0.02);
    chi2 += (c - n / 4.0) * (c - n / 4.0) / (n / 4.0);
  }
  EXPECT_LT(chi2, 16.27); // 3 dof, p = 0.001
  double mean = 0.0;
  for (int p : picks) {
    mean += p;
  }
  mean /= n;
  double num = 0.0, den = 0.0;
  for (int t = 0; t < n; ++t) {
    const double d = picks[static_cast<std::size_t>(t)] - mean;
    den += d * d;
    if (t + 1 < n) {
      num += d * (picks[static_cast<std::size_t>(t) + 1] - mean);
    }
  }
  EXPECT_LT(std::abs(num / den), 0.02);
  Rng a(make_rng(7, Stream::selection)), b(make_rng(7, Stream::selection));
  for (int t = 0; t < 100; ++t) {
    EXPECT_EQ(select_model(spec, t, a), select_model(spec, t, b));
  }
}

TEST(ConfigId, RoundTripsDefaultMembers) {
  PpoConfig base;
  const auto configs = default_member_configs(base);
  ASSERT_EQ(configs.size(), 4u);
  EXPECT_EQ(config_id(base), "h64x64_b64_g0.99_lr0.0003");
  std::set<std::string> ids;
  for (const auto& c : configs) {
    const std::string id = config_id(c);
    ids.insert(id);
    const PpoConfig back = parse_config_id(id, base);
    EXPECT_EQ(back.hidden_sizes, c.hidden_sizes);
    EXPECT_EQ(back.minibatch_size, c.minibatch_size);
    EXPECT_EQ(back.discount, c.discount);
    EXPECT_EQ(back.learning_rate, c.learning_rate);
  }
  EXPECT_EQ(ids.size(), 4u);
  EXPECT_THROW(parse_config_id("h64_q3", base), ValidationError);
  EXPECT_THROW(parse_config_id("hx_b", base), ValidationError);
}

TEST(Manifest, RoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "slicearena_manifest_test";
  std::filesystem::remove_all(dir);
  const auto spec = untrained_ensemble(4, false);
  save_ensemble(spec, dir / "manifest.txt");
  std::ifstream in(dir / "manifest.txt");
  std::stringstream text;
  text << in.rdbuf();
  std::ostringstream expected;
  expected << "SLICE-ARENA-ENSEMBLE v1\n4\n";
  for (int k = 0; k < 4; ++k) {
    expected << "member_" << k << ".ckpt\t" << spec.members[static_cast<std::size_t>(k)].config_id << '\t'
             << (k == 1 ? 1 : 0) << '\n';
  }
  EXPECT_EQ(text.str(), expected.str());
  const auto loaded = load_ensemble(dir / "manifest.txt", PpoConfig{});
  ASSERT_EQ(loaded.size(), 4);
  EXPECT_EQ(loaded.attacked_member(), 1);
  for (int k = 0; k < 4; ++k) {
    EXPECT_EQ(loaded.members[static_cast<std::size_t>(k)].params.flatten(),
              spec.members[static_cast<std::size_t>(k)].params.flatten());
    EXPECT_EQ(loaded.members[static_cast<std::size_t>(k)].config_id, spec.members[static_cast<std::size_t>(k)].config_id);
  }
  EXPECT_THROW(load_ensemble(dir / "missing.txt", PpoConfig{}), MissingCheckpoint);
  std::filesystem::remove_all(dir);
}

TEST(MtdPolicy, IdenticalMembersMatchSingleModel) {
  const auto sc = testing::reference_scenario();
  const auto spec = untrained_ensemble(4, true);
  AttackConfig attack;
  attack.seed = 12;
  for (std::uint64_t seed : {1, 2, 3}) {
    std::vector<MetricRecord> single_rows, mtd_rows;
    GreedyModelPolicy single(spec.members[0].params);
    MtdPolicy mtd(spec, seed);
    const auto a = run_episode(sc, seed, single, attack, "x", &single_rows);
    const auto b = run_episode(sc, seed, mtd, attack, "x", &mtd_rows);
    EXPECT_EQ(a.admission_rate, b.admission_rate);
    EXPECT_EQ(a.mean_power, b.mean_power);
    EXPECT_EQ(a.mean_reward, b.mean_reward);
    ASSERT_EQ(single_rows.size(), mtd_rows.size());
    for (std::size_t i = 0; i < single_rows.size(); ++i) {
      EXPECT_EQ(single_rows[i].admitted, mtd_rows[i].admitted);
      EXPECT_EQ(single_rows[i].attacked, mtd_rows[i].attacked);
    }
  }
}

TEST(EvaluateUnderAttack, TargetServesQuarterOfSlots) {
  const auto sc = testing::reference_scenario();
  const auto spec = untrained_ensemble(4, false);
  AttackConfig attack;
  attack.target_model_index = 1;
  const auto eval = evaluate_under_attack(spec, sc, attack, sc.seeds);
  EXPECT_NEAR(eval.target_served_fraction, 0.25, 0.02);
  EXPECT_EQ(eval.per_seed.size(), sc.seeds.size());
}

TEST(TrainEnsemble, ExactlyOneMemberSeesTheAdversary) {
  auto sc = testing::reference_scenario();
  sc.horizon = 20;
  PpoConfig base;
  base.steps_per_update = 256;
  base.minibatch_size = 64;
  base.total_env_steps = 512;
  base.hidden_sizes = {8, 8};
  std::vector<PpoConfig> configs(4, base);
  for (std::size_t k = 0; k < configs.size(); ++k) {
    configs[k].hidden_sizes = {8, 8};
    configs[k].learning_rate = 1e-3 * (k + 1);
  }
  AttackConfig attack;
  attack.seed = 5;
  EnsembleTrainOptions options;
  options.seed = 2;
  options.gate_seeds = {1};
  options.quality_ratio = 0.0;
  const auto spec = train_ensemble(sc, configs, attack, options);
  int attacked = 0;
  for (const auto& m : spec.members) {
    attacked += m.attacked_training_steps > 0;
    EXPECT_EQ(m.attacked, m.attacked_training_steps > 0);
  }
  EXPECT_EQ(attacked, 1);
  EXPECT_GE(spec.attacked_member(), 0);
}

TEST(TrainEnsemble, SingleCleanMemberEqualsPlainTraining) {
  auto sc = testing::reference_scenario();
  sc.horizon = 20;
  PpoConfig c;
  c.steps_per_update = 256;
  c.minibatch_size = 64;
  c.total_env_steps = 512;
  c.hidden_sizes = {8};
  EnsembleTrainOptions options;
  options.seed = 4;
  options.gate_seeds = {1};
  const auto spec = train_ensemble(sc, {c}, std::nullopt, options);
  PpoConfig plain = c;
  plain.seed = derive_seed(options.seed, 0);
  const auto direct = train([&] { return std::make_unique<SlicingTask>(sc); }, plain);
  EXPECT_EQ(spec.members[0].params.flatten(), direct.params.flatten());
}

TEST(TrainEnsemble, QualityGateRejectsMembersBelowRatio) {
  auto sc = testing::reference_scenario();
  sc.horizon = 20;
  PpoConfig c;
  c.steps_per_update = 256;
  c.minibatch_size = 64;
  c.total_env_steps = 256;
  c.hidden_sizes = {8};
  EnsembleTrainOptions options;
  options.gate_seeds = {1, 2};
  // No member can reach twice the best rate unless every rate is zero.
  options.quality_ratio = 2.0;
  bool thrown = false;
  try {
    train_ensemble(sc, {c, c}, std::nullopt, options);
  } catch (const QualityGateError& e) {
    thrown = true;
    EXPECT_EQ(e.member(), 0u);
  }
  options.quality_ratio = 0.0;
  const auto spec = train_ensemble(sc, {c, c}, std::nullopt, options);
  const bool all_zero = spec.members[0].clean_admission_rate == 0.0 && spec.members[1].clean_admission_rate == 0.0;
  EXPECT_NE(thrown, all_zero);
}

} // namespace
} // namespace slicearena
