#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "fixtures.hpp"
#include "slicearena/errors.hpp"
#include "slicearena/ppo.hpp"
#include "slicearena/slicing_task.hpp"

namespace slicearena {
namespace {

Trajectory make_trajectory(std::vector<double> rewards, std::vector<double> values, double bootstrap,
                           std::vector<bool> dones) {
  Trajectory t;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    t.observations.push_back(Eigen::VectorXd::Zero(1));
    t.actions.push_back(0);
    t.log_prob_old.push_back(-1.0);
  }
  t.rewards = std::move(rewards);
  t.value_old = std::move(values);
  t.dones = std::move(dones);
  t.bootstrap_value = bootstrap;
  return t;
}

TEST(ComputeAdvantages, ZeroDiscountIsRewardMinusValue) {
  const auto t = make_trajectory({1.0, -2.0, 0.5}, {0.2, 0.3, -0.4}, 9.0, {false, false, false});
  const auto est = compute_advantages(t, 0.0, 0.95);
  EXPECT_DOUBLE_EQ(est.raw(0), 0.8);
  EXPECT_DOUBLE_EQ(est.raw(1), -2.3);
  EXPECT_DOUBLE_EQ(est.raw(2), 0.9);
}

TEST(ComputeAdvantages, SingleTerminalStep) {
  const auto t = make_trajectory({3.0}, {1.25}, 100.0, {true});
  const auto est = compute_advantages(t, 0.99, 0.95);
  EXPECT_DOUBLE_EQ(est.raw(0), 1.75);
  EXPECT_DOUBLE_EQ(est.returns(0), 3.0);
}

TEST(ComputeAdvantages, ThreeStepHandRecursion) {
  // delta = 1 + 0.9 * 0.5 - 0.5 = 0.95 at every step, gamma * lambda = 0.855.
  const auto t = make_trajectory({1, 1, 1}, {0.5, 0.5, 0.5}, 0.5, {false, false, false});
  const auto est = compute_advantages(t, 0.9, 0.95);
  EXPECT_NEAR(est.raw(2), 0.95, 1e-12);
  EXPECT_NEAR(est.raw(1), 0.95 + 0.855 * 0.95, 1e-12);
  EXPECT_NEAR(est.raw(0), 0.95 + 0.855 * (0.95 + 0.855 * 0.95), 1e-12);
  EXPECT_NEAR(est.raw(0), 2.45672375, 1e-12);
  EXPECT_NEAR(est.raw(1), 1.76225, 1e-12);
}

TEST(ComputeAdvantages, DoneCutsBootstrap) {
  const auto t = make_trajectory({1, 1}, {0.5, 0.5}, 10.0, {true, false});
  const auto est = compute_advantages(t, 0.9, 0.95);
  EXPECT_DOUBLE_EQ(est.raw(0), 0.5);
  EXPECT_DOUBLE_EQ(est.raw(1), 1.0 + 9.0 - 0.5);
}

TEST(ComputeAdvantages, NormalizedBatchStatistics) {
  Rng rng(3);
  std::normal_distribution<double> normal(2.0, 5.0);
  std::vector<double> r, v;
  std::vector<bool> d;
  for (int i = 0; i < 300; ++i) {
    r.push_back(normal(rng));
    v.push_back(normal(rng));
    d.push_back(i % 37 == 0);
  }
  const auto est = compute_advantages(make_trajectory(r, v, 0.3, d), 0.99, 0.95);
  const double mean = est.normalized.mean();
  const double sd = std::sqrt((est.normalized.array() - mean).square().mean());
  EXPECT_LT(std::abs(mean), 1e-9);
  EXPECT_LT(std::abs(sd - 1.0), 1e-6);
}

TEST(ClippedSurrogate, Examples) {
  EXPECT_DOUBLE_EQ(clipped_surrogate(1.0, 0.7, 0.2), 0.7);
  EXPECT_DOUBLE_EQ(clipped_surrogate(1.5, 1.0, 0.2), 1.2);
  EXPECT_DOUBLE_EQ(clipped_surrogate(0.5, -1.0, 0.2), -0.8);
  Eigen::VectorXd lp_new(2), lp_old(2), adv(2);
  lp_new << std::log(1.5), 0.0;
  lp_old << 0.0, 0.0;
  adv << 1.0, -2.0;
  EXPECT_DOUBLE_EQ(clipped_surrogate_loss(lp_new, lp_old, adv, 0.2), -(1.2 - 2.0) / 2);
}

TEST(ClippedSurrogate, NeverExceedsUnclippedOrBounds) {
  Rng rng(8);
  std::uniform_real_distribution<double> ratio(0.0, 3.0), adv(-5.0, 5.0);
  for (int k = 0; k < 10000; ++k) {
    const double r = ratio(rng), a = adv(rng);
    const double obj = clipped_surrogate(r, a, 0.2);
    ASSERT_LE(obj, r * a + 1e-12);
    ASSERT_LE(obj, std::max((1.0 - 0.2) * a, (1.0 + 0.2) * a) + 1e-12);
  }
}

TEST(PpoMinibatchLoss, GradientMatchesFiniteDifferences) {
  PpoConfig config;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    std::normal_distribution<double> normal;
    PolicyParams p(3, {2}, 3);
    p.initialize(rng);
    Eigen::VectorXd theta = p.flatten();
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      theta(i) += 0.5 * normal(rng);
    }
    p.read_flat(theta);
    const int batch = 6;
    Eigen::MatrixXd obs(3, batch);
    std::vector<int> actions;
    Eigen::VectorXd adv(batch), ret(batch);
    for (int j = 0; j < batch; ++j) {
      obs.col(j) << normal(rng), normal(rng), normal(rng);
      actions.push_back(j % 3);
      adv(j) = normal(rng);
      ret(j) = normal(rng);
    }
    // Old log-probabilities away from the clip kinks: half inside, half far outside.
    const auto eval = evaluate_batch(p, obs);
    Eigen::VectorXd old(batch);
    for (int j = 0; j < batch; ++j) {
      old(j) = eval.log_probabilities(actions[static_cast<std::size_t>(j)], j) + (j % 2 ? 0.05 : 0.7);
    }
    const auto loss = ppo_minibatch_loss(p, obs, actions, old, adv, ret, config);
    const double h = 1e-5;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      PolicyParams up = p, down = p;
      Eigen::VectorXd tu = theta, td = theta;
      tu(i) += h;
      td(i) -= h;
      up.read_flat(tu);
      down.read_flat(td);
      const double fd = (ppo_minibatch_loss(up, obs, actions, old, adv, ret, config).loss -
                         ppo_minibatch_loss(down, obs, actions, old, adv, ret, config).loss) /
                        (2 * h);
      const double diff = std::abs(fd - loss.gradient(i));
      const double scale = std::max({std::abs(fd), std::abs(loss.gradient(i)), 1e-12});
      EXPECT_TRUE(diff < 1e-9 || diff / scale < 1e-4)
          << "seed " << seed << " coordinate " << i << ": analytic " << loss.gradient(i) << " fd " << fd;
    }
  }
}

/// Two arms, reward 1 for arm 0; every step ends the episode.
class BanditTask : public Task {
public:
  Observation reset(std::uint64_t) override { return Eigen::VectorXd::Ones(1); }
  Transition step(int action) override { return {Eigen::VectorXd::Ones(1), action == 0 ? 1.0 : 0.0, true, false}; }
  int observation_size() const override { return 1; }
  int action_count() const override { return 2; }
};

PpoConfig bandit_config() {
  PpoConfig c;
  c.steps_per_update = 64;
  c.minibatch_size = 16;
  c.epochs_per_update = 4;
  c.hidden_sizes = {8};
  c.learning_rate = 3e-3;
  c.total_env_steps = 50 * 64;
  c.seed = 1;
  return c;
}

TEST(Train, BanditConvergesToBestArm) {
  const auto result = train([] { return std::make_unique<BanditTask>(); }, bandit_config());
  EXPECT_EQ(result.updates, 50);
  const auto out = policy_forward(result.params, Eigen::VectorXd::Ones(1));
  EXPECT_GT(out.action_probabilities(0), 0.95);
}

TEST(Train, OneUpdateWhenTotalEqualsRollout) {
  PpoConfig c = bandit_config();
  c.total_env_steps = c.steps_per_update;
  const auto result = train([] { return std::make_unique<BanditTask>(); }, c);
  EXPECT_EQ(result.updates, 1);
  EXPECT_EQ(result.env_steps, 64);
  EXPECT_EQ(result.curve.size(), 1u);
}

TEST(Train, SameSeedSameCurve) {
  PpoConfig c;
  c.steps_per_update = 512;
  c.total_env_steps = 2048;
  c.seed = 3;
  const auto sc = testing::reference_scenario();
  const auto factory = [&] { return std::make_unique<SlicingTask>(sc); };
  const auto a = train(factory, c);
  const auto b = train(factory, c);
  ASSERT_EQ(a.curve.size(), b.curve.size());
  for (std::size_t i = 0; i < a.curve.size(); ++i) {
    EXPECT_EQ(a.curve[i].mean_episode_reward, b.curve[i].mean_episode_reward);
    EXPECT_EQ(a.curve[i].entropy, b.curve[i].entropy);
    EXPECT_GE(a.curve[i].entropy, 0.0);
    EXPECT_GE(a.curve[i].clip_fraction, 0.0);
    EXPECT_LE(a.curve[i].clip_fraction, 1.0);
  }
  EXPECT_EQ(a.params.flatten(), b.params.flatten());
}

Trajectory bandit_rollout(const PolicyParams& params, int steps, Rng& rng) {
  Trajectory t;
  for (int i = 0; i < steps; ++i) {
    const Observation obs = Eigen::VectorXd::Ones(1);
    const auto out = policy_forward(params, obs);
    const auto [a, lp] = sample_action(out, rng);
    t.observations.push_back(obs);
    t.actions.push_back(a);
    t.log_prob_old.push_back(lp);
    t.value_old.push_back(out.state_value);
    t.rewards.push_back(a == 0 ? 1.0 : 0.0);
    t.dones.push_back(true);
  }
  return t;
}

TEST(Update, ZeroLearningRateLeavesParameters) {
  PpoConfig c = bandit_config();
  c.learning_rate = 0.0;
  Learner learner = make_learner(1, 2, c);
  const Eigen::VectorXd before = learner.params.flatten();
  Rng rng(4);
  const Trajectory t = bandit_rollout(learner.params, c.steps_per_update, rng);
  const UpdateStats stats = update(learner, t, c, rng);
  EXPECT_EQ(learner.params.flatten(), before);
  EXPECT_EQ(stats.first_epoch_clip_fraction, 0.0);
}

TEST(Update, FirstMinibatchRatiosAreOne) {
  const PpoConfig c = bandit_config();
  Learner learner = make_learner(1, 2, c);
  Rng rng(5);
  const Trajectory t = bandit_rollout(learner.params, c.steps_per_update, rng);
  const UpdateStats stats = update(learner, t, c, rng);
  EXPECT_LT(stats.first_minibatch_max_ratio_error, 1e-9);
  EXPECT_GE(stats.clip_fraction, 0.0);
  EXPECT_LE(stats.clip_fraction, 1.0);
}

TEST(Update, NonFiniteLossAbortsAndRestores) {
  const PpoConfig c = bandit_config();
  Learner learner = make_learner(1, 2, c);
  Rng rng(6);
  Trajectory t = bandit_rollout(learner.params, c.steps_per_update, rng);
  for (auto& r : t.rewards) {
    r = 1e300; // returns square to infinity in the value loss
  }
  const Eigen::VectorXd before = learner.params.flatten();
  EXPECT_THROW(update(learner, t, c, rng), NonFiniteLoss);
  EXPECT_EQ(learner.params.flatten(), before);
}

TEST(PpoConfig, Validation) {
  PpoConfig c;
  c.minibatch_size = c.steps_per_update + 1;
  EXPECT_THROW(c.validate(), ValidationError);
  c = PpoConfig{};
  c.clip_range = 1.0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = PpoConfig{};
  c.discount = 0.0;
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(Trajectory, ValidateCatchesRaggedArrays) {
  Trajectory t = make_trajectory({1.0}, {0.0}, 0.0, {true});
  t.rewards.push_back(2.0);
  EXPECT_THROW(t.validate(), ValidationError);
  t = make_trajectory({1.0}, {0.0}, 0.0, {true});
  t.log_prob_old[0] = 0.5;
  EXPECT_THROW(t.validate(), ValidationError);
}

} // namespace
} // namespace slicearena
