#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "slicearena/policy.hpp"
#include "slicearena/task.hpp"

namespace slicearena {

struct PpoConfig {
  double clip_range = 0.2;
  double discount = 0.99;
  double gae_lambda = 0.95;
  int steps_per_update = 2048;
  int epochs_per_update = 10;
  int minibatch_size = 64;
  double learning_rate = 3e-4;
  double value_loss_coeff = 0.5;
  double entropy_coeff = 0.01;
  long total_env_steps = 200'000;
  std::uint64_t seed = 0;
  std::vector<int> hidden_sizes{64, 64};
  double reward_scale = 1.0; // applied to rewards before advantage estimation

  void validate() const;
};

/// Rollout buffer; index t holds the step taken from observations[t].
struct Trajectory {
  std::vector<Observation> observations;
  std::vector<int> actions;
  std::vector<double> log_prob_old;
  std::vector<double> value_old;
  std::vector<double> rewards;
  std::vector<bool> dones;
  double bootstrap_value = 0.0; // V of the state after the last step

  std::size_t size() const { return actions.size(); }
  void clear();
  void validate() const;
};

struct AdvantageEstimate {
  Eigen::VectorXd raw;        // GAE before normalization
  Eigen::VectorXd normalized; // zero mean, unit variance (when size >= 2)
  Eigen::VectorXd returns;    // raw + V
};

/// GAE: A_t = delta_t + gamma lambda (1 - done_t) A_{t+1},
/// delta_t = r_t + gamma (1 - done_t) V_{t+1} - V_t.
AdvantageEstimate compute_advantages(const Trajectory& traj, double gamma, double lambda);

/// min(r A, clip(r, 1 - eps, 1 + eps) A) for a single sample.
double clipped_surrogate(double ratio, double advantage, double clip_range);

/// -mean of the clipped surrogate, r = exp(log_prob_new - log_prob_old).
double clipped_surrogate_loss(const Eigen::VectorXd& log_prob_new, const Eigen::VectorXd& log_prob_old,
                              const Eigen::VectorXd& advantages, double clip_range);

struct MinibatchLoss {
  double loss = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
  Eigen::VectorXd gradient;
};

/// Full PPO loss on one minibatch (columns of `obs`):
///   -mean clip objective + c_v mean (R - V)^2 - c_e mean H
/// and its analytic gradient.
MinibatchLoss ppo_minibatch_loss(const PolicyParams& params, const Eigen::MatrixXd& obs,
                                 const std::vector<int>& actions, const Eigen::VectorXd& log_prob_old,
                                 const Eigen::VectorXd& advantages, const Eigen::VectorXd& returns,
                                 const PpoConfig& config);

struct UpdateStats {
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double first_minibatch_max_ratio_error = 0.0; // |r - 1| on the very first minibatch
  double first_epoch_clip_fraction = 0.0;
};

/// The optimizer state lives alongside the parameters across updates.
struct Learner {
  PolicyParams params;
  Adam<double> optimizer;
};

Learner make_learner(int observation_size, int action_count, const PpoConfig& config);

/// Epoch-wise shuffled minibatch passes over one rollout. Throws NonFiniteLoss
/// and leaves the parameters untouched if any minibatch loss is not finite.
UpdateStats update(Learner& learner, const Trajectory& traj, const PpoConfig& config, Rng& shuffle_rng);

struct LearningCurvePoint {
  int update_index = 0;
  long env_steps = 0;
  double mean_episode_reward = 0.0;
  double clip_fraction = 0.0;
  double entropy = 0.0;
};

struct TrainResult {
  PolicyParams params;
  std::vector<LearningCurvePoint> curve;
  long attacked_steps = 0;
  long env_steps = 0;
  int updates = 0;
};

using TaskFactory = std::function<std::unique_ptr<Task>()>;

/// Collects steps_per_update transitions per update until at least total_env_steps.
/// Episode k resets with seed (config.seed, k). The curve reports the mean raw
/// return of the last (up to) 10 completed episodes.
TrainResult train(const TaskFactory& factory, const PpoConfig& config);

} // namespace slicearena
