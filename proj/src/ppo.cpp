#include "slicearena/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "slicearena/errors.hpp"

namespace slicearena {

namespace {

void require(bool ok, const char* field, const char* message) {
  if (!ok) {
    throw ValidationError(field, message);
  }
}

} // namespace

void PpoConfig::validate() const {
  require(clip_range > 0.0 && clip_range < 1.0, "clip_range", "must lie in (0, 1)");
  require(discount > 0.0 && discount <= 1.0, "discount", "must lie in (0, 1]");
  require(gae_lambda >= 0.0 && gae_lambda <= 1.0, "gae_lambda", "must lie in [0, 1]");
  require(steps_per_update >= 1, "steps_per_update", "must be positive");
  require(epochs_per_update >= 1, "epochs_per_update", "must be positive");
  require(minibatch_size >= 1 && minibatch_size <= steps_per_update, "minibatch_size",
          "must lie in [1, steps_per_update]");
  require(std::isfinite(learning_rate) && learning_rate >= 0.0, "learning_rate", "must be non-negative");
  require(std::isfinite(value_loss_coeff) && value_loss_coeff >= 0.0, "value_loss_coeff", "must be non-negative");
  require(std::isfinite(entropy_coeff) && entropy_coeff >= 0.0, "entropy_coeff", "must be non-negative");
  require(total_env_steps >= steps_per_update, "total_env_steps", "must be at least steps_per_update");
  require(!hidden_sizes.empty(), "hidden_sizes", "at least one hidden layer");
  for (int h : hidden_sizes) {
    require(h >= 1, "hidden_sizes", "must be positive");
  }
  require(std::isfinite(reward_scale) && reward_scale > 0.0, "reward_scale", "must be positive");
}

void Trajectory::clear() {
  observations.clear();
  actions.clear();
  log_prob_old.clear();
  value_old.clear();
  rewards.clear();
  dones.clear();
  bootstrap_value = 0.0;
}

void Trajectory::validate() const {
  const std::size_t n = actions.size();
  require(observations.size() == n && log_prob_old.size() == n && value_old.size() == n && rewards.size() == n &&
              dones.size() == n,
          "trajectory", "parallel arrays differ in length");
  for (std::size_t t = 0; t < n; ++t) {
    require(log_prob_old[t] <= 0.0 && std::isfinite(log_prob_old[t]), "trajectory.log_prob_old",
            "must be finite and <= 0");
    require(std::isfinite(value_old[t]) && std::isfinite(rewards[t]), "trajectory", "non-finite entry");
  }
  require(std::isfinite(bootstrap_value), "trajectory.bootstrap_value", "non-finite");
}

AdvantageEstimate compute_advantages(const Trajectory& traj, double gamma, double lambda) {
  const auto n = static_cast<Eigen::Index>(traj.size());
  AdvantageEstimate est;
  est.raw.resize(n);
  double next_value = traj.bootstrap_value;
  double next_advantage = 0.0;
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    const double nonterminal = traj.dones[static_cast<std::size_t>(t)] ? 0.0 : 1.0;
    const double value = traj.value_old[static_cast<std::size_t>(t)];
    const double delta = traj.rewards[static_cast<std::size_t>(t)] + gamma * nonterminal * next_value - value;
    est.raw(t) = delta + gamma * lambda * nonterminal * next_advantage;
    next_value = value;
    next_advantage = est.raw(t);
  }
  est.returns = est.raw + Eigen::Map<const Eigen::VectorXd>(traj.value_old.data(), n);
  est.normalized = est.raw;
  if (n >= 2) {
    const double mean = est.raw.mean();
    est.normalized.array() -= mean;
    const double stddev = std::sqrt(est.normalized.squaredNorm() / static_cast<double>(n));
    if (stddev > 1e-12) {
      est.normalized /= stddev;
    }
  }
  return est;
}

double clipped_surrogate(double ratio, double advantage, double clip_range) {
  const double clipped = std::clamp(ratio, 1.0 - clip_range, 1.0 + clip_range);
  return std::min(ratio * advantage, clipped * advantage);
}

double clipped_surrogate_loss(const Eigen::VectorXd& log_prob_new, const Eigen::VectorXd& log_prob_old,
                              const Eigen::VectorXd& advantages, double clip_range) {
  if (log_prob_new.size() != log_prob_old.size() || log_prob_new.size() != advantages.size()) {
    throw DimensionMismatch("clipped_surrogate_loss inputs differ in length");
  }
  if (log_prob_new.size() == 0) {
    return 0.0;
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < log_prob_new.size(); ++i) {
    sum += clipped_surrogate(std::exp(log_prob_new(i) - log_prob_old(i)), advantages(i), clip_range);
  }
  return -sum / static_cast<double>(log_prob_new.size());
}

MinibatchLoss ppo_minibatch_loss(const PolicyParams& params, const Eigen::MatrixXd& obs,
                                 const std::vector<int>& actions, const Eigen::VectorXd& log_prob_old,
                                 const Eigen::VectorXd& advantages, const Eigen::VectorXd& returns,
                                 const PpoConfig& config) {
  const Eigen::Index batch = obs.cols();
  if (static_cast<Eigen::Index>(actions.size()) != batch || log_prob_old.size() != batch ||
      advantages.size() != batch || returns.size() != batch) {
    throw DimensionMismatch("minibatch arrays differ in length");
  }
  const auto eval = evaluate_batch(params, obs);
  const double inv_b = 1.0 / static_cast<double>(batch);
  const double eps = config.clip_range;

  MinibatchLoss out;
  Eigen::MatrixXd d_logits(eval.logits.rows(), batch);
  Eigen::RowVectorXd d_values(batch);
  double objective = 0.0;
  double squared_error = 0.0;
  double entropy = 0.0;
  double ratio_sum = 0.0;
  long clipped = 0;
  for (Eigen::Index i = 0; i < batch; ++i) {
    const int a = actions[static_cast<std::size_t>(i)];
    const Eigen::VectorXd probs = eval.probabilities.col(i);
    const Eigen::VectorXd log_probs = eval.log_probabilities.col(i);
    const double ratio = std::exp(log_probs(a) - log_prob_old(i));
    const double adv = advantages(i);
    const double unclipped = ratio * adv;
    const double clipped_obj = std::clamp(ratio, 1.0 - eps, 1.0 + eps) * adv;
    objective += std::min(unclipped, clipped_obj);
    const double pg_weight = unclipped <= clipped_obj ? ratio * adv * inv_b : 0.0;
    d_logits.col(i) = logit_gradient<double>(probs, log_probs, a, pg_weight, config.entropy_coeff * inv_b);

    const double err = returns(i) - eval.values(i);
    squared_error += err * err;
    d_values(i) = -2.0 * config.value_loss_coeff * err * inv_b;

    entropy += -(probs.array() * log_probs.array()).sum();
    ratio_sum += ratio;
    if (std::abs(ratio - 1.0) > eps) {
      ++clipped;
    }
  }
  out.policy_loss = -objective * inv_b;
  out.value_loss = squared_error * inv_b;
  out.entropy = entropy * inv_b;
  out.loss = out.policy_loss + config.value_loss_coeff * out.value_loss - config.entropy_coeff * out.entropy;
  out.mean_ratio = ratio_sum * inv_b;
  out.clip_fraction = static_cast<double>(clipped) * inv_b;
  out.gradient = backward_batch(params, eval, d_logits, d_values);
  return out;
}

Learner make_learner(int observation_size, int action_count, const PpoConfig& config) {
  Learner learner{PolicyParams(observation_size, config.hidden_sizes, action_count), {}};
  Rng init = make_rng(config.seed, Stream::init);
  learner.params.initialize(init);
  learner.optimizer = Adam<double>(learner.params.parameter_count(), config.learning_rate);
  return learner;
}

UpdateStats update(Learner& learner, const Trajectory& traj, const PpoConfig& config, Rng& shuffle_rng) {
  traj.validate();
  if (static_cast<int>(traj.size()) != config.steps_per_update) {
    throw ValidationError("trajectory", "length must equal steps_per_update");
  }
  const auto n = static_cast<Eigen::Index>(traj.size());
  const AdvantageEstimate est = compute_advantages(traj, config.discount, config.gae_lambda);
  Eigen::MatrixXd obs(learner.params.observation_size(), n);
  for (Eigen::Index t = 0; t < n; ++t) {
    obs.col(t) = traj.observations[static_cast<std::size_t>(t)];
  }
  const Eigen::Map<const Eigen::VectorXd> log_prob_old(traj.log_prob_old.data(), n);

  const Learner snapshot = learner; // theta_old, restored if the update diverges
  Eigen::VectorXd flat = learner.params.flatten();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  UpdateStats stats;
  long minibatches = 0;
  long first_epoch_minibatches = 0;
  const Eigen::Index mb = config.minibatch_size;
  for (int epoch = 0; epoch < config.epochs_per_update; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (Eigen::Index start = 0; start < n; start += mb) {
      const Eigen::Index size = std::min(mb, n - start);
      Eigen::MatrixXd batch_obs(obs.rows(), size);
      std::vector<int> batch_actions(static_cast<std::size_t>(size));
      Eigen::VectorXd batch_lp(size), batch_adv(size), batch_ret(size);
      for (Eigen::Index j = 0; j < size; ++j) {
        const Eigen::Index idx = order[static_cast<std::size_t>(start + j)];
        batch_obs.col(j) = obs.col(idx);
        batch_actions[static_cast<std::size_t>(j)] = traj.actions[static_cast<std::size_t>(idx)];
        batch_lp(j) = log_prob_old(idx);
        batch_adv(j) = est.normalized(idx);
        batch_ret(j) = est.returns(idx);
      }
      const MinibatchLoss loss =
          ppo_minibatch_loss(learner.params, batch_obs, batch_actions, batch_lp, batch_adv, batch_ret, config);
      if (!std::isfinite(loss.loss) || !loss.gradient.allFinite()) {
        learner = snapshot;
        throw NonFiniteLoss("non-finite PPO loss in epoch " + std::to_string(epoch) + "; update aborted");
      }
      if (minibatches == 0) {
        for (Eigen::Index j = 0; j < size; ++j) {
          const int a = batch_actions[static_cast<std::size_t>(j)];
          const auto out = policy_forward(learner.params, batch_obs.col(j));
          const double ratio = std::exp(std::log(out.action_probabilities(a)) - batch_lp(j));
          stats.first_minibatch_max_ratio_error = std::max(stats.first_minibatch_max_ratio_error, std::abs(ratio - 1.0));
        }
      }
      stats.mean_ratio += loss.mean_ratio;
      stats.clip_fraction += loss.clip_fraction;
      stats.value_loss += loss.value_loss;
      stats.entropy += loss.entropy;
      if (epoch == 0) {
        stats.first_epoch_clip_fraction += loss.clip_fraction;
        ++first_epoch_minibatches;
      }
      ++minibatches;
      learner.optimizer.step(flat, loss.gradient);
      learner.params.read_flat(flat);
    }
  }
  const double inv = 1.0 / static_cast<double>(minibatches);
  stats.mean_ratio *= inv;
  stats.clip_fraction *= inv;
  stats.value_loss *= inv;
  stats.entropy *= inv;
  stats.first_epoch_clip_fraction /= static_cast<double>(first_epoch_minibatches);
  return stats;
}

TrainResult train(const TaskFactory& factory, const PpoConfig& config) {
  config.validate();
  std::unique_ptr<Task> task = factory();
  Learner learner = make_learner(task->observation_size(), task->action_count(), config);
  Rng policy_rng = make_rng(config.seed, Stream::policy);
  Rng shuffle_rng = make_rng(config.seed, Stream::shuffle);

  TrainResult result;
  std::uint64_t episode = 0;
  Observation obs = task->reset(derive_seed(config.seed, episode));
  std::deque<double> recent;
  double episode_return = 0.0;
  const long updates = (config.total_env_steps + config.steps_per_update - 1) / config.steps_per_update;

  Trajectory traj;
  for (long u = 0; u < updates; ++u) {
    traj.clear();
    for (int k = 0; k < config.steps_per_update; ++k) {
      const auto out = policy_forward(learner.params, obs);
      const auto [action, log_prob] = sample_action(out, policy_rng);
      const Transition tr = task->step(action);
      traj.observations.push_back(obs);
      traj.actions.push_back(action);
      traj.log_prob_old.push_back(log_prob);
      traj.value_old.push_back(out.state_value);
      traj.rewards.push_back(tr.reward * config.reward_scale);
      traj.dones.push_back(tr.done);
      episode_return += tr.reward;
      if (tr.attacked) {
        ++result.attacked_steps;
      }
      ++result.env_steps;
      if (tr.done) {
        recent.push_back(episode_return);
        if (recent.size() > 10) {
          recent.pop_front();
        }
        episode_return = 0.0;
        obs = task->reset(derive_seed(config.seed, ++episode));
      } else {
        obs = tr.observation;
      }
    }
    traj.bootstrap_value = policy_forward(learner.params, obs).state_value;
    const UpdateStats stats = update(learner, traj, config, shuffle_rng);
    ++result.updates;

    LearningCurvePoint point;
    point.update_index = static_cast<int>(u);
    point.env_steps = result.env_steps;
    point.mean_episode_reward = recent.empty()
                                    ? episode_return
                                    : std::accumulate(recent.begin(), recent.end(), 0.0) / static_cast<double>(recent.size());
    point.clip_fraction = stats.clip_fraction;
    point.entropy = stats.entropy;
    result.curve.push_back(point);
  }
  result.params = learner.params;
  return result;
}

} // namespace slicearena
