#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "slicearena/mlp.hpp"
#include "slicearena/rng.hpp"

namespace slicearena {

/// Separate actor and critic trunks with identical hidden sizes. The actor
/// emits one logit per action (REJECT, DC 1..N), the critic one state value.
/// Flat parameter order: all actor parameters, then all critic parameters.
template <typename Scalar>
struct ActorCritic {
  Mlp<Scalar> actor;
  Mlp<Scalar> critic;

  ActorCritic() = default;
  ActorCritic(int observation_size, const std::vector<int>& hidden, int action_count)
      : actor(chain(observation_size, hidden, action_count)), critic(chain(observation_size, hidden, 1)) {}

  int observation_size() const { return actor.input_size(); }
  int action_count() const { return actor.output_size(); }
  std::vector<int> hidden_sizes() const {
    return {actor.dims().begin() + 1, actor.dims().end() - 1};
  }

  Eigen::Index parameter_count() const { return actor.parameter_count() + critic.parameter_count(); }

  VectorX<Scalar> flatten() const {
    VectorX<Scalar> flat(parameter_count());
    actor.write_flat(flat.head(actor.parameter_count()));
    critic.write_flat(flat.tail(critic.parameter_count()));
    return flat;
  }

  void read_flat(const Eigen::Ref<const VectorX<Scalar>>& flat) {
    if (flat.size() != parameter_count()) {
      throw DimensionMismatch("flat parameter vector has the wrong length");
    }
    actor.read_flat(flat.head(actor.parameter_count()));
    critic.read_flat(flat.tail(critic.parameter_count()));
  }

  bool all_finite() const { return actor.all_finite() && critic.all_finite(); }

  /// Orthogonal init, gain sqrt(2) on hidden layers, 0.01 on the actor
  /// output (near-uniform initial policy) and 1 on the critic output.
  void initialize(Rng& rng) {
    actor.orthogonal_init(rng, Scalar(std::sqrt(2.0)), Scalar(0.01));
    critic.orthogonal_init(rng, Scalar(std::sqrt(2.0)), Scalar(1.0));
  }

private:
  static std::vector<int> chain(int in, const std::vector<int>& hidden, int out) {
    std::vector<int> dims{in};
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(out);
    return dims;
  }
};

template <typename Scalar>
struct PolicyOutput {
  VectorX<Scalar> action_probabilities;
  Scalar state_value = 0;
};

/// Everything the loss needs from one forward pass over a batch.
template <typename Scalar>
struct BatchEvaluation {
  MatrixX<Scalar> logits;       // actions x B
  MatrixX<Scalar> probabilities;
  MatrixX<Scalar> log_probabilities;
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> values;
  typename Mlp<Scalar>::Tape actor_tape;
  typename Mlp<Scalar>::Tape critic_tape;
};

template <typename Scalar, typename Derived>
BatchEvaluation<Scalar> evaluate_batch(const ActorCritic<Scalar>& params, const Eigen::MatrixBase<Derived>& obs) {
  if (!obs.allFinite()) {
    throw DimensionMismatch("observation batch contains non-finite entries");
  }
  BatchEvaluation<Scalar> out;
  out.logits = params.actor.forward(obs, out.actor_tape);
  out.values = params.critic.forward(obs, out.critic_tape);
  out.probabilities = softmax_columns(out.logits);
  out.log_probabilities = log_softmax_columns(out.logits);
  return out;
}

template <typename Scalar, typename Derived>
PolicyOutput<Scalar> policy_forward(const ActorCritic<Scalar>& params, const Eigen::MatrixBase<Derived>& observation) {
  if (observation.cols() != 1) {
    throw DimensionMismatch("policy_forward takes a single observation column");
  }
  const auto eval = evaluate_batch(params, observation);
  return {eval.probabilities.col(0), eval.values(0)};
}

/// Backpropagates d(loss)/d(logits) and d(loss)/d(values) of an evaluated batch
/// into a flat gradient.
template <typename Scalar>
VectorX<Scalar> backward_batch(const ActorCritic<Scalar>& params, const BatchEvaluation<Scalar>& eval,
                               const MatrixX<Scalar>& d_logits,
                               const Eigen::Matrix<Scalar, 1, Eigen::Dynamic>& d_values) {
  VectorX<Scalar> grad = VectorX<Scalar>::Zero(params.parameter_count());
  const Eigen::Index n_actor = params.actor.parameter_count();
  params.actor.backward(eval.actor_tape, d_logits, grad.head(n_actor));
  params.critic.backward(eval.critic_tape, d_values, grad.tail(params.critic.parameter_count()));
  return grad;
}

/// Per-sample weights of the generic actor-critic loss
///   L = -policy_gradient * log pi(a|s) + value * (value_target - V(s))^2 - entropy * H(pi(.|s)).
/// PPO's clipped surrogate differentiates into this form with
/// policy_gradient = [unclipped] * ratio * advantage / batch.
struct LossWeights {
  double policy_gradient = 0.0;
  double value_target = 0.0;
  double value = 0.0;
  double entropy = 0.0;
};

/// d(logits) of -w log p_a - e H for one column of probabilities.
template <typename Scalar>
VectorX<Scalar> logit_gradient(const VectorX<Scalar>& probs, const VectorX<Scalar>& log_probs, int action,
                               Scalar pg_weight, Scalar entropy_weight) {
  VectorX<Scalar> d = pg_weight * probs;
  d(action) -= pg_weight;
  if (entropy_weight != Scalar(0)) {
    // dH/dz_j = -p_j (log p_j + H)
    const Scalar entropy = -(probs.array() * log_probs.array()).sum();
    d.array() += entropy_weight * probs.array() * (log_probs.array() + entropy);
  }
  return d;
}

template <typename Scalar, typename Derived>
VectorX<Scalar> backward_gradients(const ActorCritic<Scalar>& params, const Eigen::MatrixBase<Derived>& observation,
                                   int action, const LossWeights& weights) {
  if (action < 0 || action >= params.action_count()) {
    throw DimensionMismatch("action index out of range");
  }
  const auto eval = evaluate_batch(params, observation);
  MatrixX<Scalar> d_logits = logit_gradient<Scalar>(eval.probabilities.col(0), eval.log_probabilities.col(0), action,
                                                    Scalar(weights.policy_gradient), Scalar(weights.entropy));
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> d_values(1);
  d_values(0) = Scalar(-2.0 * weights.value) * (Scalar(weights.value_target) - eval.values(0));
  return backward_batch(params, eval, d_logits, d_values);
}

using PolicyParams = ActorCritic<double>;

/// Draws from the categorical distribution; returns (action, log p[action]).
std::pair<int, double> sample_action(const PolicyOutput<double>& output, Rng& rng);

int greedy_action(const PolicyOutput<double>& output);

/// Checkpoint text format:
///   SLICE-ARENA-PPO v1
///   <observation layout version>
///   <actor layer dims, space separated>
///   one parameter per line, %.17g, flat order (actor then critic)
std::string serialize_checkpoint(const PolicyParams& params);
PolicyParams deserialize_checkpoint(const std::string& text);
void save_checkpoint(const PolicyParams& params, const std::filesystem::path& path);
PolicyParams load_checkpoint(const std::filesystem::path& path); // MissingCheckpoint if absent

/// Adaptive moment estimation with bias correction over a flat parameter vector.
template <typename Scalar>
class Adam {
public:
  Adam() = default;
  Adam(Eigen::Index size, Scalar learning_rate, Scalar beta1 = Scalar(0.9), Scalar beta2 = Scalar(0.999),
       Scalar epsilon = Scalar(1e-8))
      : m_(VectorX<Scalar>::Zero(size)), v_(VectorX<Scalar>::Zero(size)), lr_(learning_rate), beta1_(beta1),
        beta2_(beta2), eps_(epsilon) {}

  void step(Eigen::Ref<VectorX<Scalar>> params, const VectorX<Scalar>& grad) {
    ++t_;
    m_ = beta1_ * m_ + (Scalar(1) - beta1_) * grad;
    v_ = beta2_ * v_ + (Scalar(1) - beta2_) * grad.cwiseAbs2();
    const Scalar c1 = Scalar(1) - std::pow(beta1_, Scalar(t_));
    const Scalar c2 = Scalar(1) - std::pow(beta2_, Scalar(t_));
    params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
  }

  long steps() const { return t_; }

private:
  VectorX<Scalar> m_, v_;
  Scalar lr_ = Scalar(3e-4), beta1_ = Scalar(0.9), beta2_ = Scalar(0.999), eps_ = Scalar(1e-8);
  long t_ = 0;
};

} // namespace slicearena
