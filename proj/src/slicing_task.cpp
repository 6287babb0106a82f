#include "slicearena/slicing_task.hpp"

namespace slicearena {

SlicingTask::SlicingTask(ScenarioConfig scenario, std::optional<AttackConfig> attack)
    : env_(std::move(scenario)), attack_(std::move(attack)) {
  if (attack_) {
    attack_->validate();
  }
}

Observation SlicingTask::reset(std::uint64_t seed) {
  ++episodes_;
  if (attack_) {
    attack_rng_ = make_rng(attack_->seed, Stream::adversary, seed);
  }
  env_.reset(seed);
  return present();
}

Observation SlicingTask::present() {
  current_attacked_ = false;
  if (!attack_ || env_.done()) {
    return env_.observation();
  }
  current_attacked_ = std::bernoulli_distribution(attack_->attack_probability)(attack_rng_);
  if (!current_attacked_) {
    return env_.observation();
  }
  current_forged_ = forge_observation(env_.state(), env_.scenario(), attack_rng_);
  return current_forged_;
}

Transition SlicingTask::step(int action) {
  const StepOutcome outcome = env_.step(AdmissionDecision::from_action(action));
  Transition tr;
  tr.reward = outcome.reward;
  if (current_attacked_) {
    tr.reward = forged_reward(current_forged_, action, outcome, env_.scenario());
    tr.attacked = true;
    ++attacked_steps_;
  }
  tr.done = outcome.episode_done;
  tr.observation = tr.done ? outcome.observation : present();
  return tr;
}

int SlicingTask::observation_size() const {
  return slicearena::observation_size(env_.scenario().dc_count(), env_.scenario().slice_count());
}

int SlicingTask::action_count() const { return env_.scenario().dc_count() + 1; }

} // namespace slicearena
