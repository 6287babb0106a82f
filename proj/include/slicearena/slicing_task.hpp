#pragma once

#include <optional>

#include "slicearena/adversary.hpp"
#include "slicearena/environment.hpp"
#include "slicearena/task.hpp"

namespace slicearena {

/// SlicingEnv seen through the Task interface, optionally through an
/// adversary that forges observation/reward pairs. The true environment
/// evolves identically with or without the adversary.
class SlicingTask : public Task {
public:
  explicit SlicingTask(ScenarioConfig scenario, std::optional<AttackConfig> attack = std::nullopt);

  Observation reset(std::uint64_t seed) override;
  Transition step(int action) override;
  int observation_size() const override;
  int action_count() const override;

  const SlicingEnv& env() const { return env_; }
  long attacked_steps() const { return attacked_steps_; }

private:
  Observation present();

  SlicingEnv env_;
  std::optional<AttackConfig> attack_;
  Rng attack_rng_;
  bool current_attacked_ = false;
  Observation current_forged_;
  long attacked_steps_ = 0;
  std::uint64_t episodes_ = 0;
};

} // namespace slicearena
