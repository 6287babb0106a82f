#pragma once

#include <cstdint>

#include "slicearena/environment.hpp"

namespace slicearena {

struct Transition {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  bool attacked = false; // the reward/observation pair seen was forged
};

/// What a learner interacts with: discrete actions, vector observations.
class Task {
public:
  virtual ~Task() = default;
  virtual Observation reset(std::uint64_t seed) = 0;
  virtual Transition step(int action) = 0;
  virtual int observation_size() const = 0;
  virtual int action_count() const = 0;
};

} // namespace slicearena
