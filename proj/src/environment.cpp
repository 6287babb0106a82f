#include "slicearena/environment.hpp"

#include <algorithm>
#include <cmath>

#include "slicearena/errors.hpp"

namespace slicearena {

int ClusterState::active_count(int slice) const {
  return static_cast<int>(std::count_if(active_chains.begin(), active_chains.end(),
                                        [slice](const ActiveChain& c) { return c.slice == slice; }));
}

bool admission_feasible(const ClusterState& state, const ScenarioConfig& scenario, int slice, int dc) {
  const auto& spec = scenario.slices.at(static_cast<std::size_t>(slice));
  return fits(state.remaining.at(static_cast<std::size_t>(dc)), spec.per_request_demand) &&
         state.active_count(slice) < spec.chain_capacity;
}

namespace {

double idle_chain_power(const ScenarioConfig& scenario) {
  double sum = 0.0;
  for (const auto& dc : scenario.data_centers) {
    sum += dc.power_mid();
  }
  return sum / scenario.dc_count();
}

/// Power attributable to one slice, including idle reserved chains when always-on.
double slice_power(const ClusterState& state, const ScenarioConfig& scenario, int slice) {
  double power = 0.0;
  int active = 0;
  for (const auto& chain : state.active_chains) {
    if (chain.slice == slice) {
      power += chain.power_draw;
      ++active;
    }
  }
  if (scenario.power_mode == PowerMode::always_on) {
    const int idle = std::max(0, scenario.slices[static_cast<std::size_t>(slice)].chain_capacity - active);
    power += idle * idle_chain_power(scenario);
  }
  return power;
}

} // namespace

double total_power(const ClusterState& state, const ScenarioConfig& scenario) {
  double power = 0.0;
  for (int s = 0; s < scenario.slice_count(); ++s) {
    power += slice_power(state, scenario, s);
  }
  return power;
}

double slot_cost(const ClusterState& state, std::span<const int> admitted_this_slot, const ScenarioConfig& scenario,
                 double kappa) {
  double priority = 0.0;
  for (int s : admitted_this_slot) {
    priority += scenario.slices.at(static_cast<std::size_t>(s)).priority;
  }
  return total_power(state, scenario) - kappa * priority;
}

Observation make_observation(const ClusterState& state, const ScenarioConfig& scenario) {
  const int n = scenario.dc_count();
  Observation obs(observation_size(n, scenario.slice_count()));
  for (int i = 0; i < n; ++i) {
    obs.segment<3>(3 * i) = (state.remaining[static_cast<std::size_t>(i)] /
                             scenario.data_centers[static_cast<std::size_t>(i)].capacity)
                                .matrix();
  }
  for (int s = 0; s < scenario.slice_count(); ++s) {
    obs(3 * n + s) = std::min(state.pending[static_cast<std::size_t>(s)] / kPendingCap, 1.0);
  }
  return obs;
}

bool resources_conserved(const ClusterState& state, const ScenarioConfig& scenario, double tol) {
  std::vector<ResourceVector> used(static_cast<std::size_t>(scenario.dc_count()), ResourceVector::Zero());
  for (const auto& chain : state.active_chains) {
    used[static_cast<std::size_t>(chain.dc)] += scenario.slices[static_cast<std::size_t>(chain.slice)].per_request_demand;
  }
  for (int n = 0; n < scenario.dc_count(); ++n) {
    const auto& remaining = state.remaining[static_cast<std::size_t>(n)];
    if (!non_negative(remaining + tol)) {
      return false;
    }
    const ResourceVector diff = scenario.data_centers[static_cast<std::size_t>(n)].capacity - remaining -
                                used[static_cast<std::size_t>(n)];
    if ((diff.abs() > tol).any()) {
      return false;
    }
  }
  for (int s = 0; s < scenario.slice_count(); ++s) {
    if (state.active_count(s) > scenario.slices[static_cast<std::size_t>(s)].chain_capacity) {
      return false;
    }
  }
  return true;
}

SlicingEnv::SlicingEnv(ScenarioConfig scenario) : scenario_(std::move(scenario)) { scenario_.validate(); }

Observation SlicingEnv::reset(std::uint64_t seed) {
  arrival_rng_ = make_rng(seed, Stream::arrivals);
  departure_rng_ = make_rng(seed, Stream::departures);
  power_rng_ = make_rng(seed, Stream::power);

  const auto n = static_cast<std::size_t>(scenario_.dc_count());
  const auto s = static_cast<std::size_t>(scenario_.slice_count());
  state_.remaining.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    state_.remaining[i] = scenario_.data_centers[i].capacity;
  }
  state_.active_chains.clear();
  state_.pending.assign(s, 0);
  state_.slot_index = 0;
  history_.clear();
  done_ = false;

  draw_arrivals();
  while (!done_ && !has_pending()) {
    close_slot();
    advance();
  }
  return observation();
}

bool SlicingEnv::has_pending() const {
  return std::any_of(state_.pending.begin(), state_.pending.end(), [](int p) { return p > 0; });
}

std::optional<int> SlicingEnv::current_slice() const {
  for (std::size_t s = 0; s < state_.pending.size(); ++s) {
    if (state_.pending[s] > 0) {
      return static_cast<int>(s);
    }
  }
  return std::nullopt;
}

void SlicingEnv::draw_arrivals() {
  const auto s = static_cast<std::size_t>(scenario_.slice_count());
  arrived_.assign(s, 0);
  admitted_.assign(s, 0);
  rejected_.assign(s, 0);
  infeasible_.assign(s, 0);
  admitted_ids_.clear();
  for (std::size_t j = 0; j < s; ++j) {
    const double mean = scenario_.slices[j].arrival_mean;
    const int count = mean > 0.0 ? std::poisson_distribution<int>(mean)(arrival_rng_) : 0;
    state_.pending[j] = count;
    arrived_[j] = count;
  }
}

double SlicingEnv::close_slot() {
  const auto s = static_cast<std::size_t>(scenario_.slice_count());
  SlotRecord record;
  record.slot = state_.slot_index;
  record.arrived = arrived_;
  record.admitted = admitted_;
  record.rejected = rejected_;
  record.infeasible = infeasible_;
  record.power.resize(s);
  record.reward.resize(s);
  for (std::size_t j = 0; j < s; ++j) {
    record.power[j] = slice_power(state_, scenario_, static_cast<int>(j));
    record.reward[j] = scenario_.kappa * scenario_.slices[j].priority * admitted_[j] - record.power[j] -
                       scenario_.penalty * infeasible_[j];
  }
  const double reward = -slot_cost(state_, admitted_ids_, scenario_, scenario_.kappa);
  history_.push_back(std::move(record));
  return reward;
}

void SlicingEnv::advance() {
  auto& chains = state_.active_chains;
  std::vector<ActiveChain> staying;
  staying.reserve(chains.size());
  for (const auto& chain : chains) {
    const double p = scenario_.slices[static_cast<std::size_t>(chain.slice)].departure_prob;
    const bool leaves = std::uniform_real_distribution<double>(0.0, 1.0)(departure_rng_) < p;
    if (leaves) {
      state_.remaining[static_cast<std::size_t>(chain.dc)] +=
          scenario_.slices[static_cast<std::size_t>(chain.slice)].per_request_demand;
    } else {
      staying.push_back(chain);
    }
  }
  chains = std::move(staying);
  ++state_.slot_index;
  if (state_.slot_index >= scenario_.horizon) {
    done_ = true;
    std::fill(state_.pending.begin(), state_.pending.end(), 0);
    return;
  }
  draw_arrivals();
}

StepOutcome SlicingEnv::step(AdmissionDecision decision) {
  const auto slice = current_slice();
  if (done_ || !slice) {
    throw NoPendingRequest("step() called with no pending request");
  }
  const int s = *slice;
  StepOutcome out;
  out.decided_slice = s;
  --state_.pending[static_cast<std::size_t>(s)];

  if (decision.is_reject()) {
    ++rejected_[static_cast<std::size_t>(s)];
  } else {
    const int dc = decision.dc_index();
    if (dc < 0 || dc >= scenario_.dc_count()) {
      throw ValidationError("decision", "data center index out of range");
    }
    if (admission_feasible(state_, scenario_, s, dc)) {
      const auto& range = scenario_.data_centers[static_cast<std::size_t>(dc)];
      const double power = std::uniform_real_distribution<double>(range.power_lo, range.power_hi)(power_rng_);
      state_.remaining[static_cast<std::size_t>(dc)] -= scenario_.slices[static_cast<std::size_t>(s)].per_request_demand;
      state_.active_chains.push_back({s, dc, power, state_.slot_index});
      ++admitted_[static_cast<std::size_t>(s)];
      admitted_ids_.push_back(s);
      out.admitted = true;
    } else {
      ++infeasible_[static_cast<std::size_t>(s)];
      out.infeasible_attempt = true;
      out.penalty_reward = -scenario_.penalty;
    }
  }

  if (!has_pending()) {
    out.slot_closed = true;
    for (int id : admitted_ids_) {
      out.slot_admitted_priority += scenario_.slices[static_cast<std::size_t>(id)].priority;
    }
    out.slot_reward = close_slot();
    advance();
    while (!done_ && !has_pending()) {
      out.slot_reward += close_slot();
      advance();
    }
  }
  out.reward = out.penalty_reward + out.slot_reward;
  out.episode_done = done_;
  out.observation = observation();
  return out;
}

} // namespace slicearena
