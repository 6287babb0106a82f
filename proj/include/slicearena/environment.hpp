#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "slicearena/rng.hpp"
#include "slicearena/scenario.hpp"

namespace slicearena {

/// Observation layout version 1, length 3N + S:
///   for each data center n: remaining cpu, memory, storage divided by capacity
///   for each slice s:       min(pending_s / kPendingCap, 1)
/// Pending counts shrink as requests are decided. Requests are presented
/// slice-major, so the request being decided belongs to the first slice with a
/// non-zero count.
using Observation = Eigen::VectorXd;

inline constexpr int kObservationLayoutVersion = 1;
inline constexpr double kPendingCap = 32.0;

inline int observation_size(int dc_count, int slice_count) { return 3 * dc_count + slice_count; }

/// Either REJECT (target 0) or placement on data center `target` in 1..N.
/// The value equals the policy's action index.
class AdmissionDecision {
public:
  static AdmissionDecision reject() { return AdmissionDecision(0); }
  static AdmissionDecision to_dc(int dc_index) { return AdmissionDecision(dc_index + 1); }
  static AdmissionDecision from_action(int action) { return AdmissionDecision(action); }

  bool is_reject() const { return target_ == 0; }
  int dc_index() const { return target_ - 1; } // 0-based, only when !is_reject()
  int action() const { return target_; }

  bool operator==(const AdmissionDecision&) const = default;

private:
  explicit AdmissionDecision(int target) : target_(target) {}
  int target_;
};

struct ActiveChain {
  int slice = 0; // index into ScenarioConfig::slices
  int dc = 0;    // 0-based data center index
  double power_draw = 0.0;
  int admit_slot = 0;
};

struct ClusterState {
  std::vector<ResourceVector> remaining; // per data center
  std::vector<ActiveChain> active_chains;
  std::vector<int> pending; // undecided requests of the current slot, per slice
  int slot_index = 0;

  int active_count(int slice) const;
};

/// Outcome of one per-request decision. `penalty_reward` is -M for an
/// infeasible attempt and 0 otherwise; `slot_reward` is non-zero only on the
/// decision that closes a slot (plus any empty slots skipped after it).
struct StepOutcome {
  double reward = 0.0; // penalty_reward + slot_reward
  double penalty_reward = 0.0;
  double slot_reward = 0.0;
  bool admitted = false;
  bool infeasible_attempt = false;
  Observation observation;
  bool episode_done = false;

  int decided_slice = 0;
  bool slot_closed = false;
  double slot_admitted_priority = 0.0; // sum of p_s admitted in the closed slot
};

/// One slot's accounting, per slice.
struct SlotRecord {
  int slot = 0;
  std::vector<int> arrived, admitted, rejected, infeasible;
  std::vector<double> power;  // power of the slice's chains during the slot
  std::vector<double> reward; // kappa p_s admitted_s - power_s - M infeasible_s
};

bool admission_feasible(const ClusterState& state, const ScenarioConfig& scenario, int slice, int dc);

/// Total power of the slot: active chains, plus idle reserved chains at the
/// mean draw in always-on mode.
double total_power(const ClusterState& state, const ScenarioConfig& scenario);

/// phi_tot - kappa * sum of priorities of the chains admitted this slot.
double slot_cost(const ClusterState& state, std::span<const int> admitted_this_slot,
                 const ScenarioConfig& scenario, double kappa);

Observation make_observation(const ClusterState& state, const ScenarioConfig& scenario);

/// True iff capacity - remaining equals the summed demand of active chains
/// (within `tol`) and nothing is negative or over a slice cap.
bool resources_conserved(const ClusterState& state, const ScenarioConfig& scenario, double tol = 1e-9);

/// Sequential admission-control MDP over one scenario. Single writer.
class SlicingEnv {
public:
  explicit SlicingEnv(ScenarioConfig scenario);

  /// Empty ledger, full capacity, slot 0 arrivals drawn. Slots without any
  /// arrivals are closed immediately (ledger is empty so they cost nothing).
  Observation reset(std::uint64_t seed);

  /// Decides the current request. Throws NoPendingRequest when none is left.
  StepOutcome step(AdmissionDecision decision);

  bool has_pending() const;
  std::optional<int> current_slice() const;
  bool done() const { return done_; }

  const ClusterState& state() const { return state_; }
  const ScenarioConfig& scenario() const { return scenario_; }
  Observation observation() const { return make_observation(state_, scenario_); }

  /// Records of every closed slot since reset.
  std::span<const SlotRecord> history() const { return history_; }
  /// Arrivals of the current slot per slice (pending plus decided).
  std::span<const int> slot_arrivals() const { return arrived_; }

private:
  double close_slot();
  void draw_arrivals();
  void advance();

  ScenarioConfig scenario_;
  ClusterState state_;
  bool done_ = true;
  Rng arrival_rng_, departure_rng_, power_rng_;

  std::vector<int> arrived_, admitted_, rejected_, infeasible_;
  std::vector<int> admitted_ids_;
  std::vector<SlotRecord> history_;
};

} // namespace slicearena
