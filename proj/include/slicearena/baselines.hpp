#pragma once

#include <span>
#include <vector>

#include "slicearena/environment.hpp"
#include "slicearena/evaluation.hpp"
#include "slicearena/rng.hpp"

namespace slicearena {

/// Guard on (N + 1)^(#pending) for exhaustive enumeration.
inline constexpr long long kEnumerationLimit = 1'000'000;

/// Uniform over {REJECT, DC 1..N} with no feasibility lookahead.
AdmissionDecision random_policy_decision(int dc_count, Rng& rng);

/// Every joint assignment of the pending requests (slice indices, in
/// presentation order) to {REJECT, 1..N}, in lexicographic order.
/// Throws InstanceTooLarge when (N + 1)^k exceeds kEnumerationLimit.
std::vector<std::vector<AdmissionDecision>> enumerate_assignments(std::span<const int> pending_slices, int dc_count);

/// Pending requests of the current slot in presentation order (slice-major).
std::vector<int> pending_request_slices(const ClusterState& state);

/// Inputs of the single-slot placement problem. `power_estimate[n]` is the
/// per-chain power assumed for a new chain on data center n.
struct SlotProblem {
  const ClusterState& state;
  const ScenarioConfig& scenario;
  std::vector<double> power_estimate;
  double kappa = 0.0;
};

/// Per-chain power the planner assumes: the midpoint of each DC's range.
std::vector<double> midpoint_power_estimate(const ScenarioConfig& scenario);

struct JointAssignment {
  std::vector<AdmissionDecision> decisions;
  double cost = 0.0; // expected slot cost: current power + sum(estimate - kappa p) over admissions
};

/// Applies the decisions in order, checking resources and slice caps
/// cumulatively.
bool assignment_feasible(const SlotProblem& problem, std::span<const int> pending_slices,
                         std::span<const AdmissionDecision> decisions);

double assignment_cost(const SlotProblem& problem, std::span<const int> pending_slices,
                       std::span<const AdmissionDecision> decisions);

/// Brute force over enumerate_assignments: the feasible assignment of least
/// cost, ties to the lexicographically smallest vector.
JointAssignment myopic_exhaustive_decision(std::span<const int> pending_slices, const SlotProblem& problem);

/// Same optimum as myopic_exhaustive_decision, found by enumerating
/// per-(slice, DC) admission counts instead of per-request choices. Requests
/// of one slice are interchangeable, so this scales to full slots.
JointAssignment count_exhaustive_decision(std::span<const int> pending_slices, const SlotProblem& problem);

class RandomPolicy : public DecisionPolicy {
public:
  explicit RandomPolicy(std::uint64_t seed) : rng_(make_rng(seed, Stream::policy)) {}
  AdmissionDecision decide(const SlicingEnv& env, const Observation& seen) override;

private:
  Rng rng_;
};

/// Plans each slot with count_exhaustive_decision at the slot start and
/// replays the plan request by request.
class ExhaustivePolicy : public DecisionPolicy {
public:
  explicit ExhaustivePolicy(double kappa) : kappa_(kappa) {}
  void begin_slot(const SlicingEnv& env) override;
  AdmissionDecision decide(const SlicingEnv& env, const Observation& seen) override;

private:
  double kappa_;
  std::vector<AdmissionDecision> plan_;
  std::size_t next_ = 0;
};

} // namespace slicearena
