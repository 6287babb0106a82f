#include "slicearena/baselines.hpp"

#include <algorithm>
#include <functional>

#include "slicearena/errors.hpp"

namespace slicearena {

namespace {

using Counts = std::vector<std::vector<int>>; // [slice][dc]

// Power a new chain is assumed to add on top of what the slot already draws.
std::vector<double> marginal_power(const SlotProblem& problem) {
  std::vector<double> marginal = problem.power_estimate;
  if (problem.scenario.power_mode == PowerMode::always_on) {
    double idle = 0.0;
    for (const auto& dc : problem.scenario.data_centers) {
      idle += dc.power_mid();
    }
    idle /= problem.scenario.dc_count();
    for (double& m : marginal) {
      m -= idle;
    }
  }
  return marginal;
}

// Both solvers price an assignment through its counts so equal assignments
// produce bit-identical costs.
double cost_from_counts(const SlotProblem& problem, const Counts& counts) {
  const std::vector<double> marginal = marginal_power(problem);
  double cost = total_power(problem.state, problem.scenario);
  for (std::size_t s = 0; s < counts.size(); ++s) {
    const double value = problem.kappa * problem.scenario.slices[s].priority;
    for (std::size_t n = 0; n < counts[s].size(); ++n) {
      cost += counts[s][n] * (marginal[n] - value);
    }
  }
  return cost;
}

bool counts_feasible(const SlotProblem& problem, const Counts& counts) {
  const auto& scenario = problem.scenario;
  for (int n = 0; n < scenario.dc_count(); ++n) {
    ResourceVector need = ResourceVector::Zero();
    for (int s = 0; s < scenario.slice_count(); ++s) {
      need += counts[static_cast<std::size_t>(s)][static_cast<std::size_t>(n)] *
              scenario.slices[static_cast<std::size_t>(s)].per_request_demand;
    }
    if (!fits(problem.state.remaining[static_cast<std::size_t>(n)], need)) {
      return false;
    }
  }
  for (int s = 0; s < scenario.slice_count(); ++s) {
    int added = 0;
    for (int c : counts[static_cast<std::size_t>(s)]) {
      added += c;
    }
    if (added > 0 && problem.state.active_count(s) + added > scenario.slices[static_cast<std::size_t>(s)].chain_capacity) {
      return false;
    }
  }
  return true;
}

Counts tally(const SlotProblem& problem, std::span<const int> pending_slices,
             std::span<const AdmissionDecision> decisions) {
  if (pending_slices.size() != decisions.size()) {
    throw DimensionMismatch("one decision per pending request is required");
  }
  Counts counts(static_cast<std::size_t>(problem.scenario.slice_count()),
                std::vector<int>(static_cast<std::size_t>(problem.scenario.dc_count()), 0));
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    if (decisions[i].is_reject()) {
      continue;
    }
    const int dc = decisions[i].dc_index();
    if (dc < 0 || dc >= problem.scenario.dc_count()) {
      throw ValidationError("decision", "data center index out of range");
    }
    ++counts.at(static_cast<std::size_t>(pending_slices[i]))[static_cast<std::size_t>(dc)];
  }
  return counts;
}

// Lexicographically smallest request sequence with the given counts: within
// each slice block rejects come first, then DC 1, DC 2, ...
std::vector<AdmissionDecision> canonical_sequence(std::span<const int> pending_slices, const Counts& counts) {
  std::vector<AdmissionDecision> out;
  out.reserve(pending_slices.size());
  std::size_t i = 0;
  while (i < pending_slices.size()) {
    const int s = pending_slices[i];
    std::size_t j = i;
    while (j < pending_slices.size() && pending_slices[j] == s) {
      ++j;
    }
    const auto& c = counts[static_cast<std::size_t>(s)];
    int admitted = 0;
    for (int v : c) {
      admitted += v;
    }
    const int rejects = static_cast<int>(j - i) - admitted;
    for (int r = 0; r < rejects; ++r) {
      out.push_back(AdmissionDecision::reject());
    }
    for (std::size_t n = 0; n < c.size(); ++n) {
      for (int r = 0; r < c[n]; ++r) {
        out.push_back(AdmissionDecision::to_dc(static_cast<int>(n)));
      }
    }
    i = j;
  }
  return out;
}

bool lex_less(std::span<const AdmissionDecision> a, std::span<const AdmissionDecision> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                      [](const AdmissionDecision& x, const AdmissionDecision& y) {
                                        return x.action() < y.action();
                                      });
}

} // namespace

AdmissionDecision random_policy_decision(int dc_count, Rng& rng) {
  return AdmissionDecision::from_action(std::uniform_int_distribution<int>(0, dc_count)(rng));
}

std::vector<std::vector<AdmissionDecision>> enumerate_assignments(std::span<const int> pending_slices, int dc_count) {
  const std::size_t k = pending_slices.size();
  const int radix = dc_count + 1;
  long long total = 1;
  for (std::size_t i = 0; i < k; ++i) {
    total *= radix;
    if (total > kEnumerationLimit) {
      throw InstanceTooLarge("(N + 1)^k exceeds the enumeration limit");
    }
  }
  std::vector<std::vector<AdmissionDecision>> out;
  out.reserve(static_cast<std::size_t>(total));
  std::vector<int> digits(k, 0);
  for (long long idx = 0; idx < total; ++idx) {
    std::vector<AdmissionDecision> row;
    row.reserve(k);
    for (int d : digits) {
      row.push_back(AdmissionDecision::from_action(d));
    }
    out.push_back(std::move(row));
    for (std::size_t pos = k; pos-- > 0;) {
      if (++digits[pos] < radix) {
        break;
      }
      digits[pos] = 0;
    }
  }
  return out;
}

std::vector<int> pending_request_slices(const ClusterState& state) {
  std::vector<int> out;
  for (std::size_t s = 0; s < state.pending.size(); ++s) {
    out.insert(out.end(), static_cast<std::size_t>(state.pending[s]), static_cast<int>(s));
  }
  return out;
}

std::vector<double> midpoint_power_estimate(const ScenarioConfig& scenario) {
  std::vector<double> out;
  for (const auto& dc : scenario.data_centers) {
    out.push_back(dc.power_mid());
  }
  return out;
}

bool assignment_feasible(const SlotProblem& problem, std::span<const int> pending_slices,
                         std::span<const AdmissionDecision> decisions) {
  // Demands are non-negative, so the cumulative check reduces to the totals.
  return counts_feasible(problem, tally(problem, pending_slices, decisions));
}

double assignment_cost(const SlotProblem& problem, std::span<const int> pending_slices,
                       std::span<const AdmissionDecision> decisions) {
  return cost_from_counts(problem, tally(problem, pending_slices, decisions));
}

JointAssignment myopic_exhaustive_decision(std::span<const int> pending_slices, const SlotProblem& problem) {
  const auto candidates = enumerate_assignments(pending_slices, problem.scenario.dc_count());
  JointAssignment best;
  bool found = false;
  for (const auto& candidate : candidates) {
    const Counts counts = tally(problem, pending_slices, candidate);
    if (!counts_feasible(problem, counts)) {
      continue;
    }
    const double cost = cost_from_counts(problem, counts);
    if (!found || cost < best.cost) {
      best.decisions = candidate;
      best.cost = cost;
      found = true;
    }
  }
  return best; // all-reject is always feasible, so found is true
}

JointAssignment count_exhaustive_decision(std::span<const int> pending_slices, const SlotProblem& problem) {
  const int slices = problem.scenario.slice_count();
  const int dcs = problem.scenario.dc_count();
  std::vector<int> pending(static_cast<std::size_t>(slices), 0);
  for (int s : pending_slices) {
    ++pending.at(static_cast<std::size_t>(s));
  }
  Counts counts(static_cast<std::size_t>(slices), std::vector<int>(static_cast<std::size_t>(dcs), 0));
  JointAssignment best;
  bool found = false;
  long long visited = 0;

  // Depth-first over (slice, dc) cells; a cell's count is bounded by the
  // slice's unplaced requests and its free cap.
  std::function<void(int, int, int)> visit = [&](int s, int n, int left) {
    if (s == slices) {
      if (++visited > 100 * kEnumerationLimit) {
        throw InstanceTooLarge("count enumeration exceeds the limit");
      }
      if (!counts_feasible(problem, counts)) {
        return;
      }
      const double cost = cost_from_counts(problem, counts);
      if (found && cost > best.cost) {
        return;
      }
      auto sequence = canonical_sequence(pending_slices, counts);
      if (!found || cost < best.cost || lex_less(sequence, best.decisions)) {
        best.decisions = std::move(sequence);
        best.cost = cost;
        found = true;
      }
      return;
    }
    if (n == dcs) {
      const int next = s + 1;
      if (next == slices) {
        visit(next, 0, 0);
      } else {
        const auto& spec = problem.scenario.slices[static_cast<std::size_t>(next)];
        const int room = std::max(0, spec.chain_capacity - problem.state.active_count(next));
        visit(next, 0, std::min(pending[static_cast<std::size_t>(next)], room));
      }
      return;
    }
    auto& cell = counts[static_cast<std::size_t>(s)][static_cast<std::size_t>(n)];
    for (int c = 0; c <= left; ++c) {
      cell = c;
      visit(s, n + 1, left - c);
    }
    cell = 0;
  };

  if (slices > 0) {
    const auto& spec = problem.scenario.slices[0];
    const int room = std::max(0, spec.chain_capacity - problem.state.active_count(0));
    visit(0, 0, std::min(pending[0], room));
  }
  return best;
}

AdmissionDecision RandomPolicy::decide(const SlicingEnv& env, const Observation& seen) {
  (void)seen;
  return random_policy_decision(env.scenario().dc_count(), rng_);
}

void ExhaustivePolicy::begin_slot(const SlicingEnv& env) {
  const SlotProblem problem{env.state(), env.scenario(), midpoint_power_estimate(env.scenario()), kappa_};
  plan_ = count_exhaustive_decision(pending_request_slices(env.state()), problem).decisions;
  next_ = 0;
}

AdmissionDecision ExhaustivePolicy::decide(const SlicingEnv& env, const Observation& seen) {
  (void)env;
  (void)seen;
  if (next_ >= plan_.size()) {
    throw NoPendingRequest("exhaustive plan is exhausted");
  }
  return plan_[next_++];
}

} // namespace slicearena
