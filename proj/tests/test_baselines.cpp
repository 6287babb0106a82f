#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "slicearena/baselines.hpp"
#include "slicearena/errors.hpp"

namespace slicearena {
namespace {

using D = AdmissionDecision;

ClusterState state_for(const ScenarioConfig& sc, std::vector<int> pending) {
  ClusterState st;
  for (const auto& dc : sc.data_centers) {
    st.remaining.push_back(dc.capacity);
  }
  st.pending = std::move(pending);
  return st;
}

TEST(EnumerateAssignments, Counts) {
  const std::vector<int> one{0}, two{0, 0};
  EXPECT_EQ(enumerate_assignments(one, 2).size(), 3u);
  const auto nine = enumerate_assignments(two, 2);
  ASSERT_EQ(nine.size(), 9u);
  EXPECT_EQ(nine.front(), (std::vector<D>{D::reject(), D::reject()}));
  EXPECT_EQ(nine[1], (std::vector<D>{D::reject(), D::to_dc(0)}));
  EXPECT_EQ(nine.back(), (std::vector<D>{D::to_dc(1), D::to_dc(1)}));
  const std::vector<int> thirteen(13, 0);
  EXPECT_THROW(enumerate_assignments(thirteen, 2), InstanceTooLarge);
}

TEST(PendingRequestSlices, SliceMajor) {
  ClusterState st;
  st.pending = {2, 0, 1};
  EXPECT_EQ(pending_request_slices(st), (std::vector<int>{0, 0, 2}));
}

TEST(MyopicExhaustive, LoneRequestFitsOnlySecondDc) {
  auto sc = testing::small_scenario(1, 0.0, 150.0, 150.0);
  ClusterState st = state_for(sc, {1});
  st.remaining[0] = make_resources(1, 50, 5000);
  const SlotProblem problem{st, sc, midpoint_power_estimate(sc), 1000.0};
  const std::vector<int> pending{0};
  const auto best = myopic_exhaustive_decision(pending, problem);
  EXPECT_EQ(best.decisions, (std::vector<D>{D::to_dc(1)}));
  EXPECT_DOUBLE_EQ(best.cost, 150.0 - 1000.0);
}

TEST(MyopicExhaustive, RoomForOneAdmitsNoneWhenPowerExceedsKappa) {
  auto sc = testing::small_scenario(1, 0.0, 150.0, 150.0);
  ClusterState st = state_for(sc, {2});
  st.remaining[0] = sc.slices[0].per_request_demand;
  st.remaining[1] = make_resources(0, 0, 0);
  const std::vector<int> pending{0, 0};
  const SlotProblem low{st, sc, midpoint_power_estimate(sc), 100.0};
  // Costs by hand: reject both 0; admit one 150 - 100 = 50; admit two infeasible.
  const auto none = myopic_exhaustive_decision(pending, low);
  EXPECT_EQ(none.decisions, (std::vector<D>{D::reject(), D::reject()}));
  EXPECT_DOUBLE_EQ(none.cost, 0.0);
  const SlotProblem high{st, sc, midpoint_power_estimate(sc), 1000.0};
  const auto one = myopic_exhaustive_decision(pending, high);
  // (REJECT, DC1) and (DC1, REJECT) tie at -850; the smaller vector wins.
  EXPECT_EQ(one.decisions, (std::vector<D>{D::reject(), D::to_dc(0)}));
  EXPECT_DOUBLE_EQ(one.cost, -850.0);
}

TEST(MyopicExhaustive, NothingFitsRejectsAll) {
  auto sc = testing::small_scenario(2, 0.0);
  ClusterState st = state_for(sc, {2, 1});
  for (auto& r : st.remaining) {
    r = make_resources(1, 1, 1);
  }
  const std::vector<int> pending{0, 0, 1};
  const SlotProblem problem{st, sc, midpoint_power_estimate(sc), 1e6};
  const auto best = myopic_exhaustive_decision(pending, problem);
  EXPECT_EQ(best.decisions, std::vector<D>(3, D::reject()));
}

TEST(MyopicExhaustive, SingleRequestIsArgminOfHandCosts) {
  const auto sc = testing::small_scenario(2, 0.0);
  ClusterState st = state_for(sc, {0, 1});
  st.active_chains.push_back({0, 0, 180.0, 0});
  const std::vector<double> power{160.0, 140.0};
  const std::vector<int> pending{1};
  for (double kappa : {1.0, 100.0, 150.0, 1000.0}) {
    const SlotProblem problem{st, sc, power, kappa};
    const double costs[3] = {180.0, 180.0 + 160.0 - kappa, 180.0 + 140.0 - kappa};
    int arg = 0;
    for (int k = 1; k < 3; ++k) {
      if (costs[k] < costs[arg]) {
        arg = k;
      }
    }
    const auto best = myopic_exhaustive_decision(pending, problem);
    EXPECT_EQ(best.decisions[0].action(), arg) << "kappa " << kappa;
    EXPECT_DOUBLE_EQ(best.cost, costs[arg]);
  }
}

struct RandomInstance {
  ScenarioConfig scenario;
  ClusterState state;
  std::vector<double> power;
  double kappa;
};

RandomInstance random_instance(Rng& rng) {
  std::uniform_int_distribution<int> count(0, 4), caps(1, 4), active(0, 3);
  std::uniform_real_distribution<double> frac(0.0, 1.0), pw(100.0, 200.0);
  RandomInstance inst{testing::small_scenario(2, 0.0), {}, {}, 0.0};
  for (auto& s : inst.scenario.slices) {
    s.chain_capacity = caps(rng);
  }
  inst.state = state_for(inst.scenario, {count(rng), count(rng)});
  for (auto& r : inst.state.remaining) {
    r = make_resources(32 * frac(rng), 50 * frac(rng), 5000 * frac(rng));
  }
  for (int s = 0; s < 2; ++s) {
    const int cap = inst.scenario.slices[static_cast<std::size_t>(s)].chain_capacity;
    for (int k = std::min(active(rng), cap); k > 0; --k) {
      inst.state.active_chains.push_back({s, k % 2, pw(rng), 0});
    }
  }
  const bool ties = frac(rng) < 0.5;
  inst.power = ties ? midpoint_power_estimate(inst.scenario) : std::vector<double>{pw(rng), pw(rng)};
  const double kappas[] = {1.0, 100.0, 160.0, 1000.0};
  inst.kappa = kappas[std::uniform_int_distribution<int>(0, 3)(rng)];
  return inst;
}

TEST(MyopicExhaustive, SelfConsistentOnRandomInstances) {
  Rng rng(2718);
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = random_instance(rng);
    const auto pending = pending_request_slices(inst.state);
    const SlotProblem problem{inst.state, inst.scenario, inst.power, inst.kappa};
    const auto best = myopic_exhaustive_decision(pending, problem);
    ASSERT_TRUE(assignment_feasible(problem, pending, best.decisions));
    for (const auto& candidate : enumerate_assignments(pending, 2)) {
      if (assignment_feasible(problem, pending, candidate)) {
        const double cost = assignment_cost(problem, pending, candidate);
        ASSERT_LE(best.cost, cost);
        if (cost == best.cost) {
          // Ties resolve to the lexicographically smallest vector.
          ASSERT_FALSE(std::lexicographical_compare(candidate.begin(), candidate.end(), best.decisions.begin(),
                                                    best.decisions.end(), [](const D& a, const D& b) {
                                                      return a.action() < b.action();
                                                    }));
        }
      }
    }
  }
}

TEST(CountExhaustive, AgreesWithFullEnumeration) {
  Rng rng(31415);
  for (int trial = 0; trial < 300; ++trial) {
    const auto inst = random_instance(rng);
    const auto pending = pending_request_slices(inst.state);
    const SlotProblem problem{inst.state, inst.scenario, inst.power, inst.kappa};
    const auto full = myopic_exhaustive_decision(pending, problem);
    const auto fast = count_exhaustive_decision(pending, problem);
    ASSERT_EQ(fast.decisions, full.decisions) << "trial " << trial;
    ASSERT_EQ(fast.cost, full.cost);
  }
}

TEST(CountExhaustive, ScalesToFullSlots) {
  const auto sc = testing::reference_scenario();
  const ClusterState st = state_for(sc, {20, 20});
  const SlotProblem problem{st, sc, midpoint_power_estimate(sc), sc.kappa};
  const auto pending = pending_request_slices(st);
  const auto best = count_exhaustive_decision(pending, problem);
  ASSERT_EQ(best.decisions.size(), 40u);
  int admitted = 0;
  for (const auto& d : best.decisions) {
    admitted += !d.is_reject();
  }
  EXPECT_EQ(admitted, 16); // both caps: 4 + 4 chains per DC use 48 GB and 20 cores
  EXPECT_TRUE(assignment_feasible(problem, pending, best.decisions));
}

TEST(RandomPolicy, UniformAndReproducible) {
  Rng rng(1);
  int counts[3] = {0, 0, 0};
  const int n = 30000;
  for (int k = 0; k < n; ++k) {
    ++counts[random_policy_decision(2, rng).action()];
  }
  for (int c : counts) {
    EXPECT_NEAR(static_cast<double>(c) / n, 1.0 / 3.0, 0.02);
  }
  Rng a(4), b(4);
  for (int k = 0; k < 50; ++k) {
    EXPECT_EQ(random_policy_decision(2, a), random_policy_decision(2, b));
  }
  for (int k = 0; k < 50; ++k) {
    EXPECT_TRUE(random_policy_decision(0, a).is_reject());
  }
}

TEST(ExhaustivePolicy, AdmitsAtLeastAsMuchAsRandomWhenKappaLarge) {
  const auto sc = testing::reference_scenario();
  double exhaustive = 0.0, random = 0.0;
  for (std::uint64_t seed : sc.seeds) {
    ExhaustivePolicy ex(sc.kappa);
    RandomPolicy rp(seed);
    exhaustive += run_episode(sc, seed, ex, std::nullopt, "optimal").admission_rate;
    random += run_episode(sc, seed, rp, std::nullopt, "random").admission_rate;
  }
  EXPECT_GE(exhaustive, random);
}

} // namespace
} // namespace slicearena
