#pragma once

namespace slicearena {

struct ScenarioConfig;

/// Long-run traffic of one slice as seen by its O-DU and O-CU VNF pools.
/// Rates and the budget are unitless but mutually consistent.
struct TrafficProfile {
  double mean_arrival_rate = 0.0;
  double mean_service_rate = 0.0; // per VNF, identical for O-DU and O-CU
  double delay_budget = 0.0;      // bound on the two-stage mean delay

  void validate() const; // throws ValidationError
};

struct DimensioningResult {
  int vnf_count = 1;
  double per_stage_delay = 0.0;
  double total_delay = 0.0; // two identical independent stages
};

/// Mean sojourn time of one M/M/1 server when `arrival_rate` is split evenly
/// over `vnf_count` servers: 1 / (mu - alpha / M).
/// Throws UnstableQueueError when mu <= alpha / M.
double mean_sojourn_time(double service_rate, double arrival_rate, int vnf_count);

/// Smallest M >= 1 with 2 * mean_sojourn_time(mu, alpha, M) <= budget. Agrees with
/// ceil(alpha / (mu - 2 / budget)) whenever that is >= 1.
/// Throws InfeasibleBudgetError when mu <= 2 / budget.
DimensioningResult estimate_vnf_count(const TrafficProfile& profile);

/// Relative extra power of running every slice with `inflated_count` chains
/// instead of `base.vnf_count`. Both runs use the myopic optimal policy on the same
/// seeds (scenario.seeds) so traffic is identical; returns
/// (mean_power_inflated - mean_power_base) / mean_power_base.
double overprovision_power_ratio(const DimensioningResult& base, int inflated_count,
                                 const ScenarioConfig& scenario);

} // namespace slicearena
