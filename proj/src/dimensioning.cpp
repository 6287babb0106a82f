#include "slicearena/dimensioning.hpp"

#include <cmath>
#include <string>

#include "slicearena/errors.hpp"

namespace slicearena {

namespace {

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

bool meets_budget(double service_rate, double arrival_rate, int vnf_count, double budget) {
  const double load = arrival_rate / vnf_count;
  if (service_rate <= load) {
    return false;
  }
  return 2.0 / (service_rate - load) <= budget;
}

} // namespace

void TrafficProfile::validate() const {
  if (!positive_finite(mean_arrival_rate)) {
    throw ValidationError("alpha", "mean arrival rate must be positive and finite");
  }
  if (!positive_finite(mean_service_rate)) {
    throw ValidationError("mu", "mean service rate must be positive and finite");
  }
  if (!positive_finite(delay_budget)) {
    throw ValidationError("t_max", "delay budget must be positive and finite");
  }
}

double mean_sojourn_time(double service_rate, double arrival_rate, int vnf_count) {
  if (vnf_count < 1) {
    throw ValidationError("vnf_count", "must be at least 1");
  }
  const double load = arrival_rate / vnf_count;
  if (!(service_rate > load)) {
    throw UnstableQueueError("unstable queue: service rate " + std::to_string(service_rate) +
                             " <= per-VNF arrival rate " + std::to_string(load));
  }
  return 1.0 / (service_rate - load);
}

DimensioningResult estimate_vnf_count(const TrafficProfile& profile) {
  profile.validate();
  const double alpha = profile.mean_arrival_rate;
  const double mu = profile.mean_service_rate;
  const double budget = profile.delay_budget;
  const double headroom = mu - 2.0 / budget;
  if (!(headroom > 0.0)) {
    throw InfeasibleBudgetError("no VNF count meets the delay budget: mu - 2 / t_max = " +
                                std::to_string(headroom));
  }
  const double bound = std::ceil(alpha / headroom);
  if (bound > 1e9) {
    throw InfeasibleBudgetError("required VNF count overflows");
  }
  int m = std::max(1, static_cast<int>(bound));
  // The closed form can land one off when alpha / headroom is an integer up to
  // rounding; settle on the smallest count that passes the budget check itself.
  while (!meets_budget(mu, alpha, m, budget)) {
    ++m;
  }
  while (m > 1 && meets_budget(mu, alpha, m - 1, budget)) {
    --m;
  }
  DimensioningResult result;
  result.vnf_count = m;
  result.per_stage_delay = mean_sojourn_time(mu, alpha, m);
  result.total_delay = 2.0 * result.per_stage_delay;
  return result;
}

} // namespace slicearena
