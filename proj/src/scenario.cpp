#include "slicearena/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "slicearena/errors.hpp"

namespace slicearena {

namespace {

void require(bool ok, const char* field, const char* message) {
  if (!ok) {
    throw ValidationError(field, message);
  }
}

bool finite_positive(const ResourceVector& v) { return v.allFinite() && (v > 0.0).all(); }

} // namespace

const char* to_string(PowerMode mode) {
  switch (mode) {
  case PowerMode::utilization:
    return "utilization";
  case PowerMode::always_on:
    return "always-on";
  }
  return "?";
}

void SliceSpec::validate() const {
  require(std::isfinite(priority) && priority > 0.0, "priority", "must be positive");
  require(finite_positive(per_request_demand), "demand", "cpu, memory and storage must be positive");
  traffic.validate();
  require(chain_capacity >= 1, "chain_capacity", "must be at least 1");
  require(std::isfinite(arrival_mean) && arrival_mean >= 0.0, "arrival_mean", "must be non-negative");
  require(departure_prob >= 0.0 && departure_prob <= 1.0, "departure_prob", "must lie in [0, 1]");
}

void DataCenterSpec::validate() const {
  require(finite_positive(capacity), "capacity", "cpu, memory and storage must be positive");
  require(std::isfinite(power_lo) && power_lo > 0.0, "power_lo", "must be positive");
  require(std::isfinite(power_hi) && power_hi >= power_lo, "power_hi", "must be >= power_lo");
}

double ScenarioConfig::power_normalizer() const {
  double hi = 0.0;
  for (const auto& dc : data_centers) {
    hi = std::max(hi, dc.power_hi);
  }
  double chains = 0.0;
  for (const auto& s : slices) {
    chains += s.chain_capacity;
  }
  return chains * hi;
}

ScenarioConfig ScenarioConfig::with_arrival_mean(double mean) const {
  ScenarioConfig copy = *this;
  for (auto& s : copy.slices) {
    s.arrival_mean = mean;
  }
  return copy;
}

ScenarioConfig ScenarioConfig::with_chain_capacity(int capacity) const {
  ScenarioConfig copy = *this;
  for (auto& s : copy.slices) {
    s.chain_capacity = capacity;
  }
  return copy;
}

ScenarioConfig ScenarioConfig::with_kappa(double value) const {
  ScenarioConfig copy = *this;
  copy.kappa = value;
  return copy;
}

void ScenarioConfig::validate() const {
  require(!data_centers.empty(), "datacenter", "at least one data center is required");
  require(!slices.empty(), "slice", "at least one slice is required");
  std::set<int> ids;
  for (const auto& dc : data_centers) {
    dc.validate();
    require(ids.insert(dc.dc_id).second, "datacenter.id", "duplicate data center id");
  }
  ids.clear();
  for (const auto& s : slices) {
    s.validate();
    require(ids.insert(s.slice_id).second, "slice.id", "duplicate slice id");
  }
  require(std::isfinite(kappa) && kappa > 0.0, "kappa", "must be positive");
  require(std::isfinite(penalty) && penalty > 0.0, "penalty", "must be positive");
  require(horizon >= 1, "horizon", "must be at least 1");
  for (double a : arrival_sweep) {
    require(std::isfinite(a) && a >= 0.0, "arrival_sweep", "values must be non-negative");
  }
  require(!seeds.empty(), "seeds", "at least one seed is required");
}

} // namespace slicearena
