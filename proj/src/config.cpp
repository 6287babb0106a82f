#include "slicearena/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "slicearena/errors.hpp"

namespace slicearena {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_number(std::string_view text, std::size_t line) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(line, "expected a number, got '" + std::string(text) + "'");
  }
  return value;
}

int parse_int(std::string_view text, std::size_t line) {
  int value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(line, "expected an integer, got '" + std::string(text) + "'");
  }
  return value;
}

template <typename F>
void for_each_item(std::string_view list, F&& f) {
  while (!list.empty()) {
    const auto comma = list.find(',');
    f(trim(list.substr(0, comma)));
    if (comma == std::string_view::npos) {
      break;
    }
    list.remove_prefix(comma + 1);
  }
}

/// Key/value pairs of one section with the line each came from.
struct Section {
  std::string kind;
  std::size_t line = 0;
  std::map<std::string, std::pair<std::string, std::size_t>, std::less<>> entries;

  std::optional<std::pair<std::string_view, std::size_t>> get(std::string_view key) const {
    const auto it = entries.find(key);
    if (it == entries.end()) {
      return std::nullopt;
    }
    return std::make_pair(std::string_view(it->second.first), it->second.second);
  }

  double number(std::string_view key) const {
    const auto v = get(key);
    if (!v) {
      throw ValidationError(kind + "." + std::string(key), "missing required key");
    }
    return parse_number(v->first, v->second);
  }

  double number_or(std::string_view key, double fallback) const {
    const auto v = get(key);
    return v ? parse_number(v->first, v->second) : fallback;
  }
};

const std::map<std::string, std::vector<std::string>, std::less<>>& allowed_keys() {
  static const std::map<std::string, std::vector<std::string>, std::less<>> keys{
      {"", {"kappa", "penalty", "horizon", "arrival_sweep", "power_mode", "seeds"}},
      {"datacenter", {"id", "cpu", "memory", "storage", "power_lo", "power_hi"}},
      {"slice",
       {"id", "priority", "cpu", "memory", "storage", "alpha", "mu", "t_max", "chain_capacity", "arrival_mean",
        "departure_prob"}},
  };
  return keys;
}

} // namespace

ScenarioConfig parse_config(std::string_view text) {
  std::vector<Section> sections(1); // sections[0] holds the top-level keys
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);

    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ParseError(line_no, "unterminated section header");
      }
      const auto kind = trim(line.substr(1, line.size() - 2));
      if (kind != "datacenter" && kind != "slice") {
        throw ParseError(line_no, "unknown section [" + std::string(kind) + "]");
      }
      sections.push_back(Section{std::string(kind), line_no, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(line_no, "expected 'key = value'");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ParseError(line_no, "expected 'key = value'");
    }
    auto& section = sections.back();
    const auto& allowed = allowed_keys().find(section.kind)->second;
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ParseError(line_no, "unknown key '" + std::string(key) + "'" +
                                    (section.kind.empty() ? std::string() : " in [" + section.kind + "]"));
    }
    if (!section.entries.emplace(std::string(key), std::make_pair(std::string(value), line_no)).second) {
      throw ParseError(line_no, "duplicate key '" + std::string(key) + "'");
    }
  }

  ScenarioConfig config;
  const Section& top = sections.front();
  config.kappa = top.number_or("kappa", config.kappa);
  config.penalty = top.number_or("penalty", config.penalty);
  if (const auto v = top.get("horizon")) {
    config.horizon = parse_int(v->first, v->second);
  }
  if (const auto v = top.get("arrival_sweep")) {
    config.arrival_sweep.clear();
    for_each_item(v->first, [&](std::string_view item) { config.arrival_sweep.push_back(parse_number(item, v->second)); });
  }
  if (const auto v = top.get("power_mode")) {
    if (v->first == "utilization") {
      config.power_mode = PowerMode::utilization;
    } else if (v->first == "always-on") {
      config.power_mode = PowerMode::always_on;
    } else {
      throw ValidationError("power_mode", "expected 'utilization' or 'always-on'");
    }
  }
  if (const auto v = top.get("seeds")) {
    config.seeds.clear();
    for_each_item(v->first, [&](std::string_view item) {
      const auto dots = item.find("..");
      if (dots == std::string_view::npos) {
        config.seeds.push_back(static_cast<std::uint64_t>(parse_int(item, v->second)));
        return;
      }
      const int lo = parse_int(trim(item.substr(0, dots)), v->second);
      const int hi = parse_int(trim(item.substr(dots + 2)), v->second);
      for (int s = lo; s <= hi; ++s) {
        config.seeds.push_back(static_cast<std::uint64_t>(s));
      }
    });
  }

  for (std::size_t i = 1; i < sections.size(); ++i) {
    const Section& section = sections[i];
    const auto demand = [&] {
      return make_resources(section.number("cpu"), section.number("memory"), section.number("storage"));
    };
    if (section.kind == "datacenter") {
      DataCenterSpec dc;
      dc.dc_id = static_cast<int>(section.number_or("id", static_cast<double>(config.data_centers.size() + 1)));
      dc.capacity = demand();
      dc.power_lo = section.number("power_lo");
      dc.power_hi = section.number("power_hi");
      config.data_centers.push_back(dc);
    } else {
      SliceSpec slice;
      slice.slice_id = static_cast<int>(section.number_or("id", static_cast<double>(config.slices.size() + 1)));
      slice.priority = section.number_or("priority", 1.0);
      slice.per_request_demand = demand();
      slice.traffic.mean_arrival_rate = section.number("alpha");
      slice.traffic.mean_service_rate = section.number("mu");
      slice.traffic.delay_budget = section.number("t_max");
      slice.arrival_mean = section.number("arrival_mean");
      slice.departure_prob = section.number("departure_prob");
      if (const auto v = section.get("chain_capacity")) {
        slice.chain_capacity = parse_int(v->first, v->second);
      } else {
        slice.chain_capacity = estimate_vnf_count(slice.traffic).vnf_count;
      }
      config.slices.push_back(slice);
    }
  }
  config.validate();
  return config;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open config file " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

} // namespace slicearena
