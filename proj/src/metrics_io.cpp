#include "slicearena/metrics_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "slicearena/errors.hpp"

namespace slicearena {

std::string format_decimal(double value) {
  if (!std::isfinite(value)) {
    throw ValidationError("value", "non-finite metric");
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  std::string s(buf);
  while (!s.empty() && s.back() == '0') {
    s.pop_back();
  }
  if (!s.empty() && s.back() == '.') {
    s.pop_back();
  }
  if (s == "-0") {
    s = "0";
  }
  return s;
}

void write_metric_rows(std::ostream& out, std::span<const MetricRecord> records) {
  for (const auto& r : records) {
    out << r.scenario << ',' << r.seed << ',' << r.slot << ',' << r.slice_id << ',' << r.arrived << ','
        << r.admitted << ',' << r.rejected << ',' << r.infeasible << ',' << format_decimal(r.power) << ','
        << format_decimal(r.normalized_power) << ',' << format_decimal(r.reward) << ',' << r.model_index << ','
        << r.attacked << '\n';
  }
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  return out;
}

void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricRecord> records) {
  auto out = open_output(path);
  out << kMetricsHeader << '\n';
  write_metric_rows(out, records);
  if (!out) {
    throw IoError("write failed: " + path.string());
  }
}

namespace {

template <typename T>
T parse_field(std::string_view text, int line, const char* name) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError(line, std::string("bad ") + name + " '" + std::string(text) + "'");
  }
  return value;
}

} // namespace

std::vector<MetricRecord> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) {
    throw ParseError(1, "missing metrics header");
  }
  std::vector<MetricRecord> out;
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) {
      continue;
    }
    std::vector<std::string_view> f;
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      f.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) {
        break;
      }
      rest.remove_prefix(comma + 1);
    }
    if (f.size() != 13) {
      throw ParseError(number, "expected 13 fields");
    }
    MetricRecord r;
    r.scenario = std::string(f[0]);
    r.seed = parse_field<std::uint64_t>(f[1], number, "seed");
    r.slot = parse_field<int>(f[2], number, "slot");
    r.slice_id = parse_field<int>(f[3], number, "slice_id");
    r.arrived = parse_field<int>(f[4], number, "arrived");
    r.admitted = parse_field<int>(f[5], number, "admitted");
    r.rejected = parse_field<int>(f[6], number, "rejected");
    r.infeasible = parse_field<int>(f[7], number, "infeasible");
    r.power = parse_field<double>(f[8], number, "power");
    r.normalized_power = parse_field<double>(f[9], number, "normalized_power");
    r.reward = parse_field<double>(f[10], number, "reward");
    r.model_index = parse_field<int>(f[11], number, "model_index");
    r.attacked = parse_field<int>(f[12], number, "attacked");
    out.push_back(std::move(r));
  }
  return out;
}

} // namespace slicearena
