#include "slicearena/policy.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "slicearena/environment.hpp"
#include "slicearena/errors.hpp"

namespace slicearena {

std::pair<int, double> sample_action(const PolicyOutput<double>& output, Rng& rng) {
  const auto& p = output.action_probabilities;
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double cumulative = 0.0;
  int action = static_cast<int>(p.size()) - 1;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    cumulative += p(i);
    if (u < cumulative) {
      action = static_cast<int>(i);
      break;
    }
  }
  // Rounding can leave the last entries unreachable; never return a zero-probability action.
  while (action > 0 && p(action) <= 0.0) {
    --action;
  }
  return {action, std::log(p(action))};
}

int greedy_action(const PolicyOutput<double>& output) {
  Eigen::Index best = 0;
  output.action_probabilities.maxCoeff(&best);
  return static_cast<int>(best);
}

namespace {

constexpr const char* kCheckpointMagic = "SLICE-ARENA-PPO v1";

std::string format_parameter(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

} // namespace

std::string serialize_checkpoint(const PolicyParams& params) {
  std::string out;
  out += kCheckpointMagic;
  out += '\n';
  out += std::to_string(kObservationLayoutVersion);
  out += '\n';
  const auto& dims = params.actor.dims();
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i > 0) {
      out += ' ';
    }
    out += std::to_string(dims[i]);
  }
  out += '\n';
  const Eigen::VectorXd flat = params.flatten();
  for (Eigen::Index i = 0; i < flat.size(); ++i) {
    out += format_parameter(flat(i));
    out += '\n';
  }
  return out;
}

PolicyParams deserialize_checkpoint(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCheckpointMagic) {
    throw ParseError(1, "not a SLICE-ARENA-PPO v1 checkpoint");
  }
  if (!std::getline(in, line) || line != std::to_string(kObservationLayoutVersion)) {
    throw ParseError(2, "unsupported observation layout version '" + line + "'");
  }
  if (!std::getline(in, line)) {
    throw ParseError(3, "missing layer dimensions");
  }
  std::vector<int> dims;
  {
    std::istringstream dim_stream(line);
    int d = 0;
    while (dim_stream >> d) {
      dims.push_back(d);
    }
    if (dims.size() < 2 || !dim_stream.eof()) {
      throw ParseError(3, "malformed layer dimensions");
    }
  }
  const std::vector<int> hidden(dims.begin() + 1, dims.end() - 1);
  PolicyParams params(dims.front(), hidden, dims.back());
  Eigen::VectorXd flat(params.parameter_count());
  std::size_t line_no = 3;
  for (Eigen::Index i = 0; i < flat.size(); ++i) {
    ++line_no;
    if (!std::getline(in, line)) {
      throw ParseError(line_no, "checkpoint truncated");
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), value);
    if (ec != std::errc() || ptr != line.data() + line.size() || !std::isfinite(value)) {
      throw ParseError(line_no, "malformed parameter '" + line + "'");
    }
    flat(i) = value;
  }
  if (std::getline(in, line)) {
    throw ParseError(line_no + 1, "trailing data after parameters");
  }
  params.read_flat(flat);
  return params;
}

void save_checkpoint(const PolicyParams& params, const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write checkpoint " + path.string());
  }
  out << serialize_checkpoint(params);
  if (!out) {
    throw IoError("failed writing checkpoint " + path.string());
  }
}

PolicyParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw MissingCheckpoint("checkpoint not found: " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return deserialize_checkpoint(buffer.str());
}

} // namespace slicearena
