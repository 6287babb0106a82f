#pragma once

#include <filesystem>
#include <fstream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "slicearena/evaluation.hpp"

namespace slicearena {

inline constexpr const char* kMetricsHeader =
    "scenario,seed,slot,slice_id,arrived,admitted,rejected,infeasible,power,normalized_power,reward,"
    "model_index,attacked";

/// Fixed-point with at most 6 fractional digits, trailing zeros trimmed.
std::string format_decimal(double value);

void write_metric_rows(std::ostream& out, std::span<const MetricRecord> records);
void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricRecord> records);
std::vector<MetricRecord> read_metrics_csv(const std::filesystem::path& path);

/// Opens for writing with LF endings or throws IoError.
std::ofstream open_output(const std::filesystem::path& path);

} // namespace slicearena
