#pragma once

// Text formats: traces as `time_s,voltage_v` CSV, sidecars as key=value.

#include <string>
#include <utility>
#include <vector>

#include "cpc/dynamics.hpp"
#include "cpc/trace_synth.hpp"

namespace cpc {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

std::string trace_to_csv(const NoiseTrace& trace);
void write_trace_csv(const std::string& path, const NoiseTrace& trace);

/// Parses a trace CSV. Throws DataFormatError with the 1-based line number on
/// a bad header, a malformed row, a non-finite value or a non-uniform grid.
NoiseTrace parse_trace_csv(const std::string& text, const std::string& name);
NoiseTrace read_trace_csv(const std::string& path);

void write_trajectory_csv(const std::string& path, const PhotonTrajectory& tr);

/// Generic numeric table with a header row.
void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& columns);

std::string key_values_to_text(const KeyValues& kv);
void write_key_values(const std::string& path, const KeyValues& kv);
KeyValues read_key_values(const std::string& path);

/// Writes bytes to path, throwing IoError on failure.
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace cpc
