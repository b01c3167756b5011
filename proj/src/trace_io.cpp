#include "cpc/trace_io.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "cpc/errors.hpp"
#include "cpc/text.hpp"

namespace cpc {

namespace {

constexpr std::string_view kTraceHeader = "time_s,voltage_v";

void append_row(std::string& out, double a, double b) {
  out += format_number(a);
  out += ',';
  out += format_number(b);
  out += '\n';
}

}  // namespace

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw IoError("write failed on " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed on " + path);
  return text;
}

std::string trace_to_csv(const NoiseTrace& trace) {
  std::string out;
  out.reserve(32 * (trace.size() + 1));
  out += kTraceHeader;
  out += '\n';
  for (std::size_t i = 0; i < trace.size(); ++i)
    append_row(out, trace.time_at(i), trace.voltages[i]);
  return out;
}

void write_trace_csv(const std::string& path, const NoiseTrace& trace) {
  write_text_file(path, trace_to_csv(trace));
}

NoiseTrace parse_trace_csv(const std::string& text, const std::string& name) {
  NoiseTrace tr;
  std::vector<double> times;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string_view line(text.data() + pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_no == 1) {
      if (trim(line) != kTraceHeader)
        throw DataFormatError(name, 1, "expected header 'time_s,voltage_v'");
      continue;
    }
    if (trim(line).empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string_view::npos)
      throw DataFormatError(name, line_no, "expected two comma-separated fields");
    const auto t = parse_number(trim(line.substr(0, comma)));
    const auto v = parse_number(trim(line.substr(comma + 1)));
    if (!t || !v) throw DataFormatError(name, line_no, "malformed number");
    if (!std::isfinite(*t) || !std::isfinite(*v))
      throw DataFormatError(name, line_no, "non-finite value");
    times.push_back(*t);
    tr.voltages.push_back(*v);
  }
  if (line_no == 0) throw DataFormatError(name, 1, "empty file");
  if (times.size() < 2) throw DataFormatError(name, line_no, "need at least two samples");

  tr.start_time_s = times.front();
  tr.dt_s = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  if (!(tr.dt_s > 0.0)) throw DataFormatError(name, 3, "time must increase");
  const double step = times[1] - times[0];
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double expect = tr.start_time_s + static_cast<double>(i) * step;
    if (std::abs(times[i] - expect) > 1e-3 * tr.dt_s)
      throw DataFormatError(name, i + 2, "time grid is not uniform");
  }
  return tr;
}

NoiseTrace read_trace_csv(const std::string& path) {
  return parse_trace_csv(read_text_file(path), path);
}

void write_trajectory_csv(const std::string& path, const PhotonTrajectory& tr) {
  std::string out = "time_s,occupancy,temperature_k\n";
  out.reserve(48 * (tr.size() + 1));
  for (std::size_t i = 0; i < tr.size(); ++i) {
    out += format_number(tr.times_s[i]);
    out += ',';
    out += format_number(tr.occupancy[i]);
    out += ',';
    out += format_number(tr.temperature_k[i]);
    out += '\n';
  }
  write_text_file(path, out);
}

void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& columns) {
  if (header.size() != columns.size())
    throw std::invalid_argument("header and column counts differ");
  std::string out;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) out += ',';
    out += header[c];
  }
  out += '\n';
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out += ',';
      const double v = columns[c].at(r);
      out += std::isfinite(v) ? format_number(v) : std::string("nan");
    }
    out += '\n';
  }
  write_text_file(path, out);
}

std::string key_values_to_text(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

void write_key_values(const std::string& path, const KeyValues& kv) {
  write_text_file(path, key_values_to_text(kv));
}

KeyValues read_key_values(const std::string& path) {
  const std::string text = read_text_file(path);
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos)
      throw DataFormatError(path, line_no, "expected key=value");
    kv.emplace_back(std::string(trim(body.substr(0, eq))),
                    std::string(trim(body.substr(eq + 1))));
  }
  return kv;
}

}  // namespace cpc
