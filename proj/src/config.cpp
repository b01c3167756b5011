#include "cpc/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "cpc/errors.hpp"
#include "cpc/text.hpp"
#include "cpc/trace_io.hpp"

namespace cpc {

namespace {

using Setter = std::function<void(std::string_view)>;

struct Field {
  Setter set;
  std::function<std::string()> get;
};

[[noreturn]] void bad_value(std::string_view what) {
  throw std::invalid_argument(std::string(what));
}

double to_double(std::string_view v) {
  auto d = parse_number(v);
  if (!d) bad_value("expected a number");
  return *d;
}

std::uint64_t to_u64(std::string_view v) {
  std::uint64_t out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    bad_value("expected a non-negative integer");
  return out;
}

bool to_bool(std::string_view v) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  bad_value("expected true or false");
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

Field num(double& x) {
  return {[&x](std::string_view v) { x = to_double(v); }, [&x] { return format_number(x); }};
}
Field size(std::size_t& x) {
  return {[&x](std::string_view v) { x = static_cast<std::size_t>(to_u64(v)); },
          [&x] { return std::to_string(x); }};
}
Field u64(std::uint64_t& x) {
  return {[&x](std::string_view v) { x = to_u64(v); }, [&x] { return std::to_string(x); }};
}
Field flag(bool& x) {
  return {[&x](std::string_view v) { x = to_bool(v); }, [&x] { return bool_text(x); }};
}
Field complex_part(std::complex<double>& z, bool real) {
  return {[&z, real](std::string_view v) {
            const double d = to_double(v);
            z = real ? std::complex<double>(d, z.imag()) : std::complex<double>(z.real(), d);
          },
          [&z, real] { return format_number(real ? z.real() : z.imag()); }};
}

using FieldTable = std::vector<std::pair<std::string, Field>>;

FieldTable mode_fields(RunConfig& c) {
  return {{"frequency_hz", num(c.mode.frequency_hz)},
          {"intrinsic_q", num(c.mode.intrinsic_q)},
          {"intrinsic_temperature_k", num(c.intrinsic_temperature_k)}};
}

FieldTable port_fields(NamedPort& p) {
  return {{"role",
           {[&p](std::string_view v) {
              if (v == "cooling")
                p.role = PortRole::Cooling;
              else if (v == "monitor")
                p.role = PortRole::Monitor;
              else
                bad_value("expected cooling or monitor");
            },
            [&p] { return to_string(p.role); }}},
          {"kappa", num(p.port.coupling_kappa)},
          {"load_temperature_k", num(p.port.load_temperature_k)},
          {"link_loss_db", num(p.port.link_loss_db)},
          {"link_temperature_k", num(p.port.link_temperature_k)},
          {"loss_model",
           {[&p](std::string_view v) {
              auto m = parse_loss_model(v);
              if (!m) bad_value("expected exact, linear or none");
              p.port.loss_model = *m;
            },
            [&p] { return to_string(p.port.loss_model); }}}};
}

FieldTable receiver_fields(RunConfig& c) {
  auto& r = c.receiver;
  return {{"t_min_k", num(r.front_end.t_min_k)},
          {"noise_resistance_ohm", num(r.front_end.noise_resistance_ohm)},
          {"gamma_opt_re", complex_part(r.front_end.gamma_opt, true)},
          {"gamma_opt_im", complex_part(r.front_end.gamma_opt, false)},
          {"gain_linear", num(r.front_end.linear_gain)},
          {"reference_z0_ohm", num(r.front_end.reference_z0_ohm)},
          {"reference_t0_k", num(r.front_end.reference_t0_k)},
          {"t_rec_k", num(r.t_rec_k)},
          {"gamma_c_re", complex_part(r.gamma_c, true)},
          {"gamma_c_im", complex_part(r.gamma_c, false)},
          {"t_image_k", num(r.t_image_k)}};
}

FieldTable protocol_fields(RunConfig& c) {
  auto& p = c.protocol;
  return {{"cool_duration_s", num(p.cool_duration_s)},
          {"interrogate_delay_s", num(p.interrogate_delay_s)},
          {"record_start_s", num(p.record_start_s)},
          {"record_length_s", num(p.record_length_s)},
          {"trajectory_dt_s", num(p.trajectory_dt_s)}};
}

FieldTable synth_fields(RunConfig& c) {
  auto& s = c.synth;
  return {{"sample_interval_s", num(s.sample_interval_s)},
          {"one_over_f_corner_hz", num(s.one_over_f_corner_hz)},
          {"artifact_duration_s", num(s.artifact_duration_s)},
          {"artifact_amplitude_v", num(s.artifact_amplitude_v)},
          {"voltage_scale_v_per_sqrt_k", num(s.voltage_scale)},
          {"seed", u64(s.seed)},
          {"shots", size(s.shots)}};
}

FieldTable analysis_fields(RunConfig& c) {
  auto& a = c.analysis;
  return {{"boxcar_width_s", num(a.extraction.boxcar_width_s)},
          {"window_s", num(a.window_s)},
          {"exclude_before_s", num(a.exclude_before_s)},
          {"fit_end_s", num(a.fit_end_s)},
          {"reference_start_s", num(a.reference_start_s)},
          {"reference_end_s", num(a.reference_end_s)},
          {"band_lo_hz", num(a.band_lo_hz)},
          {"band_hi_hz", num(a.band_hi_hz)},
          {"psd_segment_length", size(a.psd_segment_length)},
          {"cold_section_s", num(a.cold_section_s)},
          {"compute_psd", flag(a.compute_psd)}};
}

FieldTable sweep_fields(RunConfig& c) {
  auto& s = c.sweep;
  return {{"kappa_min", num(s.kappa_min)},
          {"kappa_max", num(s.kappa_max)},
          {"kappa_points", size(s.kappa_points)},
          {"kappa_log", flag(s.kappa_log)},
          {"t_cold_min_k", num(s.t_cold_min_k)},
          {"t_cold_max_k", num(s.t_cold_max_k)},
          {"t_cold_points", size(s.t_cold_points)},
          {"fixed_ports", flag(s.fixed_ports)}};
}

FieldTable section_fields(RunConfig& c, const std::string& section) {
  if (section == "mode") return mode_fields(c);
  if (section == "receiver") return receiver_fields(c);
  if (section == "protocol") return protocol_fields(c);
  if (section == "synth") return synth_fields(c);
  if (section == "analysis") return analysis_fields(c);
  if (section == "sweep") return sweep_fields(c);
  return {};
}

const Field* find_field(const FieldTable& t, std::string_view key) {
  for (const auto& [k, f] : t)
    if (k == key) return &f;
  return nullptr;
}

void check(bool ok, const std::string& key, const std::string& msg) {
  if (!ok) throw ConfigError(key, 0, msg);
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }
bool nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace

std::string to_string(PortRole role) {
  return role == PortRole::Cooling ? "cooling" : "monitor";
}

BathSet RunConfig::baths() const {
  BathSet b;
  b.intrinsic_temperature_k = intrinsic_temperature_k;
  for (const auto& p : ports) b.ports.push_back(p.port);
  return b;
}

BathSet RunConfig::ambient_baths() const {
  BathSet b;
  b.intrinsic_temperature_k = intrinsic_temperature_k;
  for (const auto& p : ports)
    if (p.role != PortRole::Cooling) b.ports.push_back(p.port);
  return b;
}

std::size_t RunConfig::cooling_port_index() const {
  for (std::size_t i = 0; i < ports.size(); ++i)
    if (ports[i].role == PortRole::Cooling) return i;
  return ports.size();
}

void RunConfig::validate() const {
  check(positive(mode.frequency_hz), "mode.frequency_hz", "must be > 0");
  check(positive(mode.intrinsic_q), "mode.intrinsic_q", "must be > 0");
  check(nonneg(intrinsic_temperature_k), "mode.intrinsic_temperature_k", "must be >= 0");
  for (const auto& p : ports) {
    const std::string key = "port." + p.name;
    try {
      p.port.validate();
      (void)link_output_temperature(p.port);
    } catch (const std::domain_error& e) {
      throw ConfigError(key, 0, e.what());
    }
  }
  try {
    receiver.validate();
  } catch (const std::domain_error& e) {
    throw ConfigError("receiver", 0, e.what());
  }
  const auto& pr = protocol;
  check(nonneg(pr.cool_duration_s), "protocol.cool_duration_s", "must be >= 0");
  check(nonneg(pr.interrogate_delay_s), "protocol.interrogate_delay_s", "must be >= 0");
  check(nonneg(pr.record_start_s), "protocol.record_start_s", "must be >= 0");
  check(positive(pr.record_length_s), "protocol.record_length_s", "must be > 0");
  check(positive(pr.trajectory_dt_s), "protocol.trajectory_dt_s", "must be > 0");
  const auto& s = synth;
  check(positive(s.sample_interval_s), "synth.sample_interval_s", "must be > 0");
  check(pr.record_length_s >= 10.0 * s.sample_interval_s, "protocol.record_length_s",
        "must cover at least 10 samples");
  check(nonneg(s.one_over_f_corner_hz), "synth.one_over_f_corner_hz", "must be >= 0");
  check(positive(s.artifact_duration_s), "synth.artifact_duration_s", "must be > 0");
  check(std::isfinite(s.artifact_amplitude_v), "synth.artifact_amplitude_v", "must be finite");
  check(nonneg(s.voltage_scale), "synth.voltage_scale_v_per_sqrt_k", "must be >= 0");
  check(s.shots >= 1, "synth.shots", "must be >= 1");
  try {
    analysis.validate();
  } catch (const std::domain_error& e) {
    throw ConfigError("analysis", 0, e.what());
  }
  check(analysis.extraction.boxcar_width_s >= s.sample_interval_s * (1.0 - 1e-9),
        "analysis.boxcar_width_s", "must be at least one sample interval");
  const auto& w = sweep;
  check(positive(w.kappa_min) || (!w.kappa_log && nonneg(w.kappa_min)), "sweep.kappa_min",
        "must be > 0 (>= 0 for a linear axis)");
  check(std::isfinite(w.kappa_max) && w.kappa_max >= w.kappa_min, "sweep.kappa_max",
        "must be >= kappa_min");
  check(w.kappa_points >= 1, "sweep.kappa_points", "must be >= 1");
  check(nonneg(w.t_cold_min_k), "sweep.t_cold_min_k", "must be >= 0");
  check(std::isfinite(w.t_cold_max_k) && w.t_cold_max_k >= w.t_cold_min_k,
        "sweep.t_cold_max_k", "must be >= t_cold_min_k");
  check(w.t_cold_points >= 1, "sweep.t_cold_points", "must be >= 1");
}

RunConfig default_run_config() {
  RunConfig c;
  c.ports.push_back({"cooling", PortRole::Cooling,
                     BathPort{.coupling_kappa = 3.8,
                              .load_temperature_k = 18.4,
                              .link_loss_db = 0.19,
                              .link_temperature_k = 290.0,
                              .loss_model = LossModel::Linear}});
  c.ports.push_back({"monitor", PortRole::Monitor,
                     BathPort{.coupling_kappa = 1.0,
                              .load_temperature_k = 18.4,
                              .link_loss_db = 6.05,
                              .link_temperature_k = 290.0,
                              .loss_model = LossModel::Exact}});
  return c;
}

RunConfig parse_run_config(const std::string& text, const std::string& name) {
  RunConfig cfg = default_run_config();
  cfg.ports.clear();
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  std::string section;
  std::set<std::string> seen_sections;
  std::set<std::string> seen_keys;
  bool in_port = false;

  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("", line_no, name + ": malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!seen_sections.insert(section).second)
        throw ConfigError(section, line_no, name + ": duplicate section");
      if (section.rfind("port.", 0) == 0) {
        const std::string port_name = section.substr(5);
        if (port_name.empty()) throw ConfigError(section, line_no, name + ": port needs a name");
        cfg.ports.push_back({port_name, PortRole::Monitor, BathPort{}});
        in_port = true;
      } else {
        in_port = false;
        if (section_fields(cfg, section).empty())
          throw ConfigError(section, line_no, name + ": unknown section");
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("", line_no, name + ": expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (section.empty())
      throw ConfigError(key, line_no, name + ": key outside of any section");
    const std::string full = section + "." + key;
    const FieldTable fields =
        in_port ? port_fields(cfg.ports.back()) : section_fields(cfg, section);
    const Field* f = find_field(fields, key);
    if (!f) throw ConfigError(full, line_no, name + ": unknown key");
    if (!seen_keys.insert(full).second)
      throw ConfigError(full, line_no, name + ": duplicate key");
    try {
      f->set(value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(full, line_no, name + ": " + e.what() + ", got '" +
                                           std::string(value) + "'");
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  return parse_run_config(read_text_file(path), path);
}

std::string serialize_run_config(const RunConfig& cfg_in) {
  RunConfig cfg = cfg_in;
  std::ostringstream os;
  auto emit = [&os](const std::string& section, const FieldTable& t) {
    os << '[' << section << "]\n";
    for (const auto& [k, f] : t) os << k << " = " << f.get() << '\n';
    os << '\n';
  };
  emit("mode", mode_fields(cfg));
  for (auto& p : cfg.ports) emit("port." + p.name, port_fields(p));
  emit("receiver", receiver_fields(cfg));
  emit("protocol", protocol_fields(cfg));
  emit("synth", synth_fields(cfg));
  emit("analysis", analysis_fields(cfg));
  emit("sweep", sweep_fields(cfg));
  return os.str();
}

}  // namespace cpc
