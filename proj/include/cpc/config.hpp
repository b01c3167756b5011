#pragma once

// Run configuration: a sectioned `key = value` text format.
//
//   [mode]        frequency_hz, intrinsic_q, intrinsic_temperature_k
//   [port.NAME]   role, kappa, load_temperature_k, link_loss_db,
//                 link_temperature_k, loss_model
//   [receiver]    t_min_k, noise_resistance_ohm, gamma_opt_re, gamma_opt_im,
//                 gain_linear, reference_z0_ohm, reference_t0_k, t_rec_k,
//                 gamma_c_re, gamma_c_im, t_image_k
//   [protocol]    cool_duration_s, interrogate_delay_s, record_start_s,
//                 record_length_s, trajectory_dt_s
//   [synth]       sample_interval_s, one_over_f_corner_hz,
//                 artifact_duration_s, artifact_amplitude_v,
//                 voltage_scale_v_per_sqrt_k, seed, shots
//   [analysis]    boxcar_width_s, window_s, exclude_before_s, fit_end_s,
//                 reference_start_s, reference_end_s, band_lo_hz, band_hi_hz,
//                 psd_segment_length, cold_section_s, compute_psd
//   [sweep]       kappa_min, kappa_max, kappa_points, kappa_log,
//                 t_cold_min_k, t_cold_max_k, t_cold_points, fixed_ports
//
// Keys left out keep their built-in value, except ports: a file lists every
// port it wants, and a file without [port.*] sections has none.

#include <cstdint>
#include <string>
#include <vector>

#include "cpc/noise_core.hpp"
#include "cpc/receiver.hpp"
#include "cpc/trace_analysis.hpp"

namespace cpc {

enum class PortRole { Cooling, Monitor };

struct NamedPort {
  std::string name;
  PortRole role = PortRole::Monitor;
  BathPort port;
};

struct ProtocolConfig {
  double cool_duration_s = 40e-6;
  double interrogate_delay_s = 0.0;
  /// Absolute time of the first recorded sample.
  double record_start_s = 30e-6;
  double record_length_s = 120e-6;
  double trajectory_dt_s = 10e-9;
};

struct SynthSettings {
  double sample_interval_s = 1e-9;
  double one_over_f_corner_hz = 1e6;
  double artifact_duration_s = 2e-6;
  double artifact_amplitude_v = 5e-4;
  double voltage_scale = 1e-6;
  std::uint64_t seed = 1;
  std::size_t shots = 10;
};

struct SweepConfig {
  double kappa_min = 0.1;
  double kappa_max = 20.0;
  std::size_t kappa_points = 60;
  bool kappa_log = true;
  double t_cold_min_k = 5.0;
  double t_cold_max_k = 290.0;
  std::size_t t_cold_points = 58;
  /// Keep the non-cooling ports attached while sweeping the cooling port.
  bool fixed_ports = true;
};

struct RunConfig {
  CavityMode mode{1.4495e9, 164000.0};
  double intrinsic_temperature_k = 290.0;
  std::vector<NamedPort> ports;
  ReceiverChain receiver;
  ProtocolConfig protocol;
  SynthSettings synth;
  AnalysisConfig analysis;
  SweepConfig sweep;

  /// Every port attached.
  BathSet baths() const;
  /// Cooling ports removed.
  BathSet ambient_baths() const;
  /// Index of the first cooling port, or ports.size() when there is none.
  std::size_t cooling_port_index() const;

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

/// Values of the shipped paper.defaults file.
RunConfig default_run_config();

RunConfig parse_run_config(const std::string& text, const std::string& name = "<config>");
RunConfig load_run_config(const std::string& path);

/// Canonical text of every setting, in parse_run_config syntax.
std::string serialize_run_config(const RunConfig& cfg);

std::string to_string(PortRole role);

}  // namespace cpc
