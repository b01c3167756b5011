#pragma once

// Synthetic homodyne receiver traces. Each sample is
//
//   v(t) = s * sqrt(T_out(t)) * z  +  flicker(t)  +  artifact(t)  +  signal(t)
//
// with T_out the receiver output temperature for the mode temperature at t,
// s the voltage scale and z standard normal.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cpc/dynamics.hpp"
#include "cpc/receiver.hpp"

namespace cpc {

struct SynthConfig {
  double sample_interval_s = 100e-9;
  double duration_s = 0.0;
  /// Trajectory time of the first sample.
  double start_time_s = 0.0;
  std::uint64_t rng_seed = 0;
  /// Where the flicker PSD meets the white floor; 0 disables flicker.
  double one_over_f_corner_hz = 1e6;
  double artifact_duration_s = 2e-6;
  double artifact_amplitude_v = 0.0;
  /// Added sample by sample from the first sample on; may be shorter.
  std::vector<double> injected_signal;
  double voltage_scale = 1.0;  // V / sqrt(K)

  void validate() const;
  std::size_t sample_count() const;
  /// SHA-256 over a canonical text form; the seed is excluded.
  std::string digest() const;
};

struct NoiseTrace {
  double start_time_s = 0.0;
  double dt_s = 0.0;
  std::vector<double> voltages;
  std::uint64_t seed = 0;
  std::string config_digest;

  std::size_t size() const { return voltages.size(); }
  double time_at(std::size_t i) const {
    return start_time_s + static_cast<double>(i) * dt_s;
  }
};

/// Artifact shape on [0, 1): a damped three-cycle sine, zero elsewhere.
double switch_artifact_shape(double u);

/// Precomputes the per-sample standard deviation and the deterministic
/// components once so that many shots can be generated cheaply.
class TraceSynthesizer {
 public:
  TraceSynthesizer(const PhotonTrajectory& trajectory,
                   const ReceiverChain& chain, SynthConfig cfg,
                   std::vector<double> artifact_times_s = {});

  const SynthConfig& config() const { return cfg_; }
  std::size_t sample_count() const { return sigma_.size(); }
  std::span<const double> sigma() const { return sigma_; }
  /// Artifact plus injected signal on the sample grid.
  std::span<const double> deterministic() const { return deterministic_; }
  /// One-sided PSD of the white part averaged over the trace, V^2/Hz.
  double white_floor() const { return white_floor_; }
  double flicker_variance_per_pole() const { return flicker_var_; }
  const std::vector<double>& flicker_poles_hz() const { return poles_; }

  /// Fills `out` (sample_count() long) with one realization.
  void generate(std::uint64_t seed, std::span<double> out) const;
  NoiseTrace generate(std::uint64_t seed) const;

 private:
  void add_flicker(std::uint64_t seed, std::span<double> out) const;

  SynthConfig cfg_;
  std::string digest_;
  std::vector<double> sigma_;
  std::vector<double> deterministic_;
  double white_floor_ = 0.0;
  std::vector<double> poles_;
  double flicker_var_ = 0.0;
  std::size_t coarse_stride_ = 1;
};

/// Noise plus injected signal, seeded by cfg.rng_seed; no switch artifact.
NoiseTrace synthesize_trace(const PhotonTrajectory& trajectory,
                            const ReceiverChain& chain, const SynthConfig& cfg);

/// Adds the artifact at every event time that falls inside the trace.
void inject_switch_artifact(NoiseTrace& trace, const SynthConfig& cfg,
                            std::span<const double> event_times_s);

/// Shot i uses derive_shot_seed(cfg.rng_seed, i); artifacts at event times.
std::vector<NoiseTrace> synthesize_shot_ensemble(
    std::size_t n_shots, const PhotonTrajectory& trajectory,
    const ReceiverChain& chain, const SynthConfig& cfg,
    std::span<const double> artifact_times_s = {});

}  // namespace cpc
