#pragma once

// Receiver-side noise model: front-end LNA noise parameters, the rest of the
// chain lumped into one cascaded temperature, and the noise-power ratio that
// links a mode temperature change to what the receiver actually sees.

#include <complex>
#include <span>
#include <vector>

namespace cpc {

/// Standard reference temperature for noise figures.
inline constexpr double kReferenceTemperatureK = 290.0;

struct LnaNoiseParameters {
  double t_min_k = 11.6;
  double noise_resistance_ohm = 2.0;
  std::complex<double> gamma_opt{0.073, 0.125};
  double linear_gain = 166.0;
  double reference_z0_ohm = 50.0;
  double reference_t0_k = kReferenceTemperatureK;

  void validate() const;
};

struct AmplifierStage {
  double noise_temperature_k = 0.0;
  double linear_gain = 1.0;
};

struct ReceiverChain {
  LnaNoiseParameters front_end;
  double t_rec_k = 36.1;
  /// Reflection seen by the LNA looking back into the cavity port.
  std::complex<double> gamma_c{0.0, 0.0};
  /// Image-band contribution; zero for a homodyne receiver.
  double t_image_k = 0.0;

  void validate() const;
};

double lna_input_noise_temperature(const LnaNoiseParameters& p,
                                   std::complex<double> gamma_s);

double friis_cascade(std::span<const AmplifierStage> stages);

struct YFactorResult {
  double temperature_k;
  bool clamped;  // raw estimate was negative and has been pinned to 0
};

YFactorResult y_factor_noise_temperature(double t_hot_k, double t_cold_ref_k,
                                         double y);

double noise_figure_db_to_temperature(double nf_db);
double temperature_to_noise_figure_db(double t_k);

/// Receiver output noise referred to the LNA input scale, in kelvin:
/// G [(T_min + T_mode)(1 - |Gc|^2) + 4 T0 (Rn/Z0) |Gc - Gopt|^2/|1 + Gopt|^2
///    + T_image] + T_REC.
double receiver_output_temperature(const ReceiverChain& chain, double t_mode_k);

/// Noise-power ratio in dB between a mode at t_mode and the ambient reference.
double noise_power_reduction_db(double t_mode_k, double t_mode_ambient_k,
                                const ReceiverChain& chain);

/// Same, with distinct chains for the measured and the reference state.
double noise_power_reduction_db(double t_mode_k, const ReceiverChain& chain,
                                double t_mode_ambient_k,
                                const ReceiverChain& reference_chain);

/// Smallest reachable reduction (mode at 0 K).
double deltap_floor_db(double t_mode_ambient_k, const ReceiverChain& chain);

/// Inverts noise_power_reduction_db by bisection. Throws std::out_of_range
/// naming the floor when delta_p_db lies below it. Positive inputs are
/// accepted and bracket above the ambient temperature.
double infer_mode_temperature(double delta_p_db, double t_mode_ambient_k,
                              const ReceiverChain& chain);

struct DeltaPCurvePoint {
  double t_mode_k;
  double delta_p_db;
};

std::vector<DeltaPCurvePoint> emit_deltap_curve(const ReceiverChain& chain,
                                                double t_mode_ambient_k,
                                                double t_lo_k, double t_hi_k,
                                                std::size_t samples);

}  // namespace cpc
