#pragma once

// Thermal bookkeeping for a single cavity mode coupled to several baths.
//
// All temperatures are noise temperatures in kelvin. Bath arithmetic works in
// the equipartition picture (a mode at temperature T holds eps*T photons);
// Bose-Einstein statistics only enter through photon_occupancy() and its
// inverse.

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cpc {

struct PhysicalConstants {
  static constexpr double planck_h = 6.62607015e-34;    // J s
  static constexpr double boltzmann_k = 1.380649e-23;   // J/K
};

/// Divisor turning a loss in dB into the linear-approximation weight
/// (lambda = L_dB / 4.34).
inline constexpr double kDbPerNeper = 4.34;

/// Linear-model losses above this still evaluate but deserve a warning.
inline constexpr double kLinearLossWarnDb = 0.5;

struct CavityMode {
  double frequency_hz = 0.0;
  double intrinsic_q = 0.0;

  /// Throws std::domain_error unless both fields are finite and positive.
  void validate() const;

  /// Photons per kelvin in the equipartition limit, k_B / (h f0).
  double photons_per_kelvin() const;
  double angular_frequency() const;
  double bandwidth_hz() const { return frequency_hz / intrinsic_q; }
};

enum class LossModel { Exact, Linear, None };

std::string to_string(LossModel m);
std::optional<LossModel> parse_loss_model(std::string_view text);

struct BathPort {
  double coupling_kappa = 0.0;
  double load_temperature_k = 0.0;
  double link_loss_db = 0.0;
  double link_temperature_k = 290.0;
  LossModel loss_model = LossModel::Exact;

  void validate() const;
};

struct BathSet {
  double intrinsic_temperature_k = 290.0;
  std::vector<BathPort> ports;

  void validate() const;
};

double photon_occupancy(double frequency_hz, double temperature_k);
double temperature_from_occupancy(double frequency_hz, double occupancy);

/// Noise temperature presented to the cavity at the far end of a port's link.
double link_output_temperature(const BathPort& port);

/// Human-readable warning when a Linear link is used outside its comfort zone.
std::optional<std::string> link_model_warning(const BathPort& port);

/// Weighted average of the intrinsic bath (weight 1) and every link-transformed
/// port (weight kappa_i).
double mode_temperature(const BathSet& baths);

/// Closed-form cooled temperature for one over-coupled cooling port whose
/// lossy link adds lambda*T0, plus a critically coupled monitor at t_mon.
double cooled_mode_temperature_closed_form(double t0_k, double kappa_over,
                                           double lambda, double t_cold_k,
                                           double t_mon_k);

struct SweepCell {
  double kappa;
  double t_cold_k;
  double t_mode_k;
  double occupancy;
};

struct SweepGrid {
  std::vector<double> kappas;
  std::vector<double> t_colds_k;

  /// n points from lo to hi inclusive; geometric spacing when log_spacing.
  static std::vector<double> axis(double lo, double hi, std::size_t n,
                                  bool log_spacing = false);
};

/// Tabulates the mode temperature with a lossless cooling port (kappa, T_cold)
/// added to `fixed_ports`. Row-major in kappa.
std::vector<SweepCell> sweep_mode_temperature(
    const SweepGrid& grid, double t0_k, double frequency_hz,
    std::span<const BathPort> fixed_ports = {});

}  // namespace cpc
