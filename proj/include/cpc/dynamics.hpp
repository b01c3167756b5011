#pragma once

// Photon-number rate equation for a mode whose port configuration switches
// at scheduled instants:
//
//   dq/dt = -(w/Q0) (q - eps T0) - sum_i (w kappa_i / Q0) (q - eps T_i')
//
// Within a constant configuration the solution is a single exponential, so
// the closed form is the primary path; evolve_occupancy_rk4 exists to check it.

#include <optional>
#include <string>
#include <vector>

#include "cpc/noise_core.hpp"

namespace cpc {

enum class ProtocolLabel { Cool, Disconnect, Interrogate, LaserFire };

std::string to_string(ProtocolLabel label);

struct ProtocolEvent {
  double time_s = 0.0;
  /// One flag per BathSet port; the configuration holds until the next event.
  std::vector<bool> active_ports;
  std::vector<ProtocolLabel> labels;

  bool has(ProtocolLabel label) const;
};

struct SwitchSchedule {
  std::vector<ProtocolEvent> events;
  double end_time_s = 0.0;

  /// Strictly increasing times, first at 0, masks sized to n_ports.
  void validate(std::size_t n_ports) const;

  /// Times of every event carrying `label`.
  std::vector<double> times_of(ProtocolLabel label) const;
  std::optional<double> first_time_of(ProtocolLabel label) const;
};

/// Folds events sharing a time into one: labels are concatenated, the port
/// mask of the last one wins. Input need not be sorted.
std::vector<ProtocolEvent> merge_coincident(std::vector<ProtocolEvent> events);

struct ProtocolPorts {
  std::size_t port_count = 2;
  std::size_t cooling_port = 0;
};

/// Three-step pre-cooling schedule: cool with every port attached, then at
/// cool_duration disconnect the cooling port and fire the laser, then
/// interrogate after interrogate_delay.
SwitchSchedule build_protocol(double cool_duration_s, double interrogate_delay_s,
                              double trace_length_s, const ProtocolPorts& ports);

/// The BathSet restricted to ports whose flag is set.
BathSet select_ports(const BathSet& baths, const std::vector<bool>& active);

/// Energy decay rate w (1 + sum kappa_i) / Q0 of the mode with `active` ports.
double relaxation_rate(const CavityMode& mode, const BathSet& active);
inline double relaxation_time(const CavityMode& mode, const BathSet& active) {
  return 1.0 / relaxation_rate(mode, active);
}

/// eps * T_mode: the fixed point of the rate equation.
double steady_state_occupancy(const CavityMode& mode, const BathSet& active);

struct TimeGrid {
  double t_end_s = 0.0;
  double dt_s = 0.0;

  std::size_t points() const;
};

struct PhotonTrajectory {
  std::vector<double> times_s;
  std::vector<double> occupancy;
  std::vector<double> temperature_k;

  std::size_t size() const { return times_s.size(); }
  double duration_s() const { return times_s.empty() ? 0.0 : times_s.back(); }
  double dt_s() const;

  /// Linear interpolation on the uniform grid; clamps outside it.
  double temperature_at(double t_s) const;
  double occupancy_at(double t_s) const;
};

/// Largest dt accepted for this schedule (a tenth of the fastest time constant).
double max_time_step(const CavityMode& mode, const BathSet& baths,
                     const SwitchSchedule& schedule);

/// Piecewise closed-form solution sampled on a uniform grid. An empty
/// schedule keeps every port attached. Throws std::domain_error naming the
/// required dt when the grid is too coarse.
PhotonTrajectory evolve_occupancy(const CavityMode& mode, const BathSet& baths,
                                  const SwitchSchedule& schedule,
                                  const TimeGrid& grid, double q_initial);

/// Same trajectory from a classical fourth-order Runge-Kutta integration,
/// stepping exactly onto every switching instant.
PhotonTrajectory evolve_occupancy_rk4(const CavityMode& mode,
                                      const BathSet& baths,
                                      const SwitchSchedule& schedule,
                                      const TimeGrid& grid, double q_initial);

}  // namespace cpc
