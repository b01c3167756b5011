#include "cpc/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <boost/numeric/odeint.hpp>

namespace cpc {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::domain_error(what);
}

struct Segment {
  double start_s;
  double rate;
  double q_star;
};

std::vector<bool> all_ports(std::size_t n) { return std::vector<bool>(n, true); }

std::vector<Segment> build_segments(const CavityMode& mode, const BathSet& baths,
                                    const SwitchSchedule& schedule) {
  mode.validate();
  baths.validate();
  std::vector<Segment> segs;
  if (schedule.events.empty()) {
    segs.push_back({0.0, relaxation_rate(mode, baths),
                    steady_state_occupancy(mode, baths)});
    return segs;
  }
  schedule.validate(baths.ports.size());
  for (const auto& ev : schedule.events) {
    const BathSet active = select_ports(baths, ev.active_ports);
    segs.push_back({ev.time_s, relaxation_rate(mode, active),
                    steady_state_occupancy(mode, active)});
  }
  return segs;
}

void check_grid(const TimeGrid& grid, double q_initial) {
  require(std::isfinite(grid.t_end_s) && grid.t_end_s >= 0.0,
          "time grid end must be finite and >= 0");
  require(std::isfinite(grid.dt_s) && grid.dt_s > 0.0,
          "time grid step must be finite and > 0");
  require(std::isfinite(q_initial) && q_initial >= 0.0,
          "initial occupancy must be finite and >= 0");
}

void check_step(const std::vector<Segment>& segs, double dt) {
  double fastest = 0.0;
  for (const auto& s : segs) fastest = std::max(fastest, s.rate);
  const double limit = 0.1 / fastest;
  if (dt > limit) {
    std::ostringstream os;
    os << "time step " << dt << " s too coarse; need dt <= " << limit << " s";
    throw std::domain_error(os.str());
  }
}

PhotonTrajectory make_trajectory(const TimeGrid& grid) {
  PhotonTrajectory tr;
  const std::size_t n = grid.points();
  tr.times_s.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    tr.times_s[i] = static_cast<double>(i) * grid.dt_s;
  tr.occupancy.resize(n);
  tr.temperature_k.resize(n);
  return tr;
}

void fill_temperatures(const CavityMode& mode, PhotonTrajectory& tr) {
  for (std::size_t i = 0; i < tr.size(); ++i)
    tr.temperature_k[i] =
        temperature_from_occupancy(mode.frequency_hz, tr.occupancy[i]);
}

double interpolate(const PhotonTrajectory& tr, const std::vector<double>& y,
                   double t) {
  if (tr.size() == 0) throw std::domain_error("empty trajectory");
  if (tr.size() == 1 || t <= tr.times_s.front()) return y.front();
  if (t >= tr.times_s.back()) return y.back();
  const double dt = tr.dt_s();
  const double pos = t / dt;
  auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= tr.size()) return y.back();
  const double w = pos - static_cast<double>(i);
  return y[i] + w * (y[i + 1] - y[i]);
}

}  // namespace

std::string to_string(ProtocolLabel label) {
  switch (label) {
    case ProtocolLabel::Cool: return "Cool";
    case ProtocolLabel::Disconnect: return "Disconnect";
    case ProtocolLabel::Interrogate: return "Interrogate";
    case ProtocolLabel::LaserFire: return "LaserFire";
  }
  return "?";
}

bool ProtocolEvent::has(ProtocolLabel label) const {
  return std::find(labels.begin(), labels.end(), label) != labels.end();
}

void SwitchSchedule::validate(std::size_t n_ports) const {
  require(std::isfinite(end_time_s) && end_time_s >= 0.0,
          "schedule end time must be finite and >= 0");
  if (events.empty()) return;
  require(events.front().time_s == 0.0, "schedule must start at t = 0");
  for (std::size_t i = 0; i < events.size(); ++i) {
    require(std::isfinite(events[i].time_s), "event time must be finite");
    require(events[i].active_ports.size() == n_ports,
            "event port mask size does not match the bath set");
    if (i > 0)
      require(events[i].time_s > events[i - 1].time_s,
              "event times must be strictly increasing");
  }
  require(events.back().time_s <= end_time_s,
          "schedule end precedes its last event");
}

std::vector<double> SwitchSchedule::times_of(ProtocolLabel label) const {
  std::vector<double> out;
  for (const auto& ev : events)
    if (ev.has(label)) out.push_back(ev.time_s);
  return out;
}

std::optional<double> SwitchSchedule::first_time_of(ProtocolLabel label) const {
  for (const auto& ev : events)
    if (ev.has(label)) return ev.time_s;
  return std::nullopt;
}

std::vector<ProtocolEvent> merge_coincident(std::vector<ProtocolEvent> events) {
  std::stable_sort(events.begin(), events.end(),
                   [](const ProtocolEvent& a, const ProtocolEvent& b) {
                     return a.time_s < b.time_s;
                   });
  std::vector<ProtocolEvent> out;
  for (auto& ev : events) {
    if (!out.empty() && out.back().time_s == ev.time_s) {
      auto& last = out.back();
      for (auto l : ev.labels)
        if (!last.has(l)) last.labels.push_back(l);
      last.active_ports = std::move(ev.active_ports);
    } else {
      out.push_back(std::move(ev));
    }
  }
  return out;
}

SwitchSchedule build_protocol(double cool_duration_s, double interrogate_delay_s,
                              double trace_length_s, const ProtocolPorts& ports) {
  require(std::isfinite(cool_duration_s) && cool_duration_s >= 0.0,
          "cooling duration must be finite and >= 0");
  require(std::isfinite(interrogate_delay_s) && interrogate_delay_s >= 0.0,
          "interrogation delay must be finite and >= 0");
  require(std::isfinite(trace_length_s) && trace_length_s > 0.0,
          "trace length must be finite and > 0");
  require(ports.cooling_port < ports.port_count,
          "cooling port index out of range");

  std::vector<bool> detached = all_ports(ports.port_count);
  detached[ports.cooling_port] = false;

  std::vector<ProtocolEvent> events;
  events.push_back({0.0, all_ports(ports.port_count), {ProtocolLabel::Cool}});
  events.push_back({cool_duration_s, detached,
                    {ProtocolLabel::Disconnect, ProtocolLabel::LaserFire}});
  events.push_back({cool_duration_s + interrogate_delay_s, detached,
                    {ProtocolLabel::Interrogate}});

  SwitchSchedule s;
  s.events = merge_coincident(std::move(events));
  s.end_time_s = cool_duration_s + trace_length_s;
  s.validate(ports.port_count);
  return s;
}

BathSet select_ports(const BathSet& baths, const std::vector<bool>& active) {
  require(active.size() == baths.ports.size(),
          "port mask size does not match the bath set");
  BathSet out;
  out.intrinsic_temperature_k = baths.intrinsic_temperature_k;
  for (std::size_t i = 0; i < active.size(); ++i)
    if (active[i]) out.ports.push_back(baths.ports[i]);
  return out;
}

double relaxation_rate(const CavityMode& mode, const BathSet& active) {
  mode.validate();
  active.validate();
  double kappa_sum = 0.0;
  for (const auto& p : active.ports) kappa_sum += p.coupling_kappa;
  return mode.angular_frequency() * (1.0 + kappa_sum) / mode.intrinsic_q;
}

double steady_state_occupancy(const CavityMode& mode, const BathSet& active) {
  mode.validate();
  return mode.photons_per_kelvin() * mode_temperature(active);
}

std::size_t TimeGrid::points() const {
  require(std::isfinite(t_end_s) && t_end_s >= 0.0 && std::isfinite(dt_s) &&
              dt_s > 0.0,
          "invalid time grid");
  return static_cast<std::size_t>(std::floor(t_end_s / dt_s + 1e-9)) + 1;
}

double PhotonTrajectory::dt_s() const {
  return times_s.size() < 2 ? 0.0 : times_s[1] - times_s[0];
}

double PhotonTrajectory::temperature_at(double t_s) const {
  return interpolate(*this, temperature_k, t_s);
}

double PhotonTrajectory::occupancy_at(double t_s) const {
  return interpolate(*this, occupancy, t_s);
}

double max_time_step(const CavityMode& mode, const BathSet& baths,
                     const SwitchSchedule& schedule) {
  double fastest = 0.0;
  for (const auto& s : build_segments(mode, baths, schedule))
    fastest = std::max(fastest, s.rate);
  return 0.1 / fastest;
}

PhotonTrajectory evolve_occupancy(const CavityMode& mode, const BathSet& baths,
                                  const SwitchSchedule& schedule,
                                  const TimeGrid& grid, double q_initial) {
  check_grid(grid, q_initial);
  const auto segs = build_segments(mode, baths, schedule);
  check_step(segs, grid.dt_s);

  PhotonTrajectory tr = make_trajectory(grid);
  std::size_t k = 0;
  double q_start = q_initial;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const double t = tr.times_s[i];
    while (k + 1 < segs.size() && segs[k + 1].start_s <= t) {
      const double span = segs[k + 1].start_s - segs[k].start_s;
      q_start = segs[k].q_star +
                (q_start - segs[k].q_star) * std::exp(-segs[k].rate * span);
      ++k;
    }
    const auto& s = segs[k];
    tr.occupancy[i] =
        s.q_star + (q_start - s.q_star) * std::exp(-s.rate * (t - s.start_s));
  }
  fill_temperatures(mode, tr);
  return tr;
}

PhotonTrajectory evolve_occupancy_rk4(const CavityMode& mode,
                                      const BathSet& baths,
                                      const SwitchSchedule& schedule,
                                      const TimeGrid& grid, double q_initial) {
  namespace ode = boost::numeric::odeint;
  check_grid(grid, q_initial);
  const auto segs = build_segments(mode, baths, schedule);
  check_step(segs, grid.dt_s);

  PhotonTrajectory tr = make_trajectory(grid);
  ode::runge_kutta4<double, double, double, double, ode::vector_space_algebra>
      stepper;

  std::size_t k = 0;
  double q = q_initial;
  double t = 0.0;
  tr.occupancy[0] = q;
  for (std::size_t i = 1; i < tr.size(); ++i) {
    const double target = tr.times_s[i];
    while (t < target) {
      while (k + 1 < segs.size() && segs[k + 1].start_s <= t) ++k;
      double stop = target;
      if (k + 1 < segs.size()) stop = std::min(stop, segs[k + 1].start_s);
      const Segment s = segs[k];
      auto rhs = [&s](const double& x, double& dxdt, double) {
        dxdt = -s.rate * (x - s.q_star);
      };
      stepper.do_step(rhs, q, t, stop - t);
      t = stop;
    }
    tr.occupancy[i] = q;
  }
  fill_temperatures(mode, tr);
  return tr;
}

}  // namespace cpc
