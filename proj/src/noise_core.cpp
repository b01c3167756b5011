#include "cpc/noise_core.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace cpc {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::domain_error(what);
}

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace

void CavityMode::validate() const {
  require(std::isfinite(frequency_hz) && frequency_hz > 0.0,
          "cavity frequency must be finite and > 0");
  require(std::isfinite(intrinsic_q) && intrinsic_q > 0.0,
          "intrinsic Q must be finite and > 0");
}

double CavityMode::photons_per_kelvin() const {
  return PhysicalConstants::boltzmann_k /
         (PhysicalConstants::planck_h * frequency_hz);
}

double CavityMode::angular_frequency() const {
  return 2.0 * std::numbers::pi * frequency_hz;
}

std::string to_string(LossModel m) {
  switch (m) {
    case LossModel::Exact: return "exact";
    case LossModel::Linear: return "linear";
    case LossModel::None: return "none";
  }
  return "?";
}

std::optional<LossModel> parse_loss_model(std::string_view text) {
  if (text == "exact") return LossModel::Exact;
  if (text == "linear") return LossModel::Linear;
  if (text == "none") return LossModel::None;
  return std::nullopt;
}

void BathPort::validate() const {
  require(std::isfinite(coupling_kappa) && coupling_kappa >= 0.0,
          "port coupling kappa must be finite and >= 0");
  require(finite_nonneg(load_temperature_k),
          "port load temperature must be finite and >= 0");
  require(finite_nonneg(link_loss_db), "port link loss must be finite and >= 0");
  require(finite_nonneg(link_temperature_k),
          "port link temperature must be finite and >= 0");
  require(loss_model != LossModel::None || link_loss_db == 0.0,
          "loss model 'none' requires link_loss_db = 0");
}

void BathSet::validate() const {
  require(finite_nonneg(intrinsic_temperature_k),
          "intrinsic temperature must be finite and >= 0");
  for (const auto& p : ports) p.validate();
}

double photon_occupancy(double frequency_hz, double temperature_k) {
  require(std::isfinite(frequency_hz) && frequency_hz > 0.0,
          "photon_occupancy: frequency must be finite and > 0");
  require(finite_nonneg(temperature_k),
          "photon_occupancy: temperature must be finite and >= 0");
  if (temperature_k == 0.0) return 0.0;
  const double x = PhysicalConstants::planck_h * frequency_hz /
                   (PhysicalConstants::boltzmann_k * temperature_k);
  return 1.0 / std::expm1(x);
}

double temperature_from_occupancy(double frequency_hz, double occupancy) {
  require(std::isfinite(frequency_hz) && frequency_hz > 0.0,
          "temperature_from_occupancy: frequency must be finite and > 0");
  require(finite_nonneg(occupancy),
          "temperature_from_occupancy: occupancy must be finite and >= 0");
  if (occupancy == 0.0) return 0.0;
  const double hf_over_k = PhysicalConstants::planck_h * frequency_hz /
                           PhysicalConstants::boltzmann_k;
  return hf_over_k / std::log1p(1.0 / occupancy);
}

double link_output_temperature(const BathPort& port) {
  port.validate();
  switch (port.loss_model) {
    case LossModel::None:
      return port.load_temperature_k;
    case LossModel::Exact: {
      const double transmission = std::pow(10.0, -port.link_loss_db / 10.0);
      return transmission * port.load_temperature_k +
             (1.0 - transmission) * port.link_temperature_k;
    }
    case LossModel::Linear: {
      const double lambda = port.link_loss_db / kDbPerNeper;
      if (lambda >= 1.0) {
        std::ostringstream os;
        os << "linear link model invalid at " << port.link_loss_db
           << " dB (weight turns negative at " << kDbPerNeper << " dB)";
        throw std::domain_error(os.str());
      }
      return (1.0 - lambda) * port.load_temperature_k +
             lambda * port.link_temperature_k;
    }
  }
  throw std::logic_error("unhandled loss model");
}

std::optional<std::string> link_model_warning(const BathPort& port) {
  if (port.loss_model != LossModel::Linear) return std::nullopt;
  if (port.link_loss_db <= kLinearLossWarnDb) return std::nullopt;
  std::ostringstream os;
  os << "linear link approximation used at " << port.link_loss_db
     << " dB; it drifts from the exact transform above " << kLinearLossWarnDb
     << " dB";
  return os.str();
}

double mode_temperature(const BathSet& baths) {
  baths.validate();
  double weighted = baths.intrinsic_temperature_k;
  double weight = 1.0;
  for (const auto& port : baths.ports) {
    weighted += port.coupling_kappa * link_output_temperature(port);
    weight += port.coupling_kappa;
  }
  return weighted / weight;
}

double cooled_mode_temperature_closed_form(double t0_k, double kappa_over,
                                           double lambda, double t_cold_k,
                                           double t_mon_k) {
  require(finite_nonneg(t0_k) && finite_nonneg(t_cold_k) &&
              finite_nonneg(t_mon_k),
          "closed form: temperatures must be finite and >= 0");
  require(finite_nonneg(kappa_over) && finite_nonneg(lambda),
          "closed form: kappa and lambda must be finite and >= 0");
  return ((1.0 + kappa_over * lambda) * t0_k + kappa_over * t_cold_k +
          t_mon_k) /
         (2.0 + kappa_over);
}

std::vector<double> SweepGrid::axis(double lo, double hi, std::size_t n,
                                    bool log_spacing) {
  require(n > 0, "sweep axis needs at least one point");
  require(std::isfinite(lo) && std::isfinite(hi) && lo <= hi,
          "sweep axis bounds must be finite with lo <= hi");
  if (log_spacing) require(lo > 0.0, "log-spaced axis needs lo > 0");
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(n - 1);
    out[i] = log_spacing ? lo * std::pow(hi / lo, u) : lo + (hi - lo) * u;
  }
  out.back() = hi;
  return out;
}

std::vector<SweepCell> sweep_mode_temperature(
    const SweepGrid& grid, double t0_k, double frequency_hz,
    std::span<const BathPort> fixed_ports) {
  require(!grid.kappas.empty() && !grid.t_colds_k.empty(),
          "sweep grid is empty");
  for (double k : grid.kappas)
    require(std::isfinite(k) && k >= 0.0, "sweep kappa must be finite, >= 0");
  for (double t : grid.t_colds_k)
    require(finite_nonneg(t), "sweep T_cold must be finite, >= 0");

  BathSet baths;
  baths.intrinsic_temperature_k = t0_k;
  baths.ports.assign(fixed_ports.begin(), fixed_ports.end());
  baths.ports.push_back(BathPort{.coupling_kappa = 0.0,
                                 .load_temperature_k = 0.0,
                                 .link_loss_db = 0.0,
                                 .link_temperature_k = t0_k,
                                 .loss_model = LossModel::None});
  BathPort& swept = baths.ports.back();

  std::vector<SweepCell> cells;
  cells.reserve(grid.kappas.size() * grid.t_colds_k.size());
  for (double kappa : grid.kappas) {
    for (double t_cold : grid.t_colds_k) {
      swept.coupling_kappa = kappa;
      swept.load_temperature_k = t_cold;
      const double t = mode_temperature(baths);
      cells.push_back({kappa, t_cold, t, photon_occupancy(frequency_hz, t)});
    }
  }
  return cells;
}

}  // namespace cpc
