#include "cpc/receiver.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cpc {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::domain_error(what);
}

// Added noise from the source mismatch term, without the (1 - |Gs|^2) factor.
double mismatch_term(const LnaNoiseParameters& p, std::complex<double> gamma_s) {
  return 4.0 * p.reference_t0_k * (p.noise_resistance_ohm / p.reference_z0_ohm) *
         std::norm(gamma_s - p.gamma_opt) / std::norm(1.0 + p.gamma_opt);
}

}  // namespace

void LnaNoiseParameters::validate() const {
  require(std::isfinite(t_min_k) && t_min_k >= 0.0, "LNA T_min must be >= 0");
  require(std::isfinite(noise_resistance_ohm) && noise_resistance_ohm >= 0.0,
          "LNA noise resistance must be >= 0");
  require(std::abs(gamma_opt) < 1.0, "LNA |gamma_opt| must be < 1");
  require(std::isfinite(linear_gain) && linear_gain > 0.0,
          "LNA gain must be > 0");
  require(std::isfinite(reference_z0_ohm) && reference_z0_ohm > 0.0,
          "reference impedance must be > 0");
  require(std::isfinite(reference_t0_k) && reference_t0_k > 0.0,
          "reference temperature must be > 0");
}

void ReceiverChain::validate() const {
  front_end.validate();
  require(std::isfinite(t_rec_k) && t_rec_k >= 0.0,
          "receiver T_REC must be >= 0");
  require(std::abs(gamma_c) <= 1.0, "receiver |gamma_c| must be <= 1");
  require(std::isfinite(t_image_k) && t_image_k >= 0.0,
          "receiver T_image must be >= 0");
}

double lna_input_noise_temperature(const LnaNoiseParameters& p,
                                   std::complex<double> gamma_s) {
  p.validate();
  const double mag2 = std::norm(gamma_s);
  if (!(mag2 < 1.0))
    throw std::domain_error("source reflection |gamma_s| must be < 1");
  return p.t_min_k + mismatch_term(p, gamma_s) / (1.0 - mag2);
}

double friis_cascade(std::span<const AmplifierStage> stages) {
  require(!stages.empty(), "friis_cascade needs at least one stage");
  double total = 0.0;
  double gain_so_far = 1.0;
  for (const auto& s : stages) {
    require(std::isfinite(s.noise_temperature_k) && s.noise_temperature_k >= 0.0,
            "stage noise temperature must be >= 0");
    require(std::isfinite(s.linear_gain) && s.linear_gain > 0.0,
            "stage gain must be > 0");
    total += s.noise_temperature_k / gain_so_far;
    gain_so_far *= s.linear_gain;
  }
  return total;
}

YFactorResult y_factor_noise_temperature(double t_hot_k, double t_cold_ref_k,
                                         double y) {
  require(std::isfinite(y) && y > 1.0, "Y factor must be > 1");
  require(std::isfinite(t_cold_ref_k) && t_cold_ref_k >= 0.0,
          "cold reference temperature must be >= 0");
  require(std::isfinite(t_hot_k) && t_hot_k > t_cold_ref_k,
          "hot reference must be hotter than the cold reference");
  const double t = (t_hot_k - y * t_cold_ref_k) / (y - 1.0);
  if (t < 0.0) return {0.0, true};
  return {t, false};
}

double noise_figure_db_to_temperature(double nf_db) {
  require(std::isfinite(nf_db) && nf_db >= 0.0, "noise figure must be >= 0 dB");
  return kReferenceTemperatureK * (std::pow(10.0, nf_db / 10.0) - 1.0);
}

double temperature_to_noise_figure_db(double t_k) {
  require(std::isfinite(t_k) && t_k >= 0.0, "noise temperature must be >= 0");
  return 10.0 * std::log10(1.0 + t_k / kReferenceTemperatureK);
}

double receiver_output_temperature(const ReceiverChain& chain, double t_mode_k) {
  const auto& fe = chain.front_end;
  const double mag2 = std::norm(chain.gamma_c);
  const double at_lna = (fe.t_min_k + t_mode_k) * (1.0 - mag2) +
                        mismatch_term(fe, chain.gamma_c) + chain.t_image_k;
  return fe.linear_gain * at_lna + chain.t_rec_k;
}

double noise_power_reduction_db(double t_mode_k, double t_mode_ambient_k,
                                const ReceiverChain& chain) {
  return noise_power_reduction_db(t_mode_k, chain, t_mode_ambient_k, chain);
}

double noise_power_reduction_db(double t_mode_k, const ReceiverChain& chain,
                                double t_mode_ambient_k,
                                const ReceiverChain& reference_chain) {
  require(std::isfinite(t_mode_k) && t_mode_k >= 0.0,
          "mode temperature must be >= 0");
  require(std::isfinite(t_mode_ambient_k) && t_mode_ambient_k >= 0.0,
          "ambient mode temperature must be >= 0");
  chain.validate();
  reference_chain.validate();
  return 10.0 * std::log10(receiver_output_temperature(chain, t_mode_k) /
                           receiver_output_temperature(reference_chain,
                                                       t_mode_ambient_k));
}

double deltap_floor_db(double t_mode_ambient_k, const ReceiverChain& chain) {
  return noise_power_reduction_db(0.0, t_mode_ambient_k, chain);
}

double infer_mode_temperature(double delta_p_db, double t_mode_ambient_k,
                              const ReceiverChain& chain) {
  require(std::isfinite(delta_p_db), "delta P must be finite");
  const double floor_db = deltap_floor_db(t_mode_ambient_k, chain);
  if (delta_p_db < floor_db) {
    std::ostringstream os;
    os << "delta P " << delta_p_db << " dB lies below the receiver floor of "
       << floor_db << " dB";
    throw std::out_of_range(os.str());
  }
  auto f = [&](double t) {
    return noise_power_reduction_db(t, t_mode_ambient_k, chain) - delta_p_db;
  };
  double lo = 0.0;
  double hi = t_mode_ambient_k;
  if (f(hi) < 0.0) {
    // Positive delta P: mode hotter than the reference.
    double step = std::max(t_mode_ambient_k, 1.0);
    while (f(hi) < 0.0) {
      lo = hi;
      hi += step;
      step *= 2.0;
      if (!std::isfinite(hi)) throw std::out_of_range("delta P too large to invert");
    }
  }
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<DeltaPCurvePoint> emit_deltap_curve(const ReceiverChain& chain,
                                                double t_mode_ambient_k,
                                                double t_lo_k, double t_hi_k,
                                                std::size_t samples) {
  require(samples >= 2, "delta P curve needs at least two samples");
  require(t_lo_k >= 0.0 && t_lo_k < t_hi_k && t_hi_k <= t_mode_ambient_k,
          "delta P curve range must lie within [0, T_ambient]");
  std::vector<DeltaPCurvePoint> out;
  out.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(samples - 1);
    const double t = i + 1 == samples ? t_hi_k : t_lo_k + (t_hi_k - t_lo_k) * u;
    out.push_back({t, noise_power_reduction_db(t, t_mode_ambient_k, chain)});
  }
  return out;
}

}  // namespace cpc
