#include "cpc/trace_synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <boost/random/normal_distribution.hpp>

#include "cpc/digest.hpp"
#include "cpc/rng.hpp"
#include "cpc/text.hpp"

namespace cpc {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::domain_error(what);
}

constexpr std::uint64_t kFlickerStreamKey = 0xD1B54A32D192ED03ULL;
constexpr std::size_t kMaxFlickerPoles = 40;
// Coarse flicker grid: this many updates per period of the corner frequency.
constexpr double kFlickerUpdatesPerCornerPeriod = 20.0;

}  // namespace

void SynthConfig::validate() const {
  require(std::isfinite(sample_interval_s) && sample_interval_s > 0.0,
          "sample interval must be finite and > 0");
  require(std::isfinite(duration_s) && duration_s >= 10.0 * sample_interval_s,
          "duration must be at least 10 sample intervals");
  require(std::isfinite(start_time_s) && start_time_s >= 0.0,
          "trace start time must be finite and >= 0");
  require(std::isfinite(one_over_f_corner_hz) && one_over_f_corner_hz >= 0.0,
          "1/f corner must be finite and >= 0");
  require(std::isfinite(artifact_duration_s) && artifact_duration_s > 0.0,
          "artifact duration must be finite and > 0");
  require(std::isfinite(artifact_amplitude_v), "artifact amplitude must be finite");
  require(std::isfinite(voltage_scale) && voltage_scale >= 0.0,
          "voltage scale must be finite and >= 0");
  for (double v : injected_signal)
    require(std::isfinite(v), "injected signal must be finite");
}

std::size_t SynthConfig::sample_count() const {
  return static_cast<std::size_t>(std::llround(duration_s / sample_interval_s));
}

std::string SynthConfig::digest() const {
  std::ostringstream os;
  os << "sample_interval_s=" << format_number(sample_interval_s) << '\n'
     << "duration_s=" << format_number(duration_s) << '\n'
     << "start_time_s=" << format_number(start_time_s) << '\n'
     << "one_over_f_corner_hz=" << format_number(one_over_f_corner_hz) << '\n'
     << "artifact_duration_s=" << format_number(artifact_duration_s) << '\n'
     << "artifact_amplitude_v=" << format_number(artifact_amplitude_v) << '\n'
     << "voltage_scale=" << format_number(voltage_scale) << '\n'
     << "injected_signal=";
  for (double v : injected_signal) os << format_number(v) << ',';
  os << '\n';
  return sha256_hex(os.str());
}

double switch_artifact_shape(double u) {
  if (u < 0.0 || u >= 1.0) return 0.0;
  return std::sin(2.0 * std::numbers::pi * 3.0 * u) * std::exp(-4.0 * u);
}

TraceSynthesizer::TraceSynthesizer(const PhotonTrajectory& trajectory,
                                   const ReceiverChain& chain, SynthConfig cfg,
                                   std::vector<double> artifact_times_s)
    : cfg_(std::move(cfg)) {
  cfg_.validate();
  chain.validate();
  digest_ = cfg_.digest();
  const std::size_t n = cfg_.sample_count();
  const double dt = cfg_.sample_interval_s;
  const double last_t = cfg_.start_time_s + static_cast<double>(n - 1) * dt;
  if (trajectory.size() == 0 ||
      trajectory.duration_s() < last_t * (1.0 - 1e-12)) {
    std::ostringstream os;
    os << "trajectory ends at " << trajectory.duration_s()
       << " s but the trace needs " << last_t << " s";
    throw std::domain_error(os.str());
  }

  sigma_.resize(n);
  double mean_var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = cfg_.start_time_s + static_cast<double>(i) * dt;
    const double t_out = receiver_output_temperature(chain, trajectory.temperature_at(t));
    sigma_[i] = cfg_.voltage_scale * std::sqrt(t_out);
    mean_var += sigma_[i] * sigma_[i];
  }
  mean_var /= static_cast<double>(n);
  white_floor_ = 2.0 * dt * mean_var;

  deterministic_.assign(n, 0.0);
  const std::size_t m = std::min(n, cfg_.injected_signal.size());
  for (std::size_t i = 0; i < m; ++i) deterministic_[i] = cfg_.injected_signal[i];
  if (cfg_.artifact_amplitude_v != 0.0 && !artifact_times_s.empty()) {
    require(cfg_.artifact_duration_s < cfg_.duration_s,
            "artifact duration must be shorter than the trace");
    for (std::size_t i = 0; i < n; ++i) {
      const double t = cfg_.start_time_s + static_cast<double>(i) * dt;
      for (double te : artifact_times_s)
        deterministic_[i] += cfg_.artifact_amplitude_v *
                             switch_artifact_shape((t - te) / cfg_.artifact_duration_s);
    }
  }

  const double fc = cfg_.one_over_f_corner_hz;
  if (fc > 0.0 && white_floor_ > 0.0) {
    const double f_lowest = 1.0 / cfg_.duration_s;
    double g = 0.0;
    for (std::size_t k = 0; k < kMaxFlickerPoles; ++k) {
      const double fk = fc * std::ldexp(1.0, -static_cast<int>(k));
      if (k > 0 && fk < f_lowest) break;
      poles_.push_back(fk);
      const double r = fc / fk;
      g += (2.0 / (std::numbers::pi * fk)) / (1.0 + r * r);
    }
    flicker_var_ = white_floor_ / g;
    coarse_stride_ = std::max<std::size_t>(
        1, static_cast<std::size_t>(1.0 / (kFlickerUpdatesPerCornerPeriod * fc * dt)));
  }
}

void TraceSynthesizer::add_flicker(std::uint64_t seed, std::span<double> out) const {
  if (poles_.empty()) return;
  const std::size_t n = out.size();
  const std::size_t stride = coarse_stride_;
  const std::size_t nodes = (n - 1) / stride + 2;
  const double h = static_cast<double>(stride) * cfg_.sample_interval_s;

  Xoshiro256pp gen(splitmix64_mix(seed ^ kFlickerStreamKey));
  boost::random::normal_distribution<double> normal;
  const double sd = std::sqrt(flicker_var_);

  std::vector<double> coarse(nodes, 0.0);
  for (double fk : poles_) {
    const double a = std::exp(-2.0 * std::numbers::pi * fk * h);
    const double innov = sd * std::sqrt(1.0 - a * a);
    double x = sd * normal(gen);
    coarse[0] += x;
    for (std::size_t j = 1; j < nodes; ++j) {
      x = a * x + innov * normal(gen);
      coarse[j] += x;
    }
  }
  const double inv = 1.0 / static_cast<double>(stride);
  for (std::size_t j = 0; j * stride < n; ++j) {
    const double c0 = coarse[j];
    const double slope = (coarse[j + 1] - c0) * inv;
    const std::size_t end = std::min(n, (j + 1) * stride);
    for (std::size_t i = j * stride; i < end; ++i)
      out[i] += c0 + slope * static_cast<double>(i - j * stride);
  }
}

void TraceSynthesizer::generate(std::uint64_t seed, std::span<double> out) const {
  if (out.size() != sigma_.size())
    throw std::invalid_argument("output span does not match the trace length");
  Xoshiro256pp gen(seed);
  boost::random::normal_distribution<double> normal;
  const double* s = sigma_.data();
  const double* d = deterministic_.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = s[i] * normal(gen) + d[i];
  add_flicker(seed, out);
}

NoiseTrace TraceSynthesizer::generate(std::uint64_t seed) const {
  NoiseTrace tr;
  tr.start_time_s = cfg_.start_time_s;
  tr.dt_s = cfg_.sample_interval_s;
  tr.voltages.resize(sigma_.size());
  tr.seed = seed;
  tr.config_digest = digest_;
  generate(seed, tr.voltages);
  return tr;
}

NoiseTrace synthesize_trace(const PhotonTrajectory& trajectory,
                            const ReceiverChain& chain, const SynthConfig& cfg) {
  return TraceSynthesizer(trajectory, chain, cfg).generate(cfg.rng_seed);
}

void inject_switch_artifact(NoiseTrace& trace, const SynthConfig& cfg,
                            std::span<const double> event_times_s) {
  require(std::isfinite(cfg.artifact_duration_s) && cfg.artifact_duration_s > 0.0,
          "artifact duration must be finite and > 0");
  if (cfg.artifact_amplitude_v == 0.0) return;
  const double span = static_cast<double>(trace.size()) * trace.dt_s;
  require(cfg.artifact_duration_s < span,
          "artifact duration must be shorter than the trace");
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const double t = trace.time_at(i);
    for (double te : event_times_s)
      trace.voltages[i] += cfg.artifact_amplitude_v *
                           switch_artifact_shape((t - te) / cfg.artifact_duration_s);
  }
}

std::vector<NoiseTrace> synthesize_shot_ensemble(
    std::size_t n_shots, const PhotonTrajectory& trajectory,
    const ReceiverChain& chain, const SynthConfig& cfg,
    std::span<const double> artifact_times_s) {
  require(n_shots >= 1, "ensemble needs at least one shot");
  TraceSynthesizer synth(trajectory, chain, cfg,
                         {artifact_times_s.begin(), artifact_times_s.end()});
  std::vector<NoiseTrace> out;
  out.reserve(n_shots);
  for (std::size_t i = 0; i < n_shots; ++i)
    out.push_back(synth.generate(derive_shot_seed(cfg.rng_seed, i)));
  return out;
}

}  // namespace cpc
