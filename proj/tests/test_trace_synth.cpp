#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include "cpc/noise_core.hpp"
#include "cpc/rng.hpp"
#include "cpc/spectral.hpp"
#include "cpc/trace_synth.hpp"

using namespace cpc;

namespace {

constexpr double kF = 1.4495e9;

// Uniform trajectory with temperature t_a before t_step and t_b after it.
PhotonTrajectory step_trajectory(double t_a, double t_b, double t_step, double t_end,
                                 double dt = 10e-9) {
  PhotonTrajectory tr;
  const auto n = static_cast<std::size_t>(std::llround(t_end / dt)) + 1;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    const double temp = t < t_step ? t_a : t_b;
    tr.times_s.push_back(t);
    tr.temperature_k.push_back(temp);
    tr.occupancy.push_back(photon_occupancy(kF, temp));
  }
  return tr;
}

PhotonTrajectory flat_trajectory(double temp, double t_end) {
  return step_trajectory(temp, temp, t_end, t_end, t_end / 100);
}

SynthConfig white_config(double duration, double dt = 1e-9) {
  SynthConfig c;
  c.sample_interval_s = dt;
  c.duration_s = duration;
  c.one_over_f_corner_hz = 0.0;
  c.rng_seed = 17;
  return c;
}

double mean_square(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s / static_cast<double>(x.size());
}

}  // namespace

TEST_CASE("seed derivation and generator match reference values") {
  CHECK(derive_shot_seed(1, 0) == 0x910a2dec89025cc1ULL);
  CHECK(derive_shot_seed(42, 7) == 0xccf635ee9e9e2fa4ULL);
  Xoshiro256pp g(0);
  CHECK(g() == 0x53175d61490b23dfULL);
  CHECK(g() == 0x61da6f3dc380d507ULL);
  CHECK(g() == 0x5c0fdf91ec9a7bfcULL);
}

TEST_CASE("shot seeds are distinct") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t m : {0ULL, 1ULL, 2ULL})
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_shot_seed(m, i));
  CHECK(seen.size() == 3000);
}

TEST_CASE("white noise variance matches the receiver output temperature") {
  const auto traj = flat_trajectory(108.1, 1.1e-3);
  auto cfg = white_config(1e-3);
  cfg.voltage_scale = 1e-6;
  const auto tr = synthesize_trace(traj, ReceiverChain{}, cfg);
  REQUIRE(tr.size() == 1000000);
  const double expected = 1e-12 * receiver_output_temperature(ReceiverChain{}, 108.1);
  const double mean = std::accumulate(tr.voltages.begin(), tr.voltages.end(), 0.0) /
                      static_cast<double>(tr.size());
  double var = 0.0;
  for (double v : tr.voltages) var += (v - mean) * (v - mean);
  var /= static_cast<double>(tr.size() - 1);
  CHECK(std::abs(var / expected - 1.0) < 0.005);
}

TEST_CASE("zero voltage scale gives the deterministic part only") {
  const auto traj = flat_trajectory(100.0, 30e-6);
  auto cfg = white_config(20e-6);
  cfg.voltage_scale = 0.0;
  cfg.one_over_f_corner_hz = 1e6;
  cfg.injected_signal = {1.0, 2.0, 3.0};
  const auto tr = synthesize_trace(traj, ReceiverChain{}, cfg);
  CHECK(tr.voltages[0] == 1.0);
  CHECK(tr.voltages[2] == 3.0);
  for (std::size_t i = 3; i < tr.size(); ++i) CHECK(tr.voltages[i] == 0.0);
}

TEST_CASE("power ratio between a cooled and an ambient segment") {
  const auto traj = step_trajectory(108.1, 255.4, 500e-6, 1.01e-3);
  auto cfg = white_config(1e-3);
  cfg.voltage_scale = 1e-6;
  const auto tr = synthesize_trace(traj, ReceiverChain{}, cfg);
  const std::span<const double> v(tr.voltages);
  const double ratio = 10.0 * std::log10(mean_square(v.subspan(0, 499000)) /
                                         mean_square(v.subspan(501000)));
  CHECK(std::abs(ratio + 3.5) <= 0.2);
  CHECK(ratio == doctest::Approx(noise_power_reduction_db(108.1, 255.4, ReceiverChain{}))
                     .epsilon(0.01));
}

TEST_CASE("samples are Gaussian (Jarque-Bera)") {
  const auto traj = flat_trajectory(200.0, 210e-6);
  const auto tr = synthesize_trace(traj, ReceiverChain{}, white_config(200e-6));
  const double n = static_cast<double>(tr.size());
  const double mean = std::accumulate(tr.voltages.begin(), tr.voltages.end(), 0.0) / n;
  double m2 = 0, m3 = 0, m4 = 0;
  for (double v : tr.voltages) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  const double skew = m3 / std::pow(m2, 1.5);
  const double kurt = m4 / (m2 * m2);
  const double jb = n / 6.0 * (skew * skew + 0.25 * (kurt - 3.0) * (kurt - 3.0));
  // chi^2 with 2 degrees of freedom: 13.8 is the 0.1 % tail.
  CHECK(jb < 13.8);
}

TEST_CASE("same seed reproduces a trace bit for bit") {
  const auto traj = flat_trajectory(150.0, 60e-6);
  auto cfg = white_config(50e-6);
  cfg.one_over_f_corner_hz = 1e6;
  const auto a = synthesize_trace(traj, ReceiverChain{}, cfg);
  const auto b = synthesize_trace(traj, ReceiverChain{}, cfg);
  CHECK(a.voltages == b.voltages);
  CHECK(a.config_digest == b.config_digest);
  CHECK(a.config_digest.size() == 64);
  cfg.rng_seed = 18;
  const auto c = synthesize_trace(traj, ReceiverChain{}, cfg);
  CHECK(c.voltages != a.voltages);
  CHECK(c.config_digest == a.config_digest);
  cfg.voltage_scale = 2.0;
  CHECK(cfg.digest() != a.config_digest);
}

TEST_CASE("ensemble shots use derived seeds") {
  const auto traj = flat_trajectory(150.0, 60e-6);
  auto cfg = white_config(50e-6);
  const auto one = synthesize_shot_ensemble(1, traj, ReceiverChain{}, cfg);
  REQUIRE(one.size() == 1);
  CHECK(one[0].seed == derive_shot_seed(cfg.rng_seed, 0));
  const auto three = synthesize_shot_ensemble(3, traj, ReceiverChain{}, cfg);
  CHECK(three[0].voltages == one[0].voltages);
  CHECK(three[1].voltages != three[0].voltages);
  const TraceSynthesizer synth(traj, ReceiverChain{}, cfg);
  CHECK(synth.generate(derive_shot_seed(cfg.rng_seed, 2)).voltages == three[2].voltages);
  CHECK_THROWS_AS(synthesize_shot_ensemble(0, traj, ReceiverChain{}, cfg), std::domain_error);
}

TEST_CASE("switch artifact is identical across seeds") {
  const auto traj = flat_trajectory(150.0, 60e-6);
  auto cfg = white_config(50e-6);
  cfg.artifact_amplitude_v = 0.3;
  cfg.artifact_duration_s = 2e-6;
  const std::vector<double> at{10e-6};
  const TraceSynthesizer synth(traj, ReceiverChain{}, cfg, at);
  const auto det = synth.deterministic();
  CHECK(det[9999] == 0.0);
  CHECK(det[10000] == 0.0);
  CHECK(det[10000 + 83] == doctest::Approx(0.3 * switch_artifact_shape(0.0415)));
  CHECK(std::abs(det[12000]) < 1e-12);

  auto zero = cfg;
  zero.voltage_scale = 0.0;
  const TraceSynthesizer quiet(traj, ReceiverChain{}, zero, at);
  const auto a = quiet.generate(1);
  const auto b = quiet.generate(2);
  CHECK(a.voltages == b.voltages);

  NoiseTrace plain = synthesize_trace(traj, ReceiverChain{}, zero);
  inject_switch_artifact(plain, zero, at);
  for (std::size_t i = 0; i < plain.size(); ++i)
    CHECK(plain.voltages[i] == doctest::Approx(a.voltages[i]));
}

TEST_CASE("artifact shape") {
  CHECK(switch_artifact_shape(-0.1) == 0.0);
  CHECK(switch_artifact_shape(1.0) == 0.0);
  CHECK(switch_artifact_shape(0.0) == 0.0);
  CHECK(switch_artifact_shape(1.0 / 12.0) == doctest::Approx(std::exp(-1.0 / 3.0)));
}

TEST_CASE("flicker noise corner sits at the configured frequency") {
  const double fc = 1e6;
  const double dt = 10e-9;
  const auto traj = flat_trajectory(150.0, 2.1e-3);
  SynthConfig cfg = white_config(2e-3, dt);
  cfg.one_over_f_corner_hz = fc;
  const TraceSynthesizer synth(traj, ReceiverChain{}, cfg);
  std::vector<PowerSpectrum> spectra;
  for (std::uint64_t s = 0; s < 16; ++s)
    spectra.push_back(spectral_density(synth.generate(s).voltages, dt, 8192));
  const auto psd = average_spectra(spectra);
  const double floor = synth.white_floor();

  // The corner is where the flicker part equals the white floor, S = 2W.
  // Smooth over +-10 % bands on a log grid and find the crossing.
  auto band_mean = [&](double f) {
    double acc = 0.0;
    std::size_t bins = 0;
    for (std::size_t k = 1; k < psd.frequency_hz.size(); ++k)
      if (psd.frequency_hz[k] > f / 1.1 && psd.frequency_hz[k] < f * 1.1) {
        acc += psd.density[k];
        ++bins;
      }
    return acc / static_cast<double>(bins) / floor;
  };
  double fc_est = 0.0;
  double f_prev = fc / 10, r_prev = band_mean(f_prev);
  for (double f = f_prev * 1.05; f < 10 * fc; f *= 1.05) {
    const double r = band_mean(f);
    if (r_prev >= 2.0 && r < 2.0) {
      fc_est = f_prev * std::pow(f / f_prev, (r_prev - 2.0) / (r_prev - r));
      break;
    }
    f_prev = f;
    r_prev = r;
  }
  CHECK(fc_est > 0.8 * fc);
  CHECK(fc_est < 1.2 * fc);

  // Far above the corner the spectrum is white at the floor.
  double hi = 0.0;
  std::size_t hi_bins = 0;
  for (std::size_t k = 0; k < psd.frequency_hz.size(); ++k)
    if (psd.frequency_hz[k] > 20 * fc && psd.frequency_hz[k] < 40 * fc) {
      hi += psd.density[k];
      ++hi_bins;
    }
  CHECK(hi / static_cast<double>(hi_bins) == doctest::Approx(floor).epsilon(0.06));
}

TEST_CASE("configuration validation") {
  const auto traj = flat_trajectory(150.0, 60e-6);
  auto cfg = white_config(50e-6);
  CHECK(cfg.sample_count() == 50000);
  auto bad = cfg;
  bad.sample_interval_s = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
  bad = cfg;
  bad.voltage_scale = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
  bad = cfg;
  bad.duration_s = 5e-9;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
  bad = cfg;
  bad.duration_s = 100e-6;
  CHECK_THROWS_AS(synthesize_trace(traj, ReceiverChain{}, bad), std::domain_error);
  bad = cfg;
  bad.artifact_amplitude_v = 1.0;
  bad.artifact_duration_s = 60e-6;
  const std::vector<double> at{1e-6};
  CHECK_THROWS_AS(TraceSynthesizer(traj, ReceiverChain{}, bad, at), std::domain_error);
}

TEST_CASE("trace timing") {
  const auto traj = flat_trajectory(150.0, 60e-6);
  auto cfg = white_config(20e-6);
  cfg.start_time_s = 30e-6;
  const auto tr = synthesize_trace(traj, ReceiverChain{}, cfg);
  CHECK(tr.start_time_s == 30e-6);
  CHECK(tr.time_at(1000) == doctest::Approx(31e-6));
}
