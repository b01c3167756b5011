#include "cpc/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fftw3.h>

namespace cpc {

namespace {

// Hann window: equivalent noise bandwidth in bins, and the squared
// correlation between segments overlapping by half.
constexpr double kHannEnbwBins = 1.5;
constexpr double kHannHalfOverlapRho2 = 0.1667 * 0.1667;

class FftPlan {
 public:
  explicit FftPlan(std::size_t n)
      : n_(n),
        in_(fftw_alloc_real(n)),
        out_(fftw_alloc_complex(n / 2 + 1)),
        plan_(fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE)) {
    if (!in_ || !out_ || !plan_) throw std::runtime_error("FFTW plan creation failed");
  }
  ~FftPlan() {
    fftw_destroy_plan(plan_);
    fftw_free(in_);
    fftw_free(out_);
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  double* input() { return in_; }
  const fftw_complex* output() const { return out_; }
  void execute() { fftw_execute(plan_); }
  std::size_t size() const { return n_; }

 private:
  std::size_t n_;
  double* in_;
  fftw_complex* out_;
  fftw_plan plan_;
};

}  // namespace

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(n));
  return w;
}

PowerSpectrum spectral_density(std::span<const double> x, double sample_interval_s,
                               std::size_t segment_length) {
  if (!(sample_interval_s > 0.0) || !std::isfinite(sample_interval_s))
    throw std::domain_error("sample interval must be finite and > 0");
  if (segment_length < 4 || segment_length % 2 != 0)
    throw std::domain_error("segment length must be even and >= 4");
  if (segment_length > x.size())
    throw std::domain_error("segment length exceeds the record length");

  const std::size_t n = segment_length;
  const std::size_t step = n / 2;
  const std::size_t bins = n / 2 + 1;
  const auto w = hann_window(n);
  double w2 = 0.0;
  for (double v : w) w2 += v * v;
  const double fs = 1.0 / sample_interval_s;
  const double scale = 1.0 / (fs * w2);

  FftPlan plan(n);
  PowerSpectrum ps;
  ps.segment_length = n;
  ps.sample_interval_s = sample_interval_s;
  ps.density.assign(bins, 0.0);
  ps.frequency_hz.resize(bins);
  for (std::size_t k = 0; k < bins; ++k)
    ps.frequency_hz[k] = static_cast<double>(k) * fs / static_cast<double>(n);

  for (std::size_t start = 0; start + n <= x.size(); start += step) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x[start + i];
    mean /= static_cast<double>(n);
    double* in = plan.input();
    for (std::size_t i = 0; i < n; ++i) in[i] = (x[start + i] - mean) * w[i];
    plan.execute();
    const fftw_complex* out = plan.output();
    for (std::size_t k = 0; k < bins; ++k) {
      double p = (out[k][0] * out[k][0] + out[k][1] * out[k][1]) * scale;
      if (k != 0 && k != n / 2) p *= 2.0;
      ps.density[k] += p;
    }
    ++ps.segments;
  }
  for (double& d : ps.density) d /= static_cast<double>(ps.segments);
  return ps;
}

PowerSpectrum average_spectra(const std::vector<PowerSpectrum>& spectra) {
  if (spectra.empty()) throw std::domain_error("no spectra to average");
  PowerSpectrum out = spectra.front();
  std::fill(out.density.begin(), out.density.end(), 0.0);
  out.segments = 0;
  for (const auto& s : spectra) {
    if (s.segment_length != out.segment_length ||
        s.sample_interval_s != out.sample_interval_s)
      throw std::domain_error("spectra use different frequency grids");
    for (std::size_t k = 0; k < out.density.size(); ++k)
      out.density[k] += s.density[k] * static_cast<double>(s.segments);
    out.segments += s.segments;
  }
  for (double& d : out.density) d /= static_cast<double>(out.segments);
  return out;
}

double welch_degrees_of_freedom(std::size_t segments) {
  if (segments == 0) return 0.0;
  const double k = static_cast<double>(segments);
  return 2.0 * k / (1.0 + 2.0 * kHannHalfOverlapRho2 * (1.0 - 1.0 / k));
}

BandDeltaP band_averaged_deltap(const PowerSpectrum& cold,
                                const PowerSpectrum& ambient, double band_lo_hz,
                                double band_hi_hz) {
  if (!(band_lo_hz < band_hi_hz)) throw std::domain_error("band must have lo < hi");
  auto band_mean = [&](const PowerSpectrum& ps, std::size_t& count) {
    double sum = 0.0;
    count = 0;
    for (std::size_t k = 0; k < ps.frequency_hz.size(); ++k) {
      const double f = ps.frequency_hz[k];
      if (f >= band_lo_hz && f <= band_hi_hz) {
        sum += ps.density[k];
        ++count;
      }
    }
    if (count == 0) throw std::domain_error("band contains no frequency bins");
    return sum / static_cast<double>(count);
  };
  std::size_t nc = 0, na = 0;
  const double pc = band_mean(cold, nc);
  const double pa = band_mean(ambient, na);
  if (!(pc > 0.0) || !(pa > 0.0))
    throw std::domain_error("band power must be positive");

  auto dof = [](const PowerSpectrum& ps, std::size_t bins) {
    const double independent = std::max(1.0, static_cast<double>(bins) / kHannEnbwBins);
    return welch_degrees_of_freedom(ps.segments) * independent;
  };
  BandDeltaP r;
  r.delta_p_db = 10.0 * std::log10(pc / pa);
  r.standard_error_db = 10.0 / std::numbers::ln10 *
                        std::sqrt(2.0 / dof(cold, nc) + 2.0 / dof(ambient, na));
  r.bins = nc;
  return r;
}

}  // namespace cpc
