#include "cpc/trace_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cpc {

void AnalysisConfig::validate() const {
  auto pos = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!pos(extraction.boxcar_width_s)) throw std::domain_error("boxcar width must be > 0");
  if (!pos(window_s)) throw std::domain_error("window must be > 0");
  if (!(std::isfinite(exclude_before_s) && exclude_before_s >= 0.0))
    throw std::domain_error("exclusion must be >= 0");
  if (!(pos(fit_end_s) && fit_end_s > exclude_before_s))
    throw std::domain_error("fit end must lie after the exclusion");
  if (!(std::isfinite(reference_start_s) && reference_start_s >= 0.0 &&
        std::isfinite(reference_end_s) && reference_end_s > reference_start_s))
    throw std::domain_error("reference section must have start < end");
  if (!(pos(band_lo_hz) && std::isfinite(band_hi_hz) && band_hi_hz > band_lo_hz))
    throw std::domain_error("band must have 0 < lo < hi");
  if (psd_segment_length < 4 || psd_segment_length % 2 != 0)
    throw std::domain_error("PSD segment length must be even and >= 4");
  if (!pos(cold_section_s)) throw std::domain_error("cold section must be > 0");
}

std::size_t boxcar_samples(const NoiseExtractionConfig& cfg, double dt_s) {
  if (!(dt_s > 0.0)) throw std::domain_error("sample interval must be > 0");
  if (!(cfg.boxcar_width_s >= dt_s * (1.0 - 1e-9)))
    throw std::domain_error("boxcar width must be at least one sample interval");
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.boxcar_width_s / dt_s)));
}

std::vector<NoiseTrace> subtract_mean_artifact(const std::vector<NoiseTrace>& traces) {
  if (traces.size() < 2) throw std::domain_error("artifact subtraction needs >= 2 traces");
  const auto& first = traces.front();
  for (const auto& t : traces)
    if (t.size() != first.size() || t.dt_s != first.dt_s ||
        t.start_time_s != first.start_time_s)
      throw std::domain_error("traces are not on the same time grid");

  std::vector<double> mean(first.size(), 0.0);
  for (const auto& t : traces)
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += t.voltages[i];
  const double inv = 1.0 / static_cast<double>(traces.size());
  for (double& m : mean) m *= inv;

  std::vector<NoiseTrace> out = traces;
  for (auto& t : out)
    for (std::size_t i = 0; i < mean.size(); ++i) t.voltages[i] -= mean[i];
  return out;
}

void extract_noise_inplace(std::span<const double> x, std::span<double> out,
                           std::size_t width) {
  const std::size_t n = x.size();
  if (out.size() != n) throw std::invalid_argument("output size mismatch");
  if (width == 0) throw std::domain_error("boxcar width must be >= 1 sample");
  if (width > n) throw std::domain_error("boxcar window longer than the trace");
  if (n == 0) return;
  const std::size_t left = width / 2;
  const std::size_t right = width - 1 - left;

  if (width == 1) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }

  // Running window sum over [lo, hi), updated as the window slides.
  double sum = 0.0;
  std::size_t lo = 0, hi = 0;
  auto edge = [&](std::size_t i) {
    const std::size_t want_lo = i >= left ? i - left : 0;
    const std::size_t want_hi = std::min(n, i + right + 1);
    while (hi < want_hi) sum += x[hi++];
    while (lo < want_lo) sum -= x[lo++];
    out[i] = x[i] - sum / static_cast<double>(hi - lo);
  };

  // Full windows exist for i in [left, n - right - 1].
  const std::size_t full_begin = std::min(n, left);
  const std::size_t full_end = n > right ? n - right : 0;
  std::size_t i = 0;
  for (; i < full_begin; ++i) edge(i);
  if (i < full_end) {
    edge(i);
    const double inv = 1.0 / static_cast<double>(width);
    for (++i; i < full_end; ++i) {
      sum += x[i + right] - x[i - left - 1];
      out[i] = x[i] - sum * inv;
    }
    lo = i - 1 - left;
    hi = i + right;
  }
  for (; i < n; ++i) edge(i);
}

NoiseTrace extract_noise(const NoiseTrace& trace, const NoiseExtractionConfig& cfg) {
  NoiseTrace out = trace;
  extract_noise_inplace(trace.voltages, out.voltages, boxcar_samples(cfg, trace.dt_s));
  return out;
}

std::vector<DeltaPPoint> windowed_deltap_from_power(std::span<const double> cold_power,
                                                    double reference_power,
                                                    std::size_t window, double dt_s,
                                                    double t0_s) {
  if (window == 0) throw std::domain_error("window must hold at least one sample");
  if (cold_power.size() < window)
    throw std::domain_error("cold section shorter than one window");
  if (!(reference_power > 0.0)) throw std::domain_error("reference power must be > 0");
  std::vector<DeltaPPoint> out;
  const std::size_t blocks = cold_power.size() / window;
  out.reserve(blocks);
  for (std::size_t b = 0; b < blocks; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < window; ++i) s += cold_power[b * window + i];
    const double ms = s / static_cast<double>(window);
    const double t = t0_s + (static_cast<double>(b * window) +
                             0.5 * static_cast<double>(window)) * dt_s;
    if (ms > 0.0 && std::isfinite(ms))
      out.push_back({t, 10.0 * std::log10(ms / reference_power)});
    else
      out.push_back({t, std::nullopt});
  }
  return out;
}

std::vector<DeltaPPoint> windowed_deltap_timeseries(std::span<const double> cold,
                                                    std::span<const double> reference,
                                                    std::size_t window, double dt_s,
                                                    double t0_s) {
  if (reference.empty()) throw std::domain_error("reference section is empty");
  double ref = 0.0;
  for (double v : reference) ref += v * v;
  ref /= static_cast<double>(reference.size());
  std::vector<double> power(cold.size());
  for (std::size_t i = 0; i < cold.size(); ++i) power[i] = cold[i] * cold[i];
  return windowed_deltap_from_power(power, ref, window, dt_s, t0_s);
}

EnsembleStatistics::EnsembleStatistics(double start_time_s, double dt_s,
                                       std::size_t samples)
    : start_time_s_(start_time_s), dt_s_(dt_s), sum_(samples, 0.0), sum_sq_(samples, 0.0) {
  if (!(dt_s > 0.0)) throw std::domain_error("sample interval must be > 0");
}

void EnsembleStatistics::add(std::span<const double> extracted) {
  if (extracted.size() != sum_.size())
    throw std::domain_error("shot length does not match the ensemble");
  double* s = sum_.data();
  double* q = sum_sq_.data();
  for (std::size_t i = 0; i < extracted.size(); ++i) {
    const double r = extracted[i];
    s[i] += r;
    q[i] += r * r;
  }
  ++shots_;
}

std::size_t EnsembleStatistics::index_of(double t_s) const {
  const double pos = std::round((t_s - start_time_s_) / dt_s_);
  if (pos <= 0.0) return 0;
  return std::min(sum_.size(), static_cast<std::size_t>(pos));
}

std::vector<double> EnsembleStatistics::pooled_power() const {
  if (shots_ == 0) throw std::domain_error("ensemble is empty");
  std::vector<double> p(sum_.size());
  const double s = static_cast<double>(shots_);
  if (shots_ == 1) {
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = sum_sq_[i];
    return p;
  }
  for (std::size_t i = 0; i < p.size(); ++i)
    p[i] = std::max(0.0, (sum_sq_[i] - sum_[i] * sum_[i] / s) / (s - 1.0));
  return p;
}

double EnsembleStatistics::mean_pooled_power(std::size_t begin, std::size_t end) const {
  if (begin >= end || end > sum_.size())
    throw std::domain_error("empty or out-of-range section");
  const auto p = pooled_power();
  double acc = 0.0;
  for (std::size_t i = begin; i < end; ++i) acc += p[i];
  return acc / static_cast<double>(end - begin);
}

std::vector<double> EnsembleStatistics::mean() const {
  if (shots_ == 0) throw std::domain_error("ensemble is empty");
  std::vector<double> m(sum_);
  const double inv = 1.0 / static_cast<double>(shots_);
  for (double& v : m) v *= inv;
  return m;
}

}  // namespace cpc
