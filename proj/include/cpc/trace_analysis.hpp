#pragma once

// Trace-domain recipes: ensemble-mean artifact removal, boxcar noise
// extraction and windowed noise-power ratios.

#include <optional>
#include <span>
#include <vector>

#include "cpc/trace_synth.hpp"

namespace cpc {

struct NoiseExtractionConfig {
  double boxcar_width_s = 100e-9;
};

/// Analysis settings. Section times are relative to the disconnect instant.
struct AnalysisConfig {
  NoiseExtractionConfig extraction;
  double window_s = 1e-6;
  double exclude_before_s = 2e-6;
  double fit_end_s = 60e-6;
  double reference_start_s = 80e-6;
  double reference_end_s = 110e-6;
  double band_lo_hz = 5e6;
  double band_hi_hz = 10e6;
  std::size_t psd_segment_length = 1024;
  /// Length of the cooled section just before the disconnect.
  double cold_section_s = 10e-6;
  bool compute_psd = true;

  void validate() const;
};

/// Boxcar length in samples for a trace sampled at dt (at least 1).
std::size_t boxcar_samples(const NoiseExtractionConfig& cfg, double dt_s);

/// Each trace minus the ensemble mean. Needs >= 2 traces on one grid.
std::vector<NoiseTrace> subtract_mean_artifact(const std::vector<NoiseTrace>& traces);

/// x minus its centred moving average of `width` samples. Windows are
/// truncated at both ends, so the first and last width/2 samples are
/// smoothed over fewer points.
void extract_noise_inplace(std::span<const double> x, std::span<double> out,
                           std::size_t width);
NoiseTrace extract_noise(const NoiseTrace& trace, const NoiseExtractionConfig& cfg);

struct DeltaPPoint {
  double time_s;
  /// Missing when the window holds no power.
  std::optional<double> delta_p_db;
};

/// Mean-square of consecutive `window`-sample blocks of `cold` relative to
/// the mean-square of `reference`. Block times are block centres, measured
/// from t0_s at the first cold sample.
std::vector<DeltaPPoint> windowed_deltap_timeseries(std::span<const double> cold,
                                                    std::span<const double> reference,
                                                    std::size_t window, double dt_s,
                                                    double t0_s = 0.0);

/// Same on per-sample power (already squared and averaged over shots).
std::vector<DeltaPPoint> windowed_deltap_from_power(std::span<const double> cold_power,
                                                    double reference_power,
                                                    std::size_t window, double dt_s,
                                                    double t0_s = 0.0);

/// Per-sample sums over shots of extracted noise and of its square. Because
/// mean subtraction and boxcar extraction are both linear, the pooled power
/// of the mean-subtracted ensemble follows from these two sums alone, so
/// shots can be streamed without being kept.
class EnsembleStatistics {
 public:
  EnsembleStatistics(double start_time_s, double dt_s, std::size_t samples);

  /// Adds one shot of extracted noise.
  void add(std::span<const double> extracted);

  std::size_t shots() const { return shots_; }
  std::size_t samples() const { return sum_.size(); }
  double start_time_s() const { return start_time_s_; }
  double dt_s() const { return dt_s_; }
  double time_at(std::size_t i) const {
    return start_time_s_ + static_cast<double>(i) * dt_s_;
  }
  /// Sample index of time t, rounded to the nearest sample, clamped.
  std::size_t index_of(double t_s) const;

  /// Per-sample variance across shots after removing the ensemble mean
  /// (unbiased); with one shot, the plain square.
  std::vector<double> pooled_power() const;
  double mean_pooled_power(std::size_t begin, std::size_t end) const;
  /// Ensemble mean of the extracted noise, per sample.
  std::vector<double> mean() const;

 private:
  double start_time_s_;
  double dt_s_;
  std::size_t shots_ = 0;
  std::vector<double> sum_;
  std::vector<double> sum_sq_;
};

}  // namespace cpc
