#pragma once

// Welch power spectral density: Hann window, 50 % overlap, per-segment mean
// removal, one-sided density in V^2/Hz.

#include <span>
#include <vector>

namespace cpc {

struct PowerSpectrum {
  std::vector<double> frequency_hz;
  std::vector<double> density;
  /// Segments averaged, summed over every record that went in.
  std::size_t segments = 0;
  std::size_t segment_length = 0;
  double sample_interval_s = 0.0;

  double bin_width_hz() const {
    return 1.0 / (static_cast<double>(segment_length) * sample_interval_s);
  }
};

std::vector<double> hann_window(std::size_t n);

PowerSpectrum spectral_density(std::span<const double> x, double sample_interval_s,
                               std::size_t segment_length);

/// Segment-weighted average of spectra sharing one frequency grid.
PowerSpectrum average_spectra(const std::vector<PowerSpectrum>& spectra);

/// Equivalent chi-squared degrees of freedom per bin for Hann/50 % Welch.
double welch_degrees_of_freedom(std::size_t segments);

struct BandDeltaP {
  double delta_p_db = 0.0;
  double standard_error_db = 0.0;
  std::size_t bins = 0;
};

/// 10 log10 of the ratio of mean band powers, with a standard error from the
/// effective degrees of freedom of both estimates.
BandDeltaP band_averaged_deltap(const PowerSpectrum& cold,
                                const PowerSpectrum& ambient, double band_lo_hz,
                                double band_hi_hz);

}  // namespace cpc
