#pragma once

// Damped least-squares fit of y(t) = a1 exp(-t/tau1) + a2 exp(-t/tau2).

#include <span>
#include <vector>

#include "cpc/trace_analysis.hpp"

namespace cpc {

struct FitOptions {
  /// Points with t < exclude_before_s are dropped.
  double exclude_before_s = 2e-6;
  std::size_t max_iterations = 500;
  /// Stop once an accepted step lowers the cost by less than this fraction.
  double relative_tolerance = 1e-10;
  /// Time constants closer than this fraction collapse to one exponential.
  double degenerate_tau_fraction = 0.05;
  /// A component smaller than this fraction of the other over the fitted
  /// span counts as vanished.
  double vanishing_amplitude_fraction = 1e-3;
};

struct BiExpFit {
  double a1 = 0.0;
  double a2 = 0.0;
  double tau1_s = 0.0;  // tau1 <= tau2
  double tau2_s = 0.0;
  double se_a1 = 0.0;
  double se_a2 = 0.0;
  double se_tau1_s = 0.0;
  double se_tau2_s = 0.0;
  double cov_a1_a2 = 0.0;
  double residual_norm = 0.0;
  std::size_t points = 0;
  std::size_t iterations = 0;
  bool converged = false;
  /// Reported as a single exponential: a1 = 0 and tau1 = tau2.
  bool single_exponential = false;
  std::vector<double> residuals;

  double evaluate(double t_s) const;
  double warmup_time_s() const { return tau2_s; }
};

/// Throws std::domain_error with fewer than 8 usable points and
/// DegenerateFitError when even the one-exponential model is rank-deficient.
BiExpFit fit_biexponential(std::span<const double> t_s, std::span<const double> y,
                           const FitOptions& opt = {});
BiExpFit fit_biexponential(const std::vector<DeltaPPoint>& series,
                           const FitOptions& opt = {});

struct DepthEstimate {
  double delta_p_db = 0.0;
  double standard_error_db = 0.0;
};

/// a1 + a2 with its propagated standard error. Throws NotConvergedError for
/// an unconverged fit.
DepthEstimate cooling_depth_from_fit(const BiExpFit& fit);

}  // namespace cpc
