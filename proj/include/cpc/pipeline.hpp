#pragma once

// End-to-end orchestration: config -> schedule -> trajectory -> traces, and
// traces -> noise power ratios -> warm-up fit -> inferred mode temperature.

#include <optional>
#include <string>
#include <vector>

#include "cpc/biexp_fit.hpp"
#include "cpc/config.hpp"
#include "cpc/dynamics.hpp"
#include "cpc/spectral.hpp"
#include "cpc/trace_analysis.hpp"
#include "cpc/trace_synth.hpp"

namespace cpc {

struct SteadyReport {
  double t_cooled_k = 0.0;
  double t_ambient_k = 0.0;
  double n_cooled = 0.0;
  double n_ambient = 0.0;
  double tau_cooled_s = 0.0;
  double tau_ambient_s = 0.0;
  double delta_p_db = 0.0;
  struct Contribution {
    std::string name;
    double kappa;
    double effective_temperature_k;
    /// kappa * T' / (1 + sum kappa) in the cooled configuration.
    double share_k;
  };
  std::vector<Contribution> contributions;
  std::vector<std::string> warnings;
};

SteadyReport steady_state_report(const RunConfig& cfg);

struct SimulationSetup {
  SwitchSchedule schedule;
  PhotonTrajectory trajectory;
  double disconnect_time_s = 0.0;
  double t_cooled_k = 0.0;
  double t_ambient_k = 0.0;
  SynthConfig synth;
};

/// Schedule from the protocol section (every cooling port detaches at the
/// disconnect), trajectory starting from the ambient steady state, and the
/// synthesizer settings for the recorded window.
SimulationSetup prepare_simulation(const RunConfig& cfg);

struct AnalysisReport {
  std::size_t shots = 0;
  bool artifact_subtracted = false;
  double disconnect_time_s = 0.0;
  double reference_power_v2 = 0.0;
  std::vector<DeltaPPoint> series;
  BiExpFit fit;
  std::optional<DepthEstimate> depth;
  /// Cooled section before the disconnect against the reference, time domain.
  std::optional<double> section_delta_p_db;
  std::optional<BandDeltaP> band;
  std::optional<PowerSpectrum> psd_cold;
  std::optional<PowerSpectrum> psd_ambient;
  std::optional<double> t_mode_inferred_k;
  std::vector<std::string> notes;
};

/// Analysis on streamed ensemble sums. No spectra (they need the traces).
AnalysisReport analyze_statistics(const EnsembleStatistics& stats,
                                  const AnalysisConfig& cfg, double disconnect_time_s);

/// Full analysis of an in-memory ensemble, spectra included when enabled.
AnalysisReport analyze_traces(const std::vector<NoiseTrace>& traces,
                              const AnalysisConfig& cfg, double disconnect_time_s);

/// Fills t_mode_inferred_k from the fitted depth, or adds a note.
void attach_inference(AnalysisReport& report, const ReceiverChain& chain,
                      double t_mode_ambient_k);

/// Simulate-and-analyze without writing traces: shots are generated,
/// extracted and accumulated one at a time.
class StreamingExperiment {
 public:
  explicit StreamingExperiment(const RunConfig& cfg);

  const SimulationSetup& setup() const { return setup_; }
  AnalysisReport run(std::uint64_t master_seed, std::size_t shots) const;

 private:
  RunConfig cfg_;
  SimulationSetup setup_;
  TraceSynthesizer synth_;
};

}  // namespace cpc
