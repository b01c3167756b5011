#include "cpc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cpc/receiver.hpp"
#include "cpc/rng.hpp"

namespace cpc {

namespace {

double mean_of(const std::vector<double>& p, std::size_t begin, std::size_t end) {
  double acc = 0.0;
  for (std::size_t i = begin; i < end; ++i) acc += p[i];
  return acc / static_cast<double>(end - begin);
}

struct Sections {
  std::size_t disconnect = 0;
  std::size_t fit_end = 0;
  std::size_t ref_begin = 0;
  std::size_t ref_end = 0;
  std::optional<std::size_t> cold_begin;
};

Sections locate_sections(const EnsembleStatistics& stats, const AnalysisConfig& cfg,
                         double t_dis) {
  Sections s;
  const double t_first = stats.start_time_s();
  const double t_last = stats.time_at(stats.samples() - 1);
  if (t_dis < t_first - 0.5 * stats.dt_s() || t_dis > t_last)
    throw std::domain_error("disconnect time lies outside the record");
  s.disconnect = stats.index_of(t_dis);
  s.fit_end = stats.index_of(t_dis + cfg.fit_end_s);
  s.ref_begin = stats.index_of(t_dis + cfg.reference_start_s);
  s.ref_end = stats.index_of(t_dis + cfg.reference_end_s);
  if (s.ref_end <= s.ref_begin)
    throw std::domain_error("reference section lies outside the record");
  if (t_dis - cfg.cold_section_s >= t_first - 0.5 * stats.dt_s()) {
    const std::size_t b = stats.index_of(t_dis - cfg.cold_section_s);
    if (b < s.disconnect) s.cold_begin = b;
  }
  return s;
}

}  // namespace

SteadyReport steady_state_report(const RunConfig& cfg) {
  cfg.validate();
  const BathSet cooled = cfg.baths();
  const BathSet ambient = cfg.ambient_baths();
  SteadyReport r;
  r.t_cooled_k = mode_temperature(cooled);
  r.t_ambient_k = mode_temperature(ambient);
  r.n_cooled = photon_occupancy(cfg.mode.frequency_hz, r.t_cooled_k);
  r.n_ambient = photon_occupancy(cfg.mode.frequency_hz, r.t_ambient_k);
  r.tau_cooled_s = relaxation_time(cfg.mode, cooled);
  r.tau_ambient_s = relaxation_time(cfg.mode, ambient);
  r.delta_p_db = noise_power_reduction_db(r.t_cooled_k, r.t_ambient_k, cfg.receiver);

  double weight = 1.0;
  for (const auto& p : cfg.ports) weight += p.port.coupling_kappa;
  r.contributions.push_back({"intrinsic", 1.0, cfg.intrinsic_temperature_k,
                             cfg.intrinsic_temperature_k / weight});
  for (const auto& p : cfg.ports) {
    const double t_eff = link_output_temperature(p.port);
    r.contributions.push_back(
        {p.name, p.port.coupling_kappa, t_eff, p.port.coupling_kappa * t_eff / weight});
    if (auto w = link_model_warning(p.port)) r.warnings.push_back("port." + p.name + ": " + *w);
  }
  return r;
}

SimulationSetup prepare_simulation(const RunConfig& cfg) {
  cfg.validate();
  const auto& pr = cfg.protocol;
  const std::size_t n = cfg.ports.size();
  const std::size_t ci = cfg.cooling_port_index();
  const double record_end = pr.record_start_s + pr.record_length_s;
  const double trace_length =
      std::max(record_end - pr.cool_duration_s, std::max(pr.record_length_s, pr.interrogate_delay_s));

  SimulationSetup s;
  if (ci < n) {
    s.schedule = build_protocol(pr.cool_duration_s, pr.interrogate_delay_s, trace_length,
                                ProtocolPorts{n, ci});
    for (auto& ev : s.schedule.events) {
      if (!ev.has(ProtocolLabel::Disconnect) && !ev.has(ProtocolLabel::Interrogate)) continue;
      for (std::size_t i = 0; i < n; ++i)
        if (cfg.ports[i].role == PortRole::Cooling) ev.active_ports[i] = false;
    }
  } else {
    const std::vector<bool> all(n, true);
    s.schedule.events = merge_coincident(
        {{0.0, all, {ProtocolLabel::Cool}},
         {pr.cool_duration_s, all, {ProtocolLabel::Disconnect, ProtocolLabel::LaserFire}},
         {pr.cool_duration_s + pr.interrogate_delay_s, all, {ProtocolLabel::Interrogate}}});
    s.schedule.end_time_s = pr.cool_duration_s + trace_length;
  }
  s.disconnect_time_s = pr.cool_duration_s;

  const BathSet baths = cfg.baths();
  const BathSet ambient = cfg.ambient_baths();
  s.t_cooled_k = mode_temperature(baths);
  s.t_ambient_k = mode_temperature(ambient);
  const double q0 = steady_state_occupancy(cfg.mode, ambient);
  s.trajectory = evolve_occupancy(cfg.mode, baths, s.schedule,
                                  TimeGrid{record_end, pr.trajectory_dt_s}, q0);

  s.synth.sample_interval_s = cfg.synth.sample_interval_s;
  s.synth.duration_s = pr.record_length_s;
  s.synth.start_time_s = pr.record_start_s;
  s.synth.rng_seed = cfg.synth.seed;
  s.synth.one_over_f_corner_hz = cfg.synth.one_over_f_corner_hz;
  s.synth.artifact_duration_s = cfg.synth.artifact_duration_s;
  s.synth.artifact_amplitude_v = cfg.synth.artifact_amplitude_v;
  s.synth.voltage_scale = cfg.synth.voltage_scale;
  return s;
}

AnalysisReport analyze_statistics(const EnsembleStatistics& stats, const AnalysisConfig& cfg,
                                  double disconnect_time_s) {
  cfg.validate();
  const Sections sec = locate_sections(stats, cfg, disconnect_time_s);
  const auto power = stats.pooled_power();
  const double dt = stats.dt_s();
  const std::size_t window =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.window_s / dt)));

  AnalysisReport r;
  r.shots = stats.shots();
  r.artifact_subtracted = stats.shots() >= 2;
  if (!r.artifact_subtracted) r.notes.push_back("single shot: artifact subtraction skipped");
  r.disconnect_time_s = disconnect_time_s;
  r.reference_power_v2 = mean_of(power, sec.ref_begin, sec.ref_end);
  if (!(r.reference_power_v2 > 0.0)) throw std::domain_error("reference section holds no power");

  if (sec.fit_end <= sec.disconnect) throw std::domain_error("fit span lies outside the record");
  const std::span<const double> cold(power.data() + sec.disconnect, sec.fit_end - sec.disconnect);
  r.series = windowed_deltap_from_power(cold, r.reference_power_v2, window, dt,
                                        stats.time_at(sec.disconnect) - disconnect_time_s);

  FitOptions opt;
  opt.exclude_before_s = cfg.exclude_before_s;
  r.fit = fit_biexponential(r.series, opt);
  if (r.fit.converged)
    r.depth = cooling_depth_from_fit(r.fit);
  else
    r.notes.push_back("warm-up fit did not converge");

  if (sec.cold_begin) {
    const double pc = mean_of(power, *sec.cold_begin, sec.disconnect);
    if (pc > 0.0) r.section_delta_p_db = 10.0 * std::log10(pc / r.reference_power_v2);
  } else {
    r.notes.push_back("record starts too late for a cooled section before the disconnect");
  }
  return r;
}

AnalysisReport analyze_traces(const std::vector<NoiseTrace>& traces, const AnalysisConfig& cfg,
                              double disconnect_time_s) {
  if (traces.empty()) throw std::domain_error("no traces to analyze");
  const auto& first = traces.front();
  for (const auto& t : traces) {
    if (t.size() != first.size() ||
        std::abs(t.dt_s - first.dt_s) > 1e-9 * first.dt_s ||
        std::abs(t.start_time_s - first.start_time_s) > 1e-3 * first.dt_s)
      throw std::domain_error("traces are not on the same time grid");
  }
  const std::size_t box = boxcar_samples(cfg.extraction, first.dt_s);
  EnsembleStatistics stats(first.start_time_s, first.dt_s, first.size());
  std::vector<std::vector<double>> extracted;
  for (const auto& t : traces) {
    std::vector<double> r(t.size());
    extract_noise_inplace(t.voltages, r, box);
    stats.add(r);
    if (cfg.compute_psd) extracted.push_back(std::move(r));
  }
  AnalysisReport report = analyze_statistics(stats, cfg, disconnect_time_s);
  if (!cfg.compute_psd) return report;

  const Sections sec = locate_sections(stats, cfg, disconnect_time_s);
  if (!sec.cold_begin) {
    report.notes.push_back("no cooled section for spectra");
    return report;
  }
  const std::size_t seg = cfg.psd_segment_length;
  if (sec.disconnect - *sec.cold_begin < seg || sec.ref_end - sec.ref_begin < seg) {
    report.notes.push_back("sections shorter than one PSD segment");
    return report;
  }
  std::vector<double> mean(first.size(), 0.0);
  if (traces.size() >= 2) mean = stats.mean();
  std::vector<PowerSpectrum> cold, amb;
  std::vector<double> buf;
  auto section_psd = [&](const std::vector<double>& r, std::size_t b, std::size_t e) {
    buf.resize(e - b);
    for (std::size_t i = b; i < e; ++i) buf[i - b] = r[i] - mean[i];
    return spectral_density(buf, first.dt_s, seg);
  };
  for (const auto& r : extracted) {
    cold.push_back(section_psd(r, *sec.cold_begin, sec.disconnect));
    amb.push_back(section_psd(r, sec.ref_begin, sec.ref_end));
  }
  report.psd_cold = average_spectra(cold);
  report.psd_ambient = average_spectra(amb);
  report.band = band_averaged_deltap(*report.psd_cold, *report.psd_ambient, cfg.band_lo_hz,
                                     cfg.band_hi_hz);
  return report;
}

void attach_inference(AnalysisReport& report, const ReceiverChain& chain,
                      double t_mode_ambient_k) {
  if (!report.depth) return;
  try {
    report.t_mode_inferred_k =
        infer_mode_temperature(report.depth->delta_p_db, t_mode_ambient_k, chain);
  } catch (const std::out_of_range& e) {
    report.notes.push_back(std::string("mode temperature not inferred: ") + e.what());
  }
}

StreamingExperiment::StreamingExperiment(const RunConfig& cfg)
    : cfg_(cfg),
      setup_(prepare_simulation(cfg)),
      synth_(setup_.trajectory, cfg.receiver, setup_.synth,
             setup_.schedule.times_of(ProtocolLabel::Disconnect)) {}

AnalysisReport StreamingExperiment::run(std::uint64_t master_seed, std::size_t shots) const {
  if (shots == 0) throw std::domain_error("need at least one shot");
  const std::size_t n = synth_.sample_count();
  const double dt = setup_.synth.sample_interval_s;
  const std::size_t box = boxcar_samples(cfg_.analysis.extraction, dt);
  EnsembleStatistics stats(setup_.synth.start_time_s, dt, n);
  std::vector<double> x(n), r(n);
  for (std::size_t i = 0; i < shots; ++i) {
    synth_.generate(derive_shot_seed(master_seed, i), x);
    extract_noise_inplace(x, r, box);
    stats.add(r);
  }
  AnalysisReport report = analyze_statistics(stats, cfg_.analysis, setup_.disconnect_time_s);
  attach_inference(report, cfg_.receiver, setup_.t_ambient_k);
  return report;
}

}  // namespace cpc
