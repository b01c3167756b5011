#include "cpc/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "cpc/config.hpp"
#include "cpc/digest.hpp"
#include "cpc/errors.hpp"
#include "cpc/pipeline.hpp"
#include "cpc/rng.hpp"
#include "cpc/text.hpp"
#include "cpc/trace_io.hpp"

namespace cpc {

namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  bool porcelain = false;
  std::string out_dir;
};

struct SweepFlags {
  std::optional<double> kappa_min, kappa_max, t_cold_min, t_cold_max;
  std::optional<std::size_t> kappa_points, t_cold_points;
  bool kappa_linear = false;
  bool one_port = false;
};

struct AnalyzeFlags {
  std::vector<std::string> inputs;
  std::optional<double> disconnect_time_s;
  bool emit_psd = false;
  bool emit_deltap_curve = false;
  bool emit_series = false;
};

RunConfig load_config(const GlobalOptions& g) {
  RunConfig cfg = g.config_path.empty() ? default_run_config() : load_run_config(g.config_path);
  if (g.seed) cfg.synth.seed = *g.seed;
  cfg.validate();
  return cfg;
}

std::string out_path(const GlobalOptions& g, const std::string& file) {
  const fs::path dir = g.out_dir.empty() ? fs::path(".") : fs::path(g.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  return (dir / file).string();
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

void print_kv(std::ostream& out, const KeyValues& kv) { out << key_values_to_text(kv); }

void print_table(std::ostream& out, const KeyValues& kv) {
  std::size_t width = 0;
  for (const auto& [k, v] : kv) width = std::max(width, k.size());
  for (const auto& [k, v] : kv) out << std::left << std::setw(static_cast<int>(width) + 2) << k << v << '\n';
}

int cmd_steady(const GlobalOptions& g, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = load_config(g);
  const SteadyReport r = steady_state_report(cfg);
  for (const auto& w : r.warnings) err << "warning: " << w << '\n';
  if (g.porcelain) {
    KeyValues kv{{"t_cooled_k", format_number(r.t_cooled_k)},
                 {"t_ambient_k", format_number(r.t_ambient_k)},
                 {"n_cooled", format_number(r.n_cooled)},
                 {"n_ambient", format_number(r.n_ambient)},
                 {"tau_cooled_s", format_number(r.tau_cooled_s)},
                 {"tau_ambient_s", format_number(r.tau_ambient_s)},
                 {"delta_p_db", format_number(r.delta_p_db)}};
    for (const auto& c : r.contributions) {
      kv.emplace_back("bath." + c.name + ".kappa", format_number(c.kappa));
      kv.emplace_back("bath." + c.name + ".t_eff_k", format_number(c.effective_temperature_k));
      kv.emplace_back("bath." + c.name + ".share_k", format_number(c.share_k));
    }
    print_kv(out, kv);
    return kExitOk;
  }
  print_table(out, {{"T_mode cooled", fixed(r.t_cooled_k, 3) + " K"},
                    {"T_mode ambient", fixed(r.t_ambient_k, 3) + " K"},
                    {"photons cooled", fixed(r.n_cooled, 1)},
                    {"photons ambient", fixed(r.n_ambient, 1)},
                    {"tau cooled", fixed(r.tau_cooled_s * 1e6, 4) + " us"},
                    {"tau ambient", fixed(r.tau_ambient_s * 1e6, 4) + " us"},
                    {"delta P", fixed(r.delta_p_db, 4) + " dB"}});
  out << "\nbath contributions (cooled configuration):\n";
  for (const auto& c : r.contributions)
    out << "  " << std::left << std::setw(12) << c.name << "kappa " << std::setw(8)
        << format_number(c.kappa) << "T' " << std::setw(10) << fixed(c.effective_temperature_k, 3)
        << "share " << fixed(c.share_k, 3) << " K\n";
  return kExitOk;
}

int cmd_sweep(const GlobalOptions& g, const SweepFlags& f, std::ostream& out) {
  RunConfig cfg = load_config(g);
  auto& s = cfg.sweep;
  if (f.kappa_min) s.kappa_min = *f.kappa_min;
  if (f.kappa_max) s.kappa_max = *f.kappa_max;
  if (f.kappa_points) s.kappa_points = *f.kappa_points;
  if (f.t_cold_min) s.t_cold_min_k = *f.t_cold_min;
  if (f.t_cold_max) s.t_cold_max_k = *f.t_cold_max;
  if (f.t_cold_points) s.t_cold_points = *f.t_cold_points;
  if (f.kappa_linear) s.kappa_log = false;
  if (f.one_port) s.fixed_ports = false;
  cfg.validate();

  SweepGrid grid;
  grid.kappas = SweepGrid::axis(s.kappa_min, s.kappa_max, s.kappa_points, s.kappa_log);
  grid.t_colds_k = SweepGrid::axis(s.t_cold_min_k, s.t_cold_max_k, s.t_cold_points, false);
  std::vector<BathPort> fixed_ports;
  if (s.fixed_ports)
    for (const auto& p : cfg.ports)
      if (p.role != PortRole::Cooling) fixed_ports.push_back(p.port);
  const auto cells =
      sweep_mode_temperature(grid, cfg.intrinsic_temperature_k, cfg.mode.frequency_hz, fixed_ports);

  std::vector<std::vector<double>> cols(4);
  for (const auto& c : cells) {
    cols[0].push_back(c.kappa);
    cols[1].push_back(c.t_cold_k);
    cols[2].push_back(c.t_mode_k);
    cols[3].push_back(c.occupancy);
  }
  const std::vector<std::string> header{"kappa", "t_cold_k", "t_mode_k", "occupancy"};
  if (!g.out_dir.empty()) {
    const auto path = out_path(g, "sweep.csv");
    write_table_csv(path, header, cols);
    out << "wrote " << path << " (" << cells.size() << " cells)\n";
    return kExitOk;
  }
  out << "kappa,t_cold_k,t_mode_k,occupancy\n";
  for (const auto& c : cells)
    out << format_number(c.kappa) << ',' << format_number(c.t_cold_k) << ','
        << format_number(c.t_mode_k) << ',' << format_number(c.occupancy) << '\n';
  return kExitOk;
}

std::string shot_file_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "trace_%04zu.csv", i);
  return buf;
}

int cmd_simulate(const GlobalOptions& g, std::ostream& out) {
  const RunConfig cfg = load_config(g);
  const SimulationSetup setup = prepare_simulation(cfg);
  const auto artifact_times = setup.schedule.times_of(ProtocolLabel::Disconnect);
  const TraceSynthesizer synth(setup.trajectory, cfg.receiver, setup.synth, artifact_times);

  const auto traj_path = out_path(g, "trajectory.csv");
  write_trajectory_csv(traj_path, setup.trajectory);
  std::vector<std::string> files;
  for (std::size_t i = 0; i < cfg.synth.shots; ++i) {
    const NoiseTrace tr = synth.generate(derive_shot_seed(cfg.synth.seed, i));
    const std::string name = shot_file_name(i);
    write_trace_csv(out_path(g, name), tr);
    files.push_back(name);
  }
  std::string file_list;
  for (const auto& f : files) file_list += (file_list.empty() ? "" : ",") + f;

  const KeyValues meta{{"seed", std::to_string(cfg.synth.seed)},
                       {"shots", std::to_string(cfg.synth.shots)},
                       {"config_digest", sha256_hex(serialize_run_config(cfg))},
                       {"synth_digest", setup.synth.digest()},
                       {"sample_interval_s", format_number(setup.synth.sample_interval_s)},
                       {"record_start_s", format_number(setup.synth.start_time_s)},
                       {"record_length_s", format_number(setup.synth.duration_s)},
                       {"disconnect_time_s", format_number(setup.disconnect_time_s)},
                       {"t_cooled_k", format_number(setup.t_cooled_k)},
                       {"t_ambient_k", format_number(setup.t_ambient_k)},
                       {"trajectory", "trajectory.csv"},
                       {"files", file_list}};
  const auto meta_path = out_path(g, "simulate.meta");
  write_key_values(meta_path, meta);
  if (g.porcelain) {
    print_kv(out, meta);
  } else {
    out << "wrote " << files.size() << " traces, trajectory.csv and simulate.meta to "
        << fs::path(meta_path).parent_path().string() << '\n';
  }
  return kExitOk;
}

std::string meta_value(const KeyValues& kv, const std::string& key) {
  for (const auto& [k, v] : kv)
    if (k == key) return v;
  return {};
}

int cmd_analyze(const GlobalOptions& g, const AnalyzeFlags& f, std::ostream& out,
                std::ostream& err) {
  const RunConfig cfg = load_config(g);
  std::vector<std::string> paths;
  std::optional<double> meta_disconnect;
  for (const auto& in : f.inputs) {
    if (fs::is_directory(in)) {
      const auto meta_file = (fs::path(in) / "simulate.meta").string();
      if (!fs::exists(meta_file)) throw IoError("no simulate.meta in " + in);
      const KeyValues meta = read_key_values(meta_file);
      std::stringstream list(meta_value(meta, "files"));
      std::string name;
      while (std::getline(list, name, ','))
        if (!name.empty()) paths.push_back((fs::path(in) / name).string());
      if (auto d = parse_number(meta_value(meta, "disconnect_time_s"))) meta_disconnect = *d;
    } else {
      paths.push_back(in);
    }
  }
  if (paths.empty()) throw IoError("no trace files given");
  std::vector<NoiseTrace> traces;
  for (const auto& p : paths) traces.push_back(read_trace_csv(p));

  const double t_dis = f.disconnect_time_s ? *f.disconnect_time_s
                       : meta_disconnect   ? *meta_disconnect
                                           : cfg.protocol.cool_duration_s;
  AnalysisConfig acfg = cfg.analysis;
  if (f.emit_psd) acfg.compute_psd = true;
  const double t_amb = mode_temperature(cfg.ambient_baths());
  AnalysisReport r = analyze_traces(traces, acfg, t_dis);
  attach_inference(r, cfg.receiver, t_amb);
  for (const auto& n : r.notes) err << "note: " << n << '\n';

  auto opt_num = [](const std::optional<double>& v) {
    return v ? format_number(*v) : std::string("nan");
  };
  KeyValues kv{{"shots", std::to_string(r.shots)},
               {"artifact_subtracted", r.artifact_subtracted ? "true" : "false"},
               {"disconnect_time_s", format_number(r.disconnect_time_s)},
               {"fit_converged", r.fit.converged ? "true" : "false"},
               {"fit_single_exponential", r.fit.single_exponential ? "true" : "false"},
               {"fit_points", std::to_string(r.fit.points)},
               {"fit_iterations", std::to_string(r.fit.iterations)},
               {"delta_p_depth_db", r.depth ? format_number(r.depth->delta_p_db) : "nan"},
               {"delta_p_depth_se_db",
                r.depth ? format_number(r.depth->standard_error_db) : "nan"},
               {"tau_warm_s", format_number(r.fit.tau2_s)},
               {"tau_warm_se_s", format_number(r.fit.se_tau2_s)},
               {"tau_fast_s", format_number(r.fit.tau1_s)},
               {"tau_fast_se_s", format_number(r.fit.se_tau1_s)},
               {"a_fast_db", format_number(r.fit.a1)},
               {"a_warm_db", format_number(r.fit.a2)},
               {"delta_p_section_db", opt_num(r.section_delta_p_db)},
               {"delta_p_band_db", r.band ? format_number(r.band->delta_p_db) : "nan"},
               {"delta_p_band_se_db", r.band ? format_number(r.band->standard_error_db) : "nan"},
               {"t_mode_ambient_k", format_number(t_amb)},
               {"t_mode_inferred_k", opt_num(r.t_mode_inferred_k)}};
  if (g.porcelain) {
    print_kv(out, kv);
  } else {
    KeyValues human{
        {"shots", std::to_string(r.shots)},
        {"delta P (fit depth)",
         r.depth ? fixed(r.depth->delta_p_db, 3) + " +/- " + fixed(r.depth->standard_error_db, 3) + " dB"
                 : "n/a"},
        {"delta P (cooled section)",
         r.section_delta_p_db ? fixed(*r.section_delta_p_db, 3) + " dB" : "n/a"},
        {"delta P (band average)",
         r.band ? fixed(r.band->delta_p_db, 3) + " +/- " + fixed(r.band->standard_error_db, 3) + " dB"
                : "n/a"},
        {"tau warm-up", fixed(r.fit.tau2_s * 1e6, 3) + " +/- " + fixed(r.fit.se_tau2_s * 1e6, 3) + " us"},
        {"fit", std::string(r.fit.converged ? "converged" : "NOT converged") +
                    (r.fit.single_exponential ? ", single exponential" : "")},
        {"T_mode inferred",
         r.t_mode_inferred_k ? fixed(*r.t_mode_inferred_k, 2) + " K" : "n/a"},
        {"T_mode ambient", fixed(t_amb, 2) + " K"}};
    print_table(out, human);
  }

  if (f.emit_series) {
    std::vector<std::vector<double>> cols(2);
    for (const auto& p : r.series) {
      cols[0].push_back(p.time_s);
      cols[1].push_back(p.delta_p_db ? *p.delta_p_db : std::nan(""));
    }
    write_table_csv(out_path(g, "deltap_series.csv"), {"time_s", "delta_p_db"}, cols);
  }
  if (f.emit_psd) {
    if (!r.psd_cold || !r.psd_ambient) throw std::domain_error("spectra unavailable for this record");
    write_table_csv(out_path(g, "psd.csv"), {"frequency_hz", "cold_v2_per_hz", "ambient_v2_per_hz"},
                    {r.psd_cold->frequency_hz, r.psd_cold->density, r.psd_ambient->density});
  }
  if (f.emit_deltap_curve) {
    const auto curve = emit_deltap_curve(cfg.receiver, t_amb, 0.0, t_amb, 256);
    std::vector<std::vector<double>> cols(2);
    for (const auto& p : curve) {
      cols[0].push_back(p.t_mode_k);
      cols[1].push_back(p.delta_p_db);
    }
    write_table_csv(out_path(g, "deltap_curve.csv"), {"t_mode_k", "delta_p_db"}, cols);
  }
  if (!r.fit.converged) return kExitNotConverged;
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cavity pre-cooling noise toolkit", "cpc"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  app.add_option("--config", g.config_path, "Run configuration file");
  app.add_option("--seed", g.seed, "Master random seed (overrides synth.seed)");
  app.add_flag("--porcelain", g.porcelain, "Machine-readable key=value output");
  app.add_option("--out", g.out_dir, "Output directory");

  auto* steady = app.add_subcommand("steady", "Steady-state mode temperatures and photon numbers");
  auto* sweep = app.add_subcommand("sweep", "Mode temperature over a (kappa, T_cold) grid");
  SweepFlags sf;
  sweep->add_option("--kappa-min", sf.kappa_min);
  sweep->add_option("--kappa-max", sf.kappa_max);
  sweep->add_option("--kappa-points", sf.kappa_points);
  sweep->add_flag("--kappa-linear", sf.kappa_linear, "Linear rather than geometric kappa axis");
  sweep->add_option("--t-cold-min", sf.t_cold_min);
  sweep->add_option("--t-cold-max", sf.t_cold_max);
  sweep->add_option("--t-cold-points", sf.t_cold_points);
  sweep->add_flag("--one-port", sf.one_port, "Drop the non-cooling ports");
  auto* simulate = app.add_subcommand("simulate", "Run the protocol and synthesize shot traces");
  auto* analyze = app.add_subcommand("analyze", "Recover cooling depth and warm-up time from traces");
  AnalyzeFlags af;
  analyze->add_option("inputs", af.inputs, "Trace CSV files or simulate output directories")
      ->required();
  analyze->add_option("--disconnect-time", af.disconnect_time_s, "Disconnect instant in seconds");
  analyze->add_flag("--emit-psd", af.emit_psd, "Write psd.csv");
  analyze->add_flag("--emit-deltap-curve", af.emit_deltap_curve, "Write deltap_curve.csv");
  analyze->add_flag("--emit-series", af.emit_series, "Write deltap_series.csv");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back();
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (*steady) return cmd_steady(g, out, err);
    if (*sweep) return cmd_sweep(g, sf, out);
    if (*simulate) return cmd_simulate(g, out);
    if (*analyze) return cmd_analyze(g, af, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const DataFormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitDataFormat;
  } catch (const DegenerateFitError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNotConverged;
  } catch (const NotConvergedError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNotConverged;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace cpc
