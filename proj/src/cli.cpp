#include "qtunnel/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "qtunnel/analysis.hpp"
#include "qtunnel/csv.hpp"
#include "qtunnel/eigensolver.hpp"
#include "qtunnel/error.hpp"
#include "qtunnel/evolve.hpp"
#include "qtunnel/model.hpp"
#include "qtunnel/oracle.hpp"

namespace qtunnel::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<double> xi;
  std::optional<std::string> initial;
  std::optional<double> X;
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::BandEdge:
    case ErrorCode::PhaseUnresolved:
    case ErrorCode::DensityUnderflow:
    case ErrorCode::GridTooCoarse:
    case ErrorCode::NoPeak:
      return kExitNumerical;
    default:
      return kExitConfig;
  }
}

SimulationConfig resolve_config(const Options& opt) {
  SimulationConfig c = opt.config_path.empty() ? SimulationConfig{} : load_config(opt.config_path);
  if (opt.xi) c.so.xi = *opt.xi;
  if (opt.initial) c.initial = parse_initial_state(*opt.initial);
  if (opt.X) c.X_obs = *opt.X;
  return validate(c);
}

std::vector<double> axis(const AxisSpec& a) {
  std::vector<double> v(a.count());
  for (int i = 0; i < a.count(); ++i) v[i] = a.at(i);
  return v;
}

class Run {
 public:
  Run(std::string subcommand, const Options& opt, const SimulationConfig& config)
      : dir_(opt.out_dir), start_(std::chrono::steady_clock::now()) {
    manifest_.subcommand = std::move(subcommand);
    manifest_.config_path = opt.config_path;
    manifest_.output_dir = opt.out_dir;
    manifest_.config_hash = config_hash(to_text(config));
    fs::create_directories(dir_);
    write_manifest(dir_, manifest_);
  }

  template <class Writer>
  void emit(const std::string& name, Writer&& write) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw Error(ErrorCode::ConfigIo, "cannot write " + (dir_ / name).string());
    write(out);
    manifest_.outputs.push_back(name);
  }

  void finish() {
    manifest_.duration_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    manifest_.complete = true;
    write_manifest(dir_, manifest_);
  }

 private:
  fs::path dir_;
  std::chrono::steady_clock::time_point start_;
  RunManifest manifest_;
};

void bound_states_cmd(const Options& opt) {
  const SimulationConfig config = resolve_config(opt);
  Run run("bound-states", opt, config);
  const auto states = solve_bound_states(config.pre());
  std::vector<std::optional<double>> lifetimes(states.size());
  for (std::size_t j = 0; j < states.size() && j < 2; ++j) {
    SimulationConfig c = config;
    c.initial = j == 0 ? InitialState::Ground : InitialState::Excited;
    lifetimes[j] = lifetime(Simulation(c));
  }
  const auto write = [&](std::ostream& out) {
    out << "index,k,E,kappa,well_probability,lifetime\n";
    for (std::size_t j = 0; j < states.size(); ++j) {
      const BoundState& s = states[j];
      out << s.index << ',' << format_double(s.k) << ',' << format_double(s.energy) << ','
          << format_double(s.kappa) << ',' << format_double(s.well_probability()) << ','
          << format_optional(lifetimes[j]) << '\n';
    }
  };
  run.emit("bound_states.csv", write);
  write(std::cout);
  run.finish();
}

void short_time_cmd(const Options& opt) {
  const SimulationConfig config = resolve_config(opt);
  Run run("short-time", opt, config);
  const Simulation sim(config);
  const double a2 = config.a1 + config.d;
  const auto ts = axis(config.t_grid);
  const auto xs = axis(config.x_grid);
  const WellQuadrature well = well_quadrature(config.a1);

  // One evaluation per time covers the snapshot row, the a2 probe and the well grid.
  std::vector<double> points = xs;
  points.push_back(a2);
  points.insert(points.end(), well.x.begin(), well.x.end());
  std::vector<ObservableRecord> snapshot, edge;
  std::vector<WellPolarization> polar;
  const auto rows = field_snapshot(sim, points, ts);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto first = rows.begin() + static_cast<std::ptrdiff_t>(i * points.size());
    snapshot.insert(snapshot.end(), first, first + static_cast<std::ptrdiff_t>(xs.size()));
    edge.push_back(first[static_cast<std::ptrdiff_t>(xs.size())]);
    polar.push_back(well_polarization(
        std::span(&*(first + static_cast<std::ptrdiff_t>(xs.size() + 1)), well.x.size()), well));
  }

  run.emit("sy_a2.csv", [&](std::ostream& out) { write_observables_csv(out, edge); });
  run.emit("well.csv", [&](std::ostream& out) {
    out << "t,survival,spin_y,py,flags\n";
    for (std::size_t i = 0; i < ts.size(); ++i) {
      out << format_double(ts[i]) << ',' << format_double(polar[i].survival) << ','
          << format_double(polar[i].spin_y) << ',' << format_optional(polar[i].py) << ','
          << flag_tokens(polar[i].flags) << '\n';
    }
  });
  run.emit("snapshot.csv", [&](std::ostream& out) { write_observables_csv(out, snapshot); });
  run.finish();
}

void far_field_cmd(const Options& opt) {
  const SimulationConfig config = resolve_config(opt);
  Run run("far-field", opt, config);
  const Simulation sim(config);
  PeakOptions peak_options;
  peak_options.dt = config.t_grid.step;
  const auto ts = peak_time_grid(sim, config.X_obs, peak_options);
  const double xs[] = {config.X_obs};
  const auto records = field_snapshot(sim, xs, ts);
  FarFieldSeries series;
  for (const auto& r : records) {
    series.t.push_back(r.t);
    series.rho.push_back(r.rho);
    series.sy.push_back(r.sy);
  }
  const PeakReport report = peak_report(sim, config.X_obs, series, peak_options);
  run.emit("far_field.csv", [&](std::ostream& out) { write_observables_csv(out, records); });
  run.emit("peaks.csv", [&](std::ostream& out) { write_peaks_csv(out, std::span(&report, 1)); });
  run.finish();
}

void tunneling_length_cmd(const Options& opt) {
  const SimulationConfig config = resolve_config(opt);
  Run run("tunneling-length", opt, config);
  SimulationConfig limit = config;
  limit.so = SOCoupling::uncoupled();
  limit.validated = false;
  const Simulation limit_sim(limit);
  const Simulation coupled_sim(config);
  const std::vector<TunnelingLengthResult> results = {tunneling_length(limit_sim, {}),
                                                      tunneling_length(coupled_sim, {})};
  const DelayComparison delays = compare_delays(limit_sim, results.front());

  run.emit("tunneling_length.csv", [&](std::ostream& out) {
    out << "method,delta_x,spread,relative_spread,flags\n";
    for (const auto& r : results) {
      out << to_string(r.method) << ',' << format_double(r.delta_x) << ',' << format_double(r.spread) << ','
          << format_double(r.relative_spread()) << ',' << flag_tokens(r.flags) << '\n';
    }
  });
  run.emit("probes.csv", [&](std::ostream& out) {
    out << "method,x,t,delta_x\n";
    for (const auto& r : results) {
      for (std::size_t i = 0; i < r.probes.size(); ++i) {
        out << to_string(r.method) << ',' << format_double(r.probes[i].x) << ',' << format_double(r.probes[i].t)
            << ',' << format_double(r.samples[i]) << '\n';
      }
    }
  });
  run.emit("delays.csv", [&](std::ostream& out) {
    out << "energy,delta_t,group_delay\n"
        << format_double(delays.energy) << ',' << format_double(delays.delta_t) << ','
        << format_double(delays.group_delay) << '\n';
  });
  run.finish();
}

void scan_cmd(const Options& opt) {
  const SimulationConfig config = resolve_config(opt);
  Run run("scan", opt, config);
  const double widths[] = {0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  const double heights[] = {4.0, 8.0, 12.0, 16.0, 24.0, 32.0};
  auto rows = transparency_scan(config, width_family(config.a1, config.U0, widths));
  const auto by_height = transparency_scan(config, height_family(config.a1, config.d, heights));
  rows.insert(rows.end(), by_height.begin(), by_height.end());
  run.emit("scan.csv", [&](std::ostream& out) { write_scan_csv(out, rows); });
  run.finish();
}

void oracle_check_cmd(const Options& opt) {
  const SimulationConfig config = resolve_config(opt);
  Run run("oracle-check", opt, config);
  const Simulation sim(config);
  const double X = config.X_obs;
  const double arrival = X / sim.profile().dominant_wavenumber();

  // Coarse spectral scan for the peak, then a window of +-2 around it.
  double t_peak = arrival, best = -1.0;
  for (double t = 0.8 * arrival; t <= 1.6 * arrival; t += 0.2) {
    const double rho = sim.observe(X, t).rho;
    if (rho > best) {
      best = rho;
      t_peak = t;
    }
  }
  const OracleOptions options;
  std::vector<double> ts;
  for (int i = -5; i <= 5; ++i) ts.push_back(options.dt * std::round((t_peak + 0.4 * i) / options.dt));
  const OracleComparison cmp = compare_with_oracle(sim, X, ts, options);

  run.emit("oracle.csv", [&](std::ostream& out) {
    out << "t,rho_spectral,rho_coarse,rho_fine,rho_extrapolated,sy_spectral,sy_grid\n";
    for (std::size_t i = 0; i < cmp.t.size(); ++i) {
      out << format_double(cmp.t[i]) << ',' << format_double(cmp.rho_spectral[i]) << ','
          << format_double(cmp.rho_coarse[i]) << ',' << format_double(cmp.rho_fine[i]) << ','
          << format_double(cmp.rho_extrapolated[i]) << ',' << format_double(cmp.sy_spectral[i]) << ','
          << format_double(cmp.sy_fine[i]) << '\n';
    }
  });
  const auto summary = [&](std::ostream& out) {
    out << "max_relative_error,coarse_error,fine_error,observed_order,sign_mismatches\n"
        << format_double(cmp.max_relative_error) << ',' << format_double(cmp.coarse_error) << ','
        << format_double(cmp.fine_error) << ',' << format_double(cmp.observed_order()) << ','
        << cmp.sign_mismatches << '\n';
  };
  run.emit("oracle_summary.csv", summary);
  summary(std::cout);
  run.finish();
}

}  // namespace

std::string config_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_manifest(const fs::path& dir, const RunManifest& m) {
  nlohmann::ordered_json j;
  j["subcommand"] = m.subcommand;
  j["config_path"] = m.config_path;
  j["output_dir"] = m.output_dir;
  j["tool_version"] = m.tool_version;
  j["config_hash"] = m.config_hash;
  j["duration_s"] = m.duration_s;
  j["status"] = m.complete ? "complete" : "incomplete";
  j["outputs"] = m.outputs;
  const fs::path tmp = dir / "manifest.json.tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error(ErrorCode::ConfigIo, "cannot write manifest in " + dir.string());
    out << j.dump(2) << '\n';
  }
  fs::rename(tmp, dir / "manifest.json");
}

int run(int argc, char** argv) {
  CLI::App app{"Spin-orbit tunneling decay simulator"};
  app.require_subcommand(1);
  Options opt;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "Config file (key = value)");
    sub->add_option("--out", opt.out_dir, "Output directory")->capture_default_str();
    sub->add_option("--xi", opt.xi, "Precession half-length xi (inf disables coupling)");
    sub->add_option("--initial", opt.initial, "Initial state")->check(CLI::IsMember({"ground", "excited", "mix"}));
    sub->add_option("--X", opt.X, "Observation point");
  };
  struct Command {
    const char* name;
    const char* help;
    void (*body)(const Options&);
  };
  const Command commands[] = {
      {"bound-states", "Bound levels and lifetimes", bound_states_cmd},
      {"short-time", "Spin density at a2, well polarization and well snapshot", short_time_cmd},
      {"far-field", "Density and spin density at X with peak report", far_field_cmd},
      {"tunneling-length", "Tunneling length and delay comparison", tunneling_length_cmd},
      {"scan", "Tunneling length against barrier transparency", scan_cmd},
      {"oracle-check", "Spectral result against the grid solver", oracle_check_cmd},
  };
  void (*selected)(const Options&) = nullptr;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_common(sub);
    sub->callback([&selected, body = c.body] { selected = body; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    selected(opt);
  } catch (const ValidationError& e) {
    for (const auto& issue : e.issues()) std::cerr << to_string(issue.code) << ": " << issue.message << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "CONFIG_IO: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}

}  // namespace qtunnel::cli
