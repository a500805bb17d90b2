#include "pilotwave/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pilotwave/diagnostics.hpp"
#include "pilotwave/ensemble.hpp"
#include "pilotwave/errors.hpp"
#include "pilotwave/experiments.hpp"
#include "pilotwave/integrator.hpp"
#include "pilotwave/plot.hpp"
#include "pilotwave/text.hpp"
#include "pilotwave/version.hpp"

namespace pilotwave::cli {

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

struct SpecOptions {
  std::string scenario;
  std::string spec_file;
  std::string phase_set;
  std::string modes;
  std::vector<double> epsilon;
  std::vector<double> phases;
  std::optional<std::uint64_t> phase_seed;

  void add_to(CLI::App& app) {
    app.add_option("--scenario", scenario, "Catalog scenario supplying the wave function");
    app.add_option("--spec-file", spec_file, "Spec or scenario document");
    app.add_option("--phase-set", phase_set, "Published phase set (fn3, fn4, fn5, fn7, fn8); default fn3");
    app.add_option("--modes", modes, "Modes as \"m:n m:n ...\" (m along q1), ground state first");
    app.add_option("--epsilon", epsilon, "One amplitude for every excited mode, or one per excited mode");
    app.add_option("--phases,--theta", phases, "Phases, ground state first");
    app.add_option("--phase-seed", phase_seed, "Draw uniform random phases from this seed");
  }

  bool inline_given() const {
    return !phase_set.empty() || !modes.empty() || !epsilon.empty() || !phases.empty() || phase_seed.has_value();
  }
};

struct ResolvedSpec {
  WaveFunctionSpec spec = WaveFunctionSpec::ground_state();
  std::string source;
  std::optional<Scenario> scenario;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<double> amplitudes_for(const std::vector<double>& epsilon, std::size_t excited) {
  if (epsilon.empty()) return std::vector<double>(excited, 1.0);
  if (epsilon.size() == 1) return std::vector<double>(excited, epsilon.front());
  if (epsilon.size() != excited) {
    throw UsageError("--epsilon needs one value or " + std::to_string(excited) + " values");
  }
  return epsilon;
}

ResolvedSpec resolve_spec(const SpecOptions& o) {
  const int sources = (o.scenario.empty() ? 0 : 1) + (o.spec_file.empty() ? 0 : 1) + (o.inline_given() ? 1 : 0);
  if (sources > 1) throw UsageError("give only one of --scenario, --spec-file or inline spec flags");
  ResolvedSpec r;
  if (!o.scenario.empty()) {
    r.scenario = find_scenario(o.scenario);
    r.spec = r.scenario->spec;
    r.source = "scenario:" + r.scenario->name;
    return r;
  }
  if (!o.spec_file.empty()) {
    const auto text = read_file(o.spec_file);
    if (KeyValueText::parse(text).contains("name")) {
      r.scenario = Scenario::from_text(text);
      r.spec = r.scenario->spec;
    } else {
      r.spec = WaveFunctionSpec::parse(text);
    }
    r.source = "file:" + o.spec_file;
    return r;
  }

  PhaseSet phases;
  if (!o.modes.empty()) {
    if (!o.phase_set.empty()) throw UsageError("--modes and --phase-set are exclusive");
    std::vector<Mode> modes;
    for (auto token : split_ws(o.modes)) modes.push_back(parse_mode(token));
    if (modes.empty() || modes.front() != Mode{0, 0}) throw UsageError("--modes must start with the ground state 0:0");
    if (o.phase_seed) {
      phases = random_phase_set(std::span<const Mode>(modes).subspan(1), *o.phase_seed);
    } else {
      if (o.phases.size() != modes.size()) throw UsageError("--modes needs --phases with one value per mode, or --phase-seed");
      phases.name = "explicit";
      for (const auto& m : modes) phases.labels.push_back(label_from_mode(m));
      phases.thetas = o.phases;
    }
  } else {
    phases = published_phase_set(o.phase_set.empty() ? "fn3" : o.phase_set);
    if (o.phase_seed && !o.phases.empty()) throw UsageError("--phases and --phase-seed are exclusive");
    if (o.phase_seed) {
      std::vector<Mode> excited;
      for (std::size_t k = 1; k < phases.labels.size(); ++k) excited.push_back(mode_from_label(phases.labels[k]));
      phases = random_phase_set(excited, *o.phase_seed);
    } else if (!o.phases.empty()) {
      if (o.phases.size() != phases.labels.size()) {
        throw UsageError("--phases needs " + std::to_string(phases.labels.size()) + " values");
      }
      phases.thetas = o.phases;
      phases.name = "explicit";
    }
  }
  const auto amps = amplitudes_for(o.epsilon, phases.labels.size() - 1);
  std::vector<std::pair<std::string, double>> labelled;
  for (std::size_t k = 1; k < phases.labels.size(); ++k) labelled.emplace_back(phases.labels[k], amps[k - 1]);
  r.spec = make_spec(phases, labelled);
  r.source = phases.name;
  return r;
}

std::filesystem::path output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutputDirVariable); env && *env) return env;
  return kFallbackOutputDir;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
}

Point parse_start(const std::string& text) {
  auto [x, y] = parse_point(text);
  return {x, y};
}

std::string pad(std::string text, std::size_t width) {
  // Always leave at least one separating space.
  text.append(text.size() < width ? width - text.size() : 1, ' ');
  return text;
}

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

// trajectory -----------------------------------------------------------------

struct TrajectoryOptions {
  SpecOptions spec;
  std::string start;
  int periods = 0;
  std::string out;
  std::string name = "trajectory";
  bool svg = false;
  int stride = 0;
  bool checkpoints = false;
  bool verify = false;
  double abstol = IntegratorConfig{}.abstol;
};

int cmd_trajectory(const TrajectoryOptions& o, std::ostream& out, std::ostream& err) {
  const auto resolved = resolve_spec(o.spec);
  const Point start = parse_start(o.start);
  const int periods = o.periods > 0 ? o.periods : (resolved.scenario ? resolved.scenario->horizon_periods : 100);
  IntegratorConfig config;
  config.abstol = o.abstol;
  config.validate();
  const double horizon = periods * kPeriod;

  const auto traj = integrate_trajectory(resolved.spec, start, horizon, config);
  const auto dir = output_dir(o.out);
  std::ostringstream csv;
  write_trajectory_csv(csv, traj, resolved.spec, config);
  write_text(dir / (o.name + ".csv"), csv.str());
  out << "wrote " << (dir / (o.name + ".csv")).string() << "\n";
  if (!traj.complete()) {
    const auto& f = *traj.failure;
    err << "integration failed: " << to_string(f.kind) << " at t = " << format_number(f.t) << " ("
        << format_point(f.position.q1, f.position.q2) << "): " << f.message << "\n";
    return kExitNumerical;
  }

  const auto checkpoint_periods = checkpoints_for(periods);
  const auto series = bounding_box_series(traj, periods_to_times(checkpoint_periods));
  const auto verdict = classify_confinement(series);
  const auto grid = occupancy_grid(traj);
  const double coverage = coverage_fraction(grid, resolved.spec);
  std::string drift = "n/a";
  try {
    drift = format_number(angular_drift_rate(traj));
  } catch (const InvalidArgument&) {
  }

  if (o.svg) {
    PlotSpec plot;
    plot.stride = o.stride > 0 ? o.stride : (periods >= 1000 ? 3 : 1);
    plot.description = "pilotwave " + std::string(kVersion) + "\n" + resolved.spec.serialize() +
                       "spec_digest = " + resolved.spec.fingerprint() + "\n" + config.to_text().render("config.");
    plot.annotations = {"start (" + format_point(start.q1, start.q2) + ")  " + std::to_string(periods) + "T  " +
                            resolved.source,
                        std::string("verdict ") + to_string(verdict.label) + "  spec " + resolved.spec.fingerprint()};
    const Trajectory* one = &traj;
    write_text(dir / (o.name + ".svg"), trajectory_svg(std::span<const Trajectory>(one, 1), plot));
    out << "wrote " << (dir / (o.name + ".svg")).string() << "\n";
  }

  if (o.checkpoints) {
    out << "period    width         height        width+height\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
      out << pad(format_number(checkpoint_periods[i]), 10) << pad(format_number(series.widths[i]), 14)
          << pad(format_number(series.heights[i]), 14) << format_number(series.extent(i)) << "\n";
    }
  }

  const std::size_t last = series.size() - 1;
  out << "start " << format_point(start.q1, start.q2) << " periods " << periods << " verdict "
      << to_string(verdict.label) << " width " << format_number(series.widths[last]) << " height "
      << format_number(series.heights[last]) << " growth " << format_number(verdict.growth_tail) << " coverage "
      << format_number(coverage) << " drift " << drift << "\n";

  if (o.verify) {
    const auto report = verify_convergence(resolved.spec, start, horizon, o.abstol, config);
    out << "convergence abstol " << format_number(report.abstol_coarse) << " vs " << format_number(report.abstol_fine)
        << " separation " << format_number(report.final_separation) << " limit "
        << format_number(kConvergenceDistance) << " " << (report.converged ? "converged" : "NOT converged") << "\n";
    if (!report.converged) return kExitNumerical;
  }
  return kExitOk;
}

// sweep ----------------------------------------------------------------------

struct SweepOptions {
  std::string scenario;
  std::string file;
  int periods = 0;
  unsigned workers = 1;
  bool expect = false;
  bool list = false;
  bool no_csv = false;
  bool no_svg = false;
  bool cohort_csv = false;
  std::string out;
  double abstol = IntegratorConfig{}.abstol;
};

int cmd_sweep(const SweepOptions& o, std::ostream& out) {
  if (o.list) {
    for (const auto& s : scenario_catalog()) {
      out << pad(s.name, 28) << pad(std::to_string(s.horizon_periods) + "T", 7) << s.description << "\n";
    }
    return kExitOk;
  }
  if (o.scenario.empty() == o.file.empty()) throw UsageError("give exactly one of --scenario or --file");
  Scenario scenario = o.scenario.empty() ? Scenario::from_text(read_file(o.file)) : find_scenario(o.scenario);
  if (o.periods > 0 && o.periods != scenario.horizon_periods) scenario = truncated(scenario, o.periods);

  RunOptions options;
  options.integrator.abstol = o.abstol;
  options.workers = o.workers;
  options.write_csv = !o.no_csv;
  options.write_svg = !o.no_svg;
  options.write_cohort_csv = o.cohort_csv;
  const auto dir = output_dir(o.out);
  const auto summary = run_scenario(scenario, options, dir);
  const auto& report = summary.report;

  out << "scenario " << scenario.name << "  " << scenario.horizon_periods << "T  spec " << scenario.spec.fingerprint()
      << "\n";
  if (!report["starts"].empty()) {
    out << "#   start          verdict        growth     coverage   drift\n";
    for (const auto& s : report["starts"]) {
      const std::string point = format_point(s["start"][0].get<double>(), s["start"][1].get<double>());
      std::string verdict = s["verdict"]["label"].get<std::string>();
      std::string growth = "-", coverage = "-", drift = "-";
      if (s.contains("coverage")) {
        growth = fixed(s["verdict"]["growth_tail"].get<double>(), 4);
        coverage = fixed(s["coverage"].get<double>(), 3);
        if (!s["angular_drift_rate"].is_null()) drift = fixed(s["angular_drift_rate"].get<double>(), 5);
      }
      out << pad(std::to_string(s["index"].get<int>()), 4) << pad(point, 15) << pad(verdict, 15) << pad(growth, 11)
          << pad(coverage, 11) << drift << "\n";
    }
  }
  if (!report["cohorts"].empty()) {
    out << "#   center         max dist   final max  overlap\n";
    for (const auto& c : report["cohorts"]) {
      const std::string point = format_point(c["center"][0].get<double>(), c["center"][1].get<double>());
      std::string max = "-", final_max = "-", overlap = "-";
      if (c.contains("report")) {
        const auto& r = c["report"];
        max = fixed(r["max_pairwise_distance"].get<double>(), 4);
        double fm = 0.0;
        for (const auto& row : r["final_distances"]) {
          for (const auto& v : row) fm = std::max(fm, v.get<double>());
        }
        final_max = fixed(fm, 4);
        overlap = fixed(r["mean_overlap"].get<double>(), 3);
      }
      out << pad(std::to_string(c["index"].get<int>()), 4) << pad(point, 15) << pad(max, 11) << pad(final_max, 11)
          << overlap << "\n";
    }
  }
  bool split_ok = true;
  for (const auto& check : report["expectations"]) {
    if (check["check"] == "label_split") split_ok = check["pass"].get<bool>();
  }
  for (const auto& check : report["expectations"]) {
    if (check["pass"].get<bool>()) continue;
    const bool tolerated = split_ok && check["check"] == "label";
    out << (tolerated ? "label mismatch (within allowance): " : "expectation failed: ") << check.dump() << "\n";
  }
  out << "summary " << (dir / scenario.name / "summary.json").string() << "  expectation failures "
      << summary.expectation_failures << "  integration failures " << summary.integration_failures << "\n";

  if (summary.integration_failures > 0) return kExitNumerical;
  if (o.expect && !summary.expectations_met()) return kExitMismatch;
  return kExitOk;
}

// ensemble -------------------------------------------------------------------

struct EnsembleOptions {
  SpecOptions spec;
  std::string initial = "uniform-disk";
  std::size_t n = 10000;
  std::uint64_t seed = 1;
  int periods = 5;
  int grid = 30;
  bool plot = false;
  double abstol = IntegratorConfig{}.abstol;
  unsigned workers = 1;
  std::string out;
};

std::string density_plot(const EnsembleState& state, const std::string& title, const std::string& provenance) {
  const GridSpec grid{4.0, 60};
  const auto hist = occupancy_grid(state.points, grid);
  std::vector<double> cells(hist.counts.begin(), hist.counts.end());
  PlotSpec plot;
  plot.description = provenance;
  plot.annotations = {title};
  return density_svg(cells, grid, plot);
}

int cmd_ensemble(const EnsembleOptions& o, std::ostream& out, std::ostream& err) {
  if (o.n == 0) throw UsageError("--n must be positive");
  const auto resolved = resolve_spec(o.spec);
  const auto dist = InitialDistribution::parse(o.initial);
  IntegratorConfig config;
  config.abstol = o.abstol;
  config.validate();
  const GridSpec grid{4.0, o.grid};
  grid.validate();
  const auto dir = output_dir(o.out);

  const std::string provenance = "# config.workers_independent = yes\n" + config.to_text().render("# config.") +
                                 "# grid.resolution = " + std::to_string(o.grid) + "\n";
  const std::string svg_provenance = "pilotwave " + std::string(kVersion) + "\n" + resolved.spec.serialize() +
                                     "initial = " + dist.name() + "\nseed = " + std::to_string(o.seed) + "\nn = " +
                                     std::to_string(o.n) + "\n" + config.to_text().render("config.");

  auto state = sample_initial(dist, o.n, o.seed, &resolved.spec, 0.0);
  std::ostringstream initial_csv;
  write_ensemble_csv(initial_csv, state, resolved.spec, provenance);
  write_text(dir / "ensemble-initial.csv", initial_csv.str());
  if (o.plot) write_text(dir / "density-initial.svg", density_plot(state, "t = 0  " + dist.name(), svg_provenance));

  std::vector<HRecord> series;
  series.push_back(coarse_grained_H(state, resolved.spec, grid));
  out << "period  hbar              cells\n";
  out << pad("0", 8) << pad(format_number(series.back().hbar), 18) << series.back().cells_used << "\n";
  for (int p = 1; p <= o.periods; ++p) {
    state = evolve_ensemble(resolved.spec, state, kPeriod, config, o.workers);
    series.push_back(coarse_grained_H(state, resolved.spec, grid));
    out << pad(std::to_string(p), 8) << pad(format_number(series.back().hbar), 18) << series.back().cells_used
        << "\n";
  }

  std::ostringstream final_csv, h_csv;
  write_ensemble_csv(final_csv, state, resolved.spec, provenance);
  write_text(dir / "ensemble-final.csv", final_csv.str());
  write_h_series_csv(h_csv, series, resolved.spec,
                     "# initial_distribution = " + dist.name() + "\n# seed = " + std::to_string(o.seed) + "\n# n = " +
                         std::to_string(o.n) + "\n" + provenance);
  write_text(dir / "hbar.csv", h_csv.str());
  if (o.plot) {
    write_text(dir / "density-final.svg",
               density_plot(state, "t = " + std::to_string(o.periods) + "T  " + dist.name(), svg_provenance));
    const GridSpec fine{4.0, 60};
    PlotSpec plot;
    plot.description = svg_provenance;
    plot.annotations = {"|psi|^2 at t = " + std::to_string(o.periods) + "T"};
    write_text(dir / "density-born.svg",
               density_svg(cell_averaged_density(resolved.spec, state.t, fine), fine, plot));
  }
  out << "wrote " << (dir / "hbar.csv").string() << "\n";
  if (!state.failures.empty()) {
    err << state.failures.size() << " of " << o.n << " points dropped after integration failures\n";
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pilot-wave trajectories in a perturbed two-dimensional oscillator", "pilotwave"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  TrajectoryOptions traj;
  auto* t = app.add_subcommand("trajectory", "Integrate one trajectory");
  traj.spec.add_to(*t);
  t->add_option("--start", traj.start, "Start point x,y")->required();
  t->add_option("--periods", traj.periods, "Horizon in periods (default: scenario horizon or 100)")
      ->check(CLI::PositiveNumber);
  t->add_option("--out", traj.out, "Output directory");
  t->add_option("--name", traj.name, "Output file stem");
  t->add_flag("--svg", traj.svg, "Also write an SVG plot");
  t->add_option("--stride", traj.stride, "Plot every k-th sample (default 3 from 1000 periods)")
      ->check(CLI::PositiveNumber);
  t->add_flag("--checkpoints", traj.checkpoints, "Print the bounding-box series");
  t->add_flag("--verify", traj.verify, "Run the convergence protocol (abstol vs abstol/10)");
  t->add_option("--abstol", traj.abstol, "Absolute error tolerance")->check(CLI::PositiveNumber);

  SweepOptions sweep;
  auto* s = app.add_subcommand("sweep", "Run a scenario and summarize every start");
  s->add_option("--scenario", sweep.scenario, "Catalog scenario name");
  s->add_option("--file", sweep.file, "Scenario document");
  s->add_option("--periods", sweep.periods, "Truncate the horizon")->check(CLI::PositiveNumber);
  s->add_option("--workers", sweep.workers, "Concurrent trajectories")->check(CLI::PositiveNumber);
  s->add_flag("--expect", sweep.expect, "Exit 3 when expectations are not met");
  s->add_flag("--list", sweep.list, "List catalog scenarios");
  s->add_flag("--no-csv", sweep.no_csv, "Skip per-trajectory CSV files");
  s->add_flag("--no-svg", sweep.no_svg, "Skip SVG plots");
  s->add_flag("--cohort-csv", sweep.cohort_csv, "Write one CSV per cohort member");
  s->add_option("--out", sweep.out, "Output directory");
  s->add_option("--abstol", sweep.abstol, "Absolute error tolerance")->check(CLI::PositiveNumber);

  EnsembleOptions ens;
  auto* e = app.add_subcommand("ensemble", "Evolve an ensemble and track the coarse-grained H-function");
  ens.spec.add_to(*e);
  e->add_option("--initial", ens.initial, "ground-born, born, uniform-disk[:R[@x,y]], gaussian[:sigma[@x,y]]");
  e->add_option("--n", ens.n, "Number of particles");
  e->add_option("--seed", ens.seed, "Random seed");
  e->add_option("--periods", ens.periods, "Periods to evolve")->check(CLI::NonNegativeNumber);
  e->add_option("--grid", ens.grid, "Coarse-graining cells per axis over [-4,4]")->check(CLI::PositiveNumber);
  e->add_flag("--plot", ens.plot, "Write density heat maps");
  e->add_option("--abstol", ens.abstol, "Absolute error tolerance")->check(CLI::PositiveNumber);
  e->add_option("--workers", ens.workers, "Worker threads")->check(CLI::PositiveNumber);
  e->add_option("--out", ens.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& ok) {
    return app.exit(ok, out, err);
  } catch (const CLI::ParseError& error) {
    app.exit(error, out, err);
    return kExitUsage;
  }

  try {
    if (t->parsed()) return cmd_trajectory(traj, out, err);
    if (s->parsed()) return cmd_sweep(sweep, out);
    if (e->parsed()) return cmd_ensemble(ens, out, err);
  } catch (const UsageError& error) {
    err << "usage error: " << error.what() << "\n";
    return kExitUsage;
  } catch (const InvalidSpec& error) {
    err << "invalid spec: " << error.what() << "\n";
    return kExitUsage;
  } catch (const InvalidArgument& error) {
    err << "invalid argument: " << error.what() << "\n";
    return kExitUsage;
  } catch (const pilotwave::ParseError& error) {
    err << "parse error: " << error.what() << "\n";
    return kExitUsage;
  } catch (const IntegrationError& error) {
    err << "integration failed: " << error.what() << "\n";
    return kExitNumerical;
  } catch (const NodeProximity& error) {
    err << "node proximity: " << error.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}

}  // namespace pilotwave::cli
