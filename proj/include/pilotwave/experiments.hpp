#pragma once

// Scenario catalog and reproduction runner.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pilotwave/diagnostics.hpp"
#include "pilotwave/integrator.hpp"
#include "pilotwave/wavefunction.hpp"

namespace pilotwave {

/// Start points 1..10 of the sweep, in order.
std::vector<Point> canonical_points();

/// Center, 8 points on the boundary of a square of the given edge, and 4
/// interior points at quarter-edge offsets: 13 points.
std::vector<Point> square_cohort(Point center, double edge = 0.04);

/// Published subscripts "ab" name the state with quantum number a along q2
/// and b along q1, i.e. Mode{b, a}.
Mode mode_from_label(std::string_view label);
std::string label_from_mode(Mode mode);

/// Phases keyed by published subscript, ground state first.
struct PhaseSet {
  std::string name;
  std::vector<std::string> labels;
  std::vector<double> thetas;

  /// Throws InvalidArgument for an unknown label.
  double theta(std::string_view label) const;
};

/// fn3, fn4, fn5, fn7, fn8.
std::vector<PhaseSet> published_phase_sets();
/// Throws InvalidArgument for an unknown name.
PhaseSet published_phase_set(std::string_view name);

/// Uniform phases in [0, 2pi), rounded to the recorded precision.
PhaseSet random_phase_set(std::span<const Mode> modes, std::uint64_t seed);

/// Every non-ground label of `phases` gets amplitude epsilon.
WaveFunctionSpec make_spec(const PhaseSet& phases, double epsilon);
/// Per-label amplitudes; labels of `phases` missing from `amplitudes` are an error.
WaveFunctionSpec make_spec(const PhaseSet& phases, std::span<const std::pair<std::string, double>> amplitudes);

/// Qualitative outcomes attached to a scenario. Start indices are 1-based.
struct Expectation {
  std::vector<int> confined;
  std::vector<int> unconfined;
  /// Allowed label disagreements (for truncated horizons).
  int max_label_mismatches = 0;

  /// Ring-shaped occupancy: no visits inside annulus_inner_radius and
  /// visited cell centers spanning less than annulus_max_width radially.
  std::vector<int> annular;
  double annulus_inner_radius = 1.0;
  double annulus_max_width = 1.5;

  /// Small sub-region: coverage fraction at most small_max_coverage.
  std::vector<int> small;
  double small_max_coverage = 0.35;

  struct Cohort {
    Point center;
    std::optional<double> max_distance;       // target for the largest pairwise distance
    double max_distance_rel_tol = 0.10;
    std::optional<double> final_distance;     // target for some pair's final distance
    double final_distance_factor = 2.0;
    std::optional<double> min_overlap;        // mean pairwise Jaccard
  };
  std::vector<Cohort> cohorts;

  bool empty() const;
};

struct Scenario {
  std::string name;
  std::string description;
  WaveFunctionSpec spec = WaveFunctionSpec::ground_state();
  std::string phase_source;  // published set name, "seed:<n>" or "explicit"
  std::vector<Point> starts;
  int horizon_periods = 3000;
  std::vector<Point> cohort_centers;
  double cohort_edge = 0.04;
  Expectation expected;

  double horizon() const { return horizon_periods * kPeriod; }
  /// Throws InvalidArgument when the scenario is inconsistent.
  void validate() const;

  /// Key-value scenario document; see README for the fields.
  std::string to_text() const;
  static Scenario from_text(std::string_view text);
};

/// Full-horizon scenarios plus @500T and @100T variants of each 3000T one.
std::vector<Scenario> scenario_catalog();
/// Throws InvalidArgument for an unknown name.
Scenario find_scenario(std::string_view name);
/// Same scenario at a shorter horizon; cohort distance targets are dropped.
Scenario truncated(const Scenario& scenario, int horizon_periods);

struct RunOptions {
  IntegratorConfig integrator;
  unsigned workers = 1;
  bool write_csv = true;          // one CSV per start trajectory
  bool write_cohort_csv = false;  // one CSV per cohort member
  bool write_svg = true;
  int svg_stride = 0;             // 0: pick from the horizon
  ConfinementThresholds thresholds;
  GridSpec grid;
  /// Checkpoint horizons in periods; empty picks the defaults that fit.
  std::vector<double> checkpoint_periods;
  bool check_expectations = true;
};

/// Checkpoints up to the horizon, at least four of them.
std::vector<double> checkpoints_for(int horizon_periods);

struct ScenarioSummary {
  nlohmann::json report;
  int expectation_failures = 0;
  int integration_failures = 0;

  bool expectations_met() const { return expectation_failures == 0; }
};

/// Integrates every start and cohort, runs diagnostics, writes files under
/// out_dir/<scenario name>/ and a summary.json. Integration failures are
/// recorded per trajectory.
ScenarioSummary run_scenario(const Scenario& scenario, const RunOptions& options,
                             const std::filesystem::path& out_dir);

/// Integrates trajectories concurrently; result order matches `starts`.
std::vector<Trajectory> integrate_many(const WaveFunctionSpec& spec, std::span<const Point> starts, double horizon,
                                       const IntegratorConfig& config, unsigned workers);

}  // namespace pilotwave
