#pragma once

// Confinement and coverage measures over integrated trajectories.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "pilotwave/integrator.hpp"
#include "pilotwave/wavefunction.hpp"

namespace pilotwave {

/// 25, 100, 200, 500, 1000, 2000, 3000 periods.
std::vector<double> default_checkpoint_periods();
/// Converts period counts to times.
std::vector<double> periods_to_times(std::span<const double> periods);

/// Prefix bounding-box extents of a trajectory at increasing horizons.
struct BoundingBoxSeries {
  std::vector<double> checkpoints;  // times
  std::vector<double> widths;       // max q1 - min q1 over samples with t <= checkpoint
  std::vector<double> heights;      // same for q2

  double extent(std::size_t i) const { return widths[i] + heights[i]; }
  std::size_t size() const { return checkpoints.size(); }
};

/// Throws InvalidArgument if a checkpoint lies beyond the last sample or the
/// checkpoints are not increasing.
BoundingBoxSeries bounding_box_series(const Trajectory& traj, std::span<const double> checkpoints);

enum class Confinement { Confined, Unconfined, Indeterminate };
const char* to_string(Confinement label);

struct ConfinementThresholds {
  /// Relative growth of width+height over the last two checkpoints.
  double tail_growth = 0.02;
  /// Fraction of support_extent at which a box counts as covering the support.
  double support_fraction = 0.8;
  /// width+height of the reference support box.
  double support_extent = 8.0 * std::numbers::sqrt2;
};

struct ConfinementVerdict {
  Confinement label = Confinement::Indeterminate;
  double growth_tail = 0.0;
  /// First checkpoint after which width+height never again grows by more
  /// than tail_growth.
  std::optional<double> saturation_checkpoint;
  ConfinementThresholds thresholds;
};

/// Needs at least 4 checkpoints; throws InvalidArgument otherwise.
ConfinementVerdict classify_confinement(const BoundingBoxSeries& series,
                                        const ConfinementThresholds& thresholds = {});

/// Square [-L, L]^2 split into resolution x resolution cells.
struct GridSpec {
  double half_width = 4.0;
  int resolution = 60;

  double cell_width() const { return 2.0 * half_width / resolution; }
  double cell_area() const { return cell_width() * cell_width(); }
  double center(int index) const { return -half_width + (index + 0.5) * cell_width(); }
  /// Flat cell index (iy * resolution + ix), or -1 outside the square.
  int cell_of(double q1, double q2) const;
  std::size_t cell_count() const { return static_cast<std::size_t>(resolution) * resolution; }
  void validate() const;
};

struct OccupancyGrid {
  GridSpec grid;
  std::vector<long> counts;  // flat, iy * resolution + ix
  long outside = 0;

  long total_inside() const;
  std::size_t visited_cells() const;
  bool visited(std::size_t cell) const { return counts[cell] > 0; }
};

OccupancyGrid occupancy_grid(const Trajectory& traj, const GridSpec& grid = {});
OccupancyGrid occupancy_grid(std::span<const Point> points, const GridSpec& grid = {});
/// Cell-wise sum of grids with identical geometry.
OccupancyGrid merge_grids(std::span<const OccupancyGrid> grids);

/// |A n B| / |A u B| over visited cells; 1 when both are empty.
double jaccard(const OccupancyGrid& a, const OccupancyGrid& b);

/// One-period average of |psi|^2 at each cell midpoint (100 time nodes).
std::vector<double> time_averaged_density(const WaveFunctionSpec& spec, const GridSpec& grid,
                                          int time_nodes = 100);

/// Smallest set of cells holding mass_fraction of the time-averaged Born mass.
std::vector<bool> born_significant_cells(const WaveFunctionSpec& spec, const GridSpec& grid,
                                         double mass_fraction = 0.99);

/// Fraction of Born-significant cells that the grid visits.
double coverage_fraction(const OccupancyGrid& grid, const WaveFunctionSpec& spec,
                         double mass_fraction = 0.99);
/// Same, against a precomputed significance mask.
double coverage_fraction(const OccupancyGrid& grid, const std::vector<bool>& significant);

/// Radial structure of the visited cells, measured at cell centers.
struct AnnulusMetrics {
  double r_min = 0.0;          // smallest visited cell-center radius
  double r_max = 0.0;          // largest visited cell-center radius
  double radial_width = 0.0;   // r_max - r_min
  long visits_inside_unit = 0; // visits to cells whose center is within radius 1
};

AnnulusMetrics annulus_metrics(const OccupancyGrid& grid, double inner_radius = 1.0);

struct PairStatistics {
  int a = 0;
  int b = 0;
  double max_distance = 0.0;
  double max_time = 0.0;
  double final_distance = 0.0;
};

struct CohortReport {
  Point center;
  double edge = 0.0;
  std::size_t size = 0;
  double initial_spread = 0.0;      // largest pairwise start distance
  double max_pairwise_distance = 0.0;
  double max_time = 0.0;
  int max_pair_a = 0;
  int max_pair_b = 0;
  std::vector<std::vector<double>> final_distances;
  double mean_overlap = 0.0;        // mean pairwise Jaccard of occupancy grids
  std::vector<PairStatistics> pairs;
};

/// Pairwise statistics of trajectories started from a small neighborhood.
/// All trajectories must share spec fingerprint, cadence and sample count.
CohortReport cohort_analysis(std::span<const Trajectory> trajectories, const GridSpec& grid = {});

/// Least-squares slope of the unwrapped polar angle, in radians per period.
/// Throws InvalidArgument when a sample comes within 1e-6 of the origin.
double angular_drift_rate(const Trajectory& traj);

nlohmann::json to_json(const BoundingBoxSeries& series);
nlohmann::json to_json(const ConfinementVerdict& verdict);
nlohmann::json to_json(const AnnulusMetrics& metrics);
nlohmann::json to_json(const CohortReport& report);

/// Grid counts as a CSV matrix, one row per q2 cell from bottom to top.
void write_grid_csv(std::ostream& out, const OccupancyGrid& grid);

}  // namespace pilotwave
