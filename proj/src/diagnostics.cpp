#include "pilotwave/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace pilotwave {

std::vector<double> default_checkpoint_periods() { return {25, 100, 200, 500, 1000, 2000, 3000}; }

std::vector<double> periods_to_times(std::span<const double> periods) {
  std::vector<double> out;
  out.reserve(periods.size());
  for (double p : periods) out.push_back(p * kPeriod);
  return out;
}

BoundingBoxSeries bounding_box_series(const Trajectory& traj, std::span<const double> checkpoints) {
  if (traj.samples.empty()) throw InvalidArgument("trajectory has no samples");
  const double slack = 1e-9 * std::max(1.0, traj.samples.back().t);
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (i > 0 && !(checkpoints[i] > checkpoints[i - 1])) {
      throw InvalidArgument("checkpoints must be strictly increasing");
    }
    if (checkpoints[i] > traj.samples.back().t + slack) {
      throw InvalidArgument("checkpoint t=" + format_number(checkpoints[i]) +
                            " lies beyond the trajectory horizon t=" + format_number(traj.samples.back().t));
    }
  }

  BoundingBoxSeries series;
  series.checkpoints.assign(checkpoints.begin(), checkpoints.end());
  double lo1 = traj.samples.front().q1, hi1 = lo1;
  double lo2 = traj.samples.front().q2, hi2 = lo2;
  std::size_t next = 0;
  for (const auto& s : traj.samples) {
    while (next < checkpoints.size() && s.t > checkpoints[next] + slack) {
      series.widths.push_back(hi1 - lo1);
      series.heights.push_back(hi2 - lo2);
      ++next;
    }
    if (next == checkpoints.size()) break;
    lo1 = std::min(lo1, s.q1);
    hi1 = std::max(hi1, s.q1);
    lo2 = std::min(lo2, s.q2);
    hi2 = std::max(hi2, s.q2);
  }
  while (series.widths.size() < checkpoints.size()) {
    series.widths.push_back(hi1 - lo1);
    series.heights.push_back(hi2 - lo2);
  }
  return series;
}

const char* to_string(Confinement label) {
  switch (label) {
    case Confinement::Confined:
      return "Confined";
    case Confinement::Unconfined:
      return "Unconfined";
    case Confinement::Indeterminate:
      return "Indeterminate";
  }
  return "Indeterminate";
}

namespace {

double relative_growth(double before, double after) {
  if (before > 0.0) return (after - before) / before;
  return after > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

}  // namespace

ConfinementVerdict classify_confinement(const BoundingBoxSeries& series,
                                        const ConfinementThresholds& thresholds) {
  const std::size_t n = series.size();
  if (n < 4 || series.widths.size() != n || series.heights.size() != n) {
    throw InvalidArgument("confinement classification needs at least 4 checkpoints");
  }
  ConfinementVerdict verdict;
  verdict.thresholds = thresholds;

  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(series.extent(i))) return verdict;
  }

  const double penultimate = series.extent(n - 2);
  verdict.growth_tail = relative_growth(penultimate, series.extent(n - 1));

  std::size_t saturated_from = n;
  for (std::size_t i = n - 1; i > 0; --i) {
    if (relative_growth(series.extent(i - 1), series.extent(i)) >= thresholds.tail_growth) break;
    saturated_from = i - 1;
  }
  if (saturated_from < n - 1) verdict.saturation_checkpoint = series.checkpoints[saturated_from];

  const bool covers = penultimate >= thresholds.support_fraction * thresholds.support_extent;
  const bool growing = verdict.growth_tail >= thresholds.tail_growth;
  verdict.label = (growing || covers) ? Confinement::Unconfined : Confinement::Confined;
  return verdict;
}

int GridSpec::cell_of(double q1, double q2) const {
  const double w = cell_width();
  const double x = (q1 + half_width) / w;
  const double y = (q2 + half_width) / w;
  if (!(x >= 0.0 && y >= 0.0 && x < resolution && y < resolution)) return -1;
  return static_cast<int>(y) * resolution + static_cast<int>(x);
}

void GridSpec::validate() const {
  if (!(half_width > 0.0 && std::isfinite(half_width))) throw InvalidArgument("grid half-width must be positive");
  if (resolution < 1) throw InvalidArgument("grid resolution must be at least 1");
}

long OccupancyGrid::total_inside() const { return std::accumulate(counts.begin(), counts.end(), 0L); }

std::size_t OccupancyGrid::visited_cells() const {
  return static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [](long c) { return c > 0; }));
}

OccupancyGrid occupancy_grid(std::span<const Point> points, const GridSpec& grid) {
  grid.validate();
  OccupancyGrid out;
  out.grid = grid;
  out.counts.assign(grid.cell_count(), 0);
  for (const auto& p : points) {
    const int cell = grid.cell_of(p.q1, p.q2);
    if (cell < 0) {
      ++out.outside;
    } else {
      ++out.counts[static_cast<std::size_t>(cell)];
    }
  }
  return out;
}

OccupancyGrid occupancy_grid(const Trajectory& traj, const GridSpec& grid) {
  grid.validate();
  OccupancyGrid out;
  out.grid = grid;
  out.counts.assign(grid.cell_count(), 0);
  for (const auto& s : traj.samples) {
    const int cell = grid.cell_of(s.q1, s.q2);
    if (cell < 0) {
      ++out.outside;
    } else {
      ++out.counts[static_cast<std::size_t>(cell)];
    }
  }
  return out;
}

namespace {

void check_same_geometry(const OccupancyGrid& a, const OccupancyGrid& b) {
  if (a.grid.resolution != b.grid.resolution || a.grid.half_width != b.grid.half_width) {
    throw InvalidArgument("occupancy grids have different geometry");
  }
}

}  // namespace

OccupancyGrid merge_grids(std::span<const OccupancyGrid> grids) {
  if (grids.empty()) throw InvalidArgument("nothing to merge");
  OccupancyGrid out = grids.front();
  for (std::size_t k = 1; k < grids.size(); ++k) {
    check_same_geometry(out, grids[k]);
    for (std::size_t c = 0; c < out.counts.size(); ++c) out.counts[c] += grids[k].counts[c];
    out.outside += grids[k].outside;
  }
  return out;
}

double jaccard(const OccupancyGrid& a, const OccupancyGrid& b) {
  check_same_geometry(a, b);
  std::size_t both = 0, either = 0;
  for (std::size_t c = 0; c < a.counts.size(); ++c) {
    const bool va = a.counts[c] > 0;
    const bool vb = b.counts[c] > 0;
    both += (va && vb) ? 1 : 0;
    either += (va || vb) ? 1 : 0;
  }
  return either == 0 ? 1.0 : static_cast<double>(both) / static_cast<double>(either);
}

std::vector<double> time_averaged_density(const WaveFunctionSpec& spec, const GridSpec& grid,
                                          int time_nodes) {
  grid.validate();
  if (time_nodes < 1) throw InvalidArgument("need at least one time node");
  std::vector<double> avg(grid.cell_count(), 0.0);
  for (int iy = 0; iy < grid.resolution; ++iy) {
    const double q2 = grid.center(iy);
    for (int ix = 0; ix < grid.resolution; ++ix) {
      const double q1 = grid.center(ix);
      double sum = 0.0;
      for (int k = 0; k < time_nodes; ++k) sum += born_density(spec, q1, q2, kPeriod * k / time_nodes);
      avg[static_cast<std::size_t>(iy) * grid.resolution + ix] = sum / time_nodes;
    }
  }
  return avg;
}

std::vector<bool> born_significant_cells(const WaveFunctionSpec& spec, const GridSpec& grid,
                                         double mass_fraction) {
  if (!(mass_fraction > 0.0 && mass_fraction <= 1.0)) throw InvalidArgument("mass fraction must be in (0,1]");
  const auto density = time_averaged_density(spec, grid);
  std::vector<std::size_t> order(density.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Ties broken by index so the selection is deterministic.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return density[a] > density[b]; });
  const double total = std::accumulate(density.begin(), density.end(), 0.0);
  std::vector<bool> significant(density.size(), false);
  double cumulative = 0.0;
  for (std::size_t idx : order) {
    if (cumulative >= mass_fraction * total) break;
    significant[idx] = true;
    cumulative += density[idx];
  }
  return significant;
}

double coverage_fraction(const OccupancyGrid& grid, const WaveFunctionSpec& spec, double mass_fraction) {
  return coverage_fraction(grid, born_significant_cells(spec, grid.grid, mass_fraction));
}

double coverage_fraction(const OccupancyGrid& grid, const std::vector<bool>& significant) {
  if (significant.size() != grid.counts.size()) throw InvalidArgument("significance mask does not match the grid");
  std::size_t hit = 0, total = 0;
  for (std::size_t c = 0; c < significant.size(); ++c) {
    if (!significant[c]) continue;
    ++total;
    if (grid.counts[c] > 0) ++hit;
  }
  return total == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(total);
}

AnnulusMetrics annulus_metrics(const OccupancyGrid& grid, double inner_radius) {
  AnnulusMetrics m;
  m.r_min = std::numeric_limits<double>::infinity();
  bool any = false;
  const int res = grid.grid.resolution;
  for (int iy = 0; iy < res; ++iy) {
    for (int ix = 0; ix < res; ++ix) {
      const long count = grid.counts[static_cast<std::size_t>(iy) * res + ix];
      if (count == 0) continue;
      any = true;
      const double r = std::hypot(grid.grid.center(ix), grid.grid.center(iy));
      m.r_min = std::min(m.r_min, r);
      m.r_max = std::max(m.r_max, r);
      if (r < inner_radius) m.visits_inside_unit += count;
    }
  }
  if (!any) m.r_min = 0.0;
  m.radial_width = m.r_max - m.r_min;
  return m;
}

CohortReport cohort_analysis(std::span<const Trajectory> trajectories, const GridSpec& grid) {
  const std::size_t n = trajectories.size();
  if (n < 2) throw InvalidArgument("cohort analysis needs at least two trajectories");
  const auto& first = trajectories.front();
  for (const auto& tr : trajectories) {
    if (tr.spec_fingerprint != first.spec_fingerprint) throw InvalidArgument("cohort trajectories use different specs");
    if (tr.samples.size() != first.samples.size() || tr.sample_interval != first.sample_interval ||
        tr.samples.empty()) {
      throw InvalidArgument("cohort trajectories have different horizons or cadences");
    }
  }

  CohortReport report;
  report.size = n;
  double lo1 = first.start.q1, hi1 = lo1, lo2 = first.start.q2, hi2 = lo2;
  double sum1 = 0.0, sum2 = 0.0;
  for (const auto& tr : trajectories) {
    sum1 += tr.start.q1;
    sum2 += tr.start.q2;
    lo1 = std::min(lo1, tr.start.q1);
    hi1 = std::max(hi1, tr.start.q1);
    lo2 = std::min(lo2, tr.start.q2);
    hi2 = std::max(hi2, tr.start.q2);
  }
  report.center = {sum1 / n, sum2 / n};
  report.edge = std::max(hi1 - lo1, hi2 - lo2);
  report.final_distances.assign(n, std::vector<double>(n, 0.0));

  std::vector<OccupancyGrid> grids;
  grids.reserve(n);
  for (const auto& tr : trajectories) grids.push_back(occupancy_grid(tr, grid));

  double overlap_sum = 0.0;
  report.max_pairwise_distance = -1.0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      PairStatistics pair;
      pair.a = static_cast<int>(a);
      pair.b = static_cast<int>(b);
      pair.max_distance = -1.0;
      const auto& sa = trajectories[a].samples;
      const auto& sb = trajectories[b].samples;
      for (std::size_t k = 0; k < sa.size(); ++k) {
        const double d = distance(sa[k].position(), sb[k].position());
        if (d > pair.max_distance) {
          pair.max_distance = d;
          pair.max_time = sa[k].t;
        }
      }
      pair.final_distance = distance(sa.back().position(), sb.back().position());
      report.final_distances[a][b] = report.final_distances[b][a] = pair.final_distance;
      report.initial_spread = std::max(report.initial_spread, distance(sa.front().position(), sb.front().position()));
      if (pair.max_distance > report.max_pairwise_distance) {
        report.max_pairwise_distance = pair.max_distance;
        report.max_time = pair.max_time;
        report.max_pair_a = pair.a;
        report.max_pair_b = pair.b;
      }
      overlap_sum += jaccard(grids[a], grids[b]);
      report.pairs.push_back(pair);
    }
  }
  report.mean_overlap = overlap_sum / static_cast<double>(report.pairs.size());
  return report;
}

double angular_drift_rate(const Trajectory& traj) {
  const auto& s = traj.samples;
  if (s.size() < 2) throw InvalidArgument("angular drift needs at least two samples");
  std::vector<double> angle(s.size());
  double offset = 0.0;
  double prev = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (std::hypot(s[k].q1, s[k].q2) < 1e-6) {
      throw InvalidArgument("polar angle undefined: sample at t=" + format_number(s[k].t) + " is at the origin");
    }
    const double a = std::atan2(s[k].q2, s[k].q1);
    if (k > 0) {
      const double jump = a - prev;
      if (jump > std::numbers::pi) offset -= 2.0 * std::numbers::pi;
      if (jump < -std::numbers::pi) offset += 2.0 * std::numbers::pi;
    }
    prev = a;
    angle[k] = a + offset;
  }
  // Centered least squares for the slope.
  const double n = static_cast<double>(s.size());
  double mean_t = 0.0, mean_a = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    mean_t += s[k].t;
    mean_a += angle[k] - angle[0];
  }
  mean_t /= n;
  mean_a /= n;
  double stt = 0.0, sta = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double dt = s[k].t - mean_t;
    stt += dt * dt;
    sta += dt * (angle[k] - angle[0] - mean_a);
  }
  return sta / stt * kPeriod;
}

nlohmann::json to_json(const BoundingBoxSeries& series) {
  nlohmann::json periods = nlohmann::json::array();
  for (double c : series.checkpoints) periods.push_back(c / kPeriod);
  return {{"checkpoint_periods", periods}, {"widths", series.widths}, {"heights", series.heights}};
}

nlohmann::json to_json(const ConfinementVerdict& verdict) {
  nlohmann::json j{{"label", to_string(verdict.label)},
                   {"growth_tail", std::isfinite(verdict.growth_tail) ? nlohmann::json(verdict.growth_tail)
                                                                      : nlohmann::json("inf")},
                   {"thresholds",
                    {{"tail_growth", verdict.thresholds.tail_growth},
                     {"support_fraction", verdict.thresholds.support_fraction},
                     {"support_extent", verdict.thresholds.support_extent}}}};
  j["saturation_period"] =
      verdict.saturation_checkpoint ? nlohmann::json(*verdict.saturation_checkpoint / kPeriod) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const AnnulusMetrics& m) {
  return {{"r_min", m.r_min},
          {"r_max", m.r_max},
          {"radial_width", m.radial_width},
          {"visits_inside_unit_disk", m.visits_inside_unit}};
}

nlohmann::json to_json(const CohortReport& r) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : r.pairs) {
    pairs.push_back({{"a", p.a},
                     {"b", p.b},
                     {"max_distance", p.max_distance},
                     {"max_period", p.max_time / kPeriod},
                     {"final_distance", p.final_distance}});
  }
  return {{"center", {r.center.q1, r.center.q2}},
          {"edge", r.edge},
          {"size", r.size},
          {"initial_spread", r.initial_spread},
          {"max_pairwise_distance", r.max_pairwise_distance},
          {"max_period", r.max_time / kPeriod},
          {"max_pair", {r.max_pair_a, r.max_pair_b}},
          {"final_distances", r.final_distances},
          {"mean_overlap", r.mean_overlap},
          {"pairs", pairs}};
}

void write_grid_csv(std::ostream& out, const OccupancyGrid& grid) {
  out << "# occupancy grid half_width = " << format_number(grid.grid.half_width)
      << " resolution = " << grid.grid.resolution << " outside = " << grid.outside << "\n";
  const int res = grid.grid.resolution;
  for (int iy = 0; iy < res; ++iy) {
    for (int ix = 0; ix < res; ++ix) {
      if (ix > 0) out << ',';
      out << grid.counts[static_cast<std::size_t>(iy) * res + ix];
    }
    out << '\n';
  }
}

}  // namespace pilotwave
