#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <functional>
#include <numbers>
#include <sstream>

#include "pilotwave/diagnostics.hpp"
#include "pilotwave/errors.hpp"
#include "pilotwave/experiments.hpp"

using namespace pilotwave;

namespace {

// Synthetic trajectory sampled every T/100 up to the given number of periods.
Trajectory synthetic(int periods, const std::function<Point(double)>& path) {
  Trajectory traj;
  traj.sample_interval = kPeriod / 100.0;
  traj.horizon = periods * kPeriod;
  traj.spec_fingerprint = "synthetic";
  for (int k = 0; k <= periods * 100; ++k) {
    const double t = k * traj.sample_interval;
    const auto p = path(t);
    traj.samples.push_back({t, p.q1, p.q2});
  }
  traj.start = traj.samples.front().position();
  return traj;
}

Trajectory stationary(Point p, int periods = 30) {
  return synthetic(periods, [p](double) { return p; });
}

BoundingBoxSeries series_of(std::vector<double> extents) {
  BoundingBoxSeries s;
  for (std::size_t i = 0; i < extents.size(); ++i) {
    s.checkpoints.push_back((i + 1) * 100.0);
    s.widths.push_back(extents[i] / 2);
    s.heights.push_back(extents[i] / 2);
  }
  return s;
}

const std::vector<double> kShortCheckpoints = {5 * kPeriod, 10 * kPeriod, 20 * kPeriod, 30 * kPeriod};

}  // namespace

TEST_CASE("bounding box series") {
  SUBCASE("stationary") {
    const auto s = bounding_box_series(stationary({0.3, 0.4}), kShortCheckpoints);
    REQUIRE(s.size() == 4);
    for (std::size_t i = 0; i < s.size(); ++i) {
      CHECK(s.widths[i] == 0.0);
      CHECK(s.heights[i] == 0.0);
    }
  }
  SUBCASE("prefix extents of a linear drift") {
    const auto traj = synthetic(30, [](double t) { return Point{t / kPeriod * 0.1, -t / kPeriod * 0.05}; });
    const auto s = bounding_box_series(traj, kShortCheckpoints);
    CHECK(s.widths[0] == doctest::Approx(0.5));
    CHECK(s.heights[0] == doctest::Approx(0.25));
    CHECK(s.widths[3] == doctest::Approx(3.0));
    CHECK(s.extent(3) == doctest::Approx(4.5));
  }
  SUBCASE("monotone on a real trajectory") {
    const auto traj = integrate_trajectory(make_spec(published_phase_set("fn3"), 1.0), {-1.5, 1.5}, 30 * kPeriod);
    const auto s = bounding_box_series(traj, kShortCheckpoints);
    for (std::size_t i = 1; i < s.size(); ++i) {
      CHECK(s.widths[i] >= s.widths[i - 1]);
      CHECK(s.heights[i] >= s.heights[i - 1]);
    }
  }
  SUBCASE("errors") {
    const auto traj = stationary({0, 1}, 10);
    const std::vector<double> beyond = {5 * kPeriod, 11 * kPeriod};
    CHECK_THROWS_AS(bounding_box_series(traj, beyond), InvalidArgument);
    const std::vector<double> unordered = {5 * kPeriod, 2 * kPeriod};
    CHECK_THROWS_AS(bounding_box_series(traj, unordered), InvalidArgument);
  }
}

TEST_CASE("confinement classifier") {
  CHECK(classify_confinement(series_of({0, 0, 0, 0})).label == Confinement::Confined);
  CHECK(classify_confinement(series_of({0, 0, 0, 0})).growth_tail == 0.0);

  const auto flat = classify_confinement(series_of({1.0, 2.0, 2.5, 2.51}));
  CHECK(flat.label == Confinement::Confined);
  CHECK(flat.growth_tail == doctest::Approx(0.004));
  CHECK(flat.saturation_checkpoint.has_value());

  const auto growing = classify_confinement(series_of({1.0, 2.0, 2.5, 2.6}));
  CHECK(growing.label == Confinement::Unconfined);
  CHECK(growing.growth_tail == doctest::Approx(0.04));

  // Saturated but already spanning the support.
  const auto wide = classify_confinement(series_of({8.0, 9.5, 10.0, 10.0}));
  CHECK(wide.label == Confinement::Unconfined);

  // Exactly at the thresholds counts as unconfined.
  ConfinementThresholds t;
  const double limit = t.support_fraction * t.support_extent;
  CHECK(classify_confinement(series_of({1, 2, limit, limit})).label == Confinement::Unconfined);
  CHECK(classify_confinement(series_of({1, 2, 2, 2.04})).label == Confinement::Unconfined);

  t.tail_growth = 0.05;
  CHECK(classify_confinement(series_of({1.0, 2.0, 2.5, 2.6}), t).label == Confinement::Confined);

  CHECK_THROWS_AS(classify_confinement(series_of({1, 2, 3})), InvalidArgument);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK(classify_confinement(series_of({1, 2, nan, 3})).label == Confinement::Indeterminate);
}

TEST_CASE("finer checkpoints do not flip a confined verdict") {
  const auto coarse = series_of({1.0, 2.0, 2.5, 2.51});
  auto fine = coarse;
  fine.checkpoints = {100, 150, 200, 250, 300, 400};
  fine.widths = {0.5, 0.8, 1.0, 1.1, 1.25, 1.255};
  fine.heights = fine.widths;
  CHECK(classify_confinement(coarse).label == Confinement::Confined);
  CHECK(classify_confinement(fine).label == Confinement::Confined);
}

TEST_CASE("occupancy grid") {
  const GridSpec grid;
  CHECK(grid.cell_width() == doctest::Approx(8.0 / 60));
  CHECK(grid.cell_of(-4.0, -4.0) == 0);
  CHECK(grid.cell_of(3.999, 3.999) == 60 * 60 - 1);
  CHECK(grid.cell_of(4.5, 0.0) == -1);
  CHECK(grid.cell_of(0.01, 0.01) == 30 * 60 + 30);

  const auto still = occupancy_grid(stationary({0.3, 0.4}));
  CHECK(still.visited_cells() == 1);
  CHECK(still.total_inside() == static_cast<long>(30 * 100 + 1));
  CHECK(still.outside == 0);

  const auto mixed = synthetic(1, [](double t) { return Point{t < 3.0 ? 0.0 : 5.0, 0.0}; });
  const auto g = occupancy_grid(mixed);
  CHECK(g.total_inside() + g.outside == static_cast<long>(mixed.samples.size()));
  CHECK(g.outside > 0);

  GridSpec bad;
  bad.resolution = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("Jaccard overlap") {
  const auto a = occupancy_grid(synthetic(3, [](double t) { return Point{std::cos(t), std::sin(t)}; }));
  const auto b = occupancy_grid(synthetic(3, [](double t) { return Point{1.1 * std::cos(t), std::sin(t)}; }));
  const auto far = occupancy_grid(stationary({3.0, 3.0}));
  CHECK(jaccard(a, a) == 1.0);
  CHECK(jaccard(a, b) == jaccard(b, a));
  CHECK(jaccard(a, b) > 0.0);
  CHECK(jaccard(a, b) < 1.0);
  CHECK(jaccard(a, far) == 0.0);
  const OccupancyGrid empty{GridSpec{}, std::vector<long>(GridSpec{}.cell_count(), 0), 0};
  CHECK(jaccard(empty, empty) == 1.0);

  GridSpec coarse;
  coarse.resolution = 30;
  CHECK_THROWS_AS(jaccard(a, occupancy_grid(stationary({0, 1}), coarse)), InvalidArgument);
}

TEST_CASE("Born coverage") {
  const auto spec = make_spec(published_phase_set("fn3"), 1.0);
  const GridSpec grid;
  const auto significant = born_significant_cells(spec, grid);
  const auto n = std::count(significant.begin(), significant.end(), true);
  CHECK(n > 100);
  CHECK(n < static_cast<long>(grid.cell_count()));

  const auto averaged = time_averaged_density(spec, grid);
  double mass = 0.0;
  for (double d : averaged) mass += d * grid.cell_area();
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-3));

  // Stationary trajectory on a significant cell.
  const auto still = occupancy_grid(stationary({0.01, 0.01}));
  CHECK(coverage_fraction(still, spec) == doctest::Approx(1.0 / n));

  // Union covers at least as much as either part.
  const auto ga = occupancy_grid(integrate_trajectory(spec, {-0.5, 0.0}, 20 * kPeriod));
  const auto gb = occupancy_grid(integrate_trajectory(spec, {0.5, 0.0}, 20 * kPeriod));
  const std::vector<OccupancyGrid> both = {ga, gb};
  const auto merged = merge_grids(both);
  CHECK(coverage_fraction(merged, significant) >=
        std::max(coverage_fraction(ga, significant), coverage_fraction(gb, significant)));
  CHECK(coverage_fraction(merged, significant) <= 1.0);

  CHECK_THROWS_AS(coverage_fraction(still, std::vector<bool>(10, true)), InvalidArgument);
}

TEST_CASE("annulus metrics") {
  const auto ring = occupancy_grid(synthetic(2, [](double t) { return Point{2.0 * std::cos(t), 2.0 * std::sin(t)}; }));
  const auto m = annulus_metrics(ring);
  CHECK(m.r_min > 1.85);
  CHECK(m.r_max < 2.15);
  CHECK(m.radial_width == doctest::Approx(m.r_max - m.r_min));
  CHECK(m.visits_inside_unit == 0);

  const auto centre = annulus_metrics(occupancy_grid(stationary({0.1, 0.1})));
  CHECK(centre.visits_inside_unit > 0);
}

TEST_CASE("cohort analysis") {
  SUBCASE("stationary copies") {
    std::vector<Trajectory> trajs;
    for (const auto& p : square_cohort({1.5, 1.5})) trajs.push_back(stationary(p, 5));
    const auto report = cohort_analysis(trajs);
    CHECK(report.size == 13);
    CHECK(report.initial_spread == doctest::Approx(0.04 * std::numbers::sqrt2));
    CHECK(report.max_pairwise_distance == doctest::Approx(report.initial_spread));
    CHECK(report.mean_overlap == 1.0);
    CHECK(report.pairs.size() == 78);
    CHECK(report.final_distances.size() == 13);
  }
  SUBCASE("separating pair") {
    std::vector<Trajectory> trajs;
    trajs.push_back(synthetic(4, [](double) { return Point{0.0, 0.0}; }));
    trajs.push_back(synthetic(4, [](double t) { return Point{std::sin(t / 4), 0.0}; }));
    const auto report = cohort_analysis(trajs);
    CHECK(report.max_pairwise_distance == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(report.max_time == doctest::Approx(2.0 * std::numbers::pi).epsilon(1e-2));
    CHECK(report.max_pairwise_distance >= report.final_distances[0][1]);
    CHECK(report.final_distances[0][1] == doctest::Approx(report.final_distances[1][0]));
  }
  SUBCASE("mismatch") {
    std::vector<Trajectory> trajs = {stationary({0, 0}, 5), stationary({0, 0.01}, 6)};
    CHECK_THROWS_AS(cohort_analysis(trajs), InvalidArgument);
    trajs = {stationary({0, 0}, 5), stationary({0, 0.01}, 5)};
    trajs[1].spec_fingerprint = "other";
    CHECK_THROWS_AS(cohort_analysis(trajs), InvalidArgument);
    CHECK_THROWS_AS(cohort_analysis(std::span<const Trajectory>(trajs.data(), 1)), InvalidArgument);
  }
}

TEST_CASE("angular drift") {
  CHECK(angular_drift_rate(stationary({1.0, 0.5})) == 0.0);

  const auto circle = synthetic(3, [](double t) { return Point{std::cos(t), std::sin(t)}; });
  CHECK(angular_drift_rate(circle) == doctest::Approx(2.0 * std::numbers::pi));

  const auto backwards = synthetic(3, [](double t) { return Point{std::cos(t), -std::sin(t)}; });
  CHECK(angular_drift_rate(backwards) == doctest::Approx(-2.0 * std::numbers::pi));

  const auto traj = integrate_trajectory(make_spec(published_phase_set("fn4"), 0.25), {1.5, 1.5}, 20 * kPeriod);
  const double rate = angular_drift_rate(traj);
  const double c = std::cos(0.7), s = std::sin(0.7);
  auto rotated = traj;
  for (auto& p : rotated.samples) {
    const double x = p.q1, y = p.q2;
    p.q1 = c * x - s * y;
    p.q2 = s * x + c * y;
  }
  CHECK(std::abs(angular_drift_rate(rotated) - rate) < 1e-12);

  CHECK_THROWS_AS(angular_drift_rate(synthetic(1, [](double) { return Point{0.0, 0.0}; })), InvalidArgument);
}

TEST_CASE("report serialization") {
  const auto s = bounding_box_series(stationary({0.3, 0.4}), kShortCheckpoints);
  const auto j = to_json(s);
  CHECK(j.contains("widths"));
  const auto v = to_json(classify_confinement(s));
  CHECK(v["label"] == "Confined");

  std::ostringstream csv;
  write_grid_csv(csv, occupancy_grid(stationary({0.3, 0.4})));
  const auto text = csv.str();
  CHECK(std::count(text.begin(), text.end(), '\n') >= 60);
}
