#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "pilotwave/errors.hpp"
#include "pilotwave/experiments.hpp"

using namespace pilotwave;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("pilotwave-test-" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("canonical points") {
  const auto pts = canonical_points();
  REQUIRE(pts.size() == 10);
  CHECK(pts[0] == Point{1.5, 1.5});
  CHECK(pts[2] == Point{-1.5, 1.5});
  CHECK(pts[6] == Point{-0.5, 0.0});
  CHECK(pts[9] == Point{0.25, -0.25});
}

TEST_CASE("cohort squares") {
  const auto origin = square_cohort({0.0, 0.0});
  REQUIRE(origin.size() == 13);
  const std::vector<Point> template_points = {
      {-0.02, 0.02}, {-0.02, 0.0}, {-0.02, -0.02}, {0.0, -0.02}, {0.02, -0.02}, {0.02, 0.0}, {0.02, 0.02},
      {0.0, 0.02},   {-0.01, 0.01}, {-0.01, -0.01}, {0.01, -0.01}, {0.01, 0.01}, {0.0, 0.0}};
  for (std::size_t k = 0; k < 13; ++k) {
    CHECK(origin[k].q1 == doctest::Approx(template_points[k].q1));
    CHECK(origin[k].q2 == doctest::Approx(template_points[k].q2));
  }
  const auto shifted = square_cohort({1.5, 1.5});
  CHECK(shifted[12] == Point{1.5, 1.5});
  CHECK(shifted[0].q1 == doctest::Approx(1.48));
  CHECK(shifted[0].q2 == doctest::Approx(1.52));
  CHECK(square_cohort({0, 0}, 0.08)[0].q1 == doctest::Approx(-0.04));
  CHECK_THROWS_AS(square_cohort({0, 0}, 0.0), InvalidArgument);
}

TEST_CASE("mode labels") {
  // A printed label "ab" names the eigenstate pair in the paper's order.
  CHECK(mode_from_label("01") == Mode{1, 0});
  CHECK(mode_from_label("20") == Mode{0, 2});
  CHECK(label_from_mode(Mode{1, 0}) == "01");
  for (const auto* label : {"00", "01", "02", "10", "11", "20"}) CHECK(label_from_mode(mode_from_label(label)) == label);
  CHECK_THROWS(mode_from_label("1"));
  CHECK_THROWS(mode_from_label("a1"));
}

TEST_CASE("published phase sets") {
  const auto fn3 = published_phase_set("fn3");
  CHECK(fn3.theta("00") == 0.5442);
  CHECK(fn3.theta("01") == 2.3099);
  CHECK(fn3.theta("10") == 5.6703);
  CHECK(fn3.theta("11") == 4.5333);

  const auto fn4 = published_phase_set("fn4");
  CHECK(fn4.theta("01") == 1.486);
  CHECK(fn4.theta("11") == 3.8416);

  const auto fn5 = published_phase_set("fn5");
  CHECK(fn5.labels.size() == 6);
  CHECK(fn5.theta("20") == 2.6561);
  CHECK(published_phase_set("fn7").theta("02") == 4.3749);
  CHECK(published_phase_set("fn8").theta("11") == 0.439);

  CHECK(published_phase_sets().size() == 5);
  CHECK_THROWS_AS(published_phase_set("fn9"), InvalidArgument);
  CHECK_THROWS_AS(fn3.theta("22"), InvalidArgument);

  const auto spec = make_spec(fn3, 1.0);
  CHECK(spec.terms().size() == 4);
  CHECK(spec.terms().front().mode == Mode{0, 0});
  CHECK(spec.terms().front().amplitude == 1.0);

  const std::vector<std::pair<std::string, double>> amps = {{"01", 0.2}, {"10", 0.15}, {"11", 0.1}};
  const auto inhom = make_spec(published_phase_set("fn4"), amps);
  for (const auto& term : inhom.terms()) {
    if (term.mode == mode_from_label("10")) CHECK(term.amplitude == 0.15);
    if (term.mode == mode_from_label("10")) CHECK(term.phase == 2.6226);
  }
}

TEST_CASE("random phase sets") {
  const std::vector<Mode> modes = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  const auto a = random_phase_set(modes, 17);
  const auto b = random_phase_set(modes, 17);
  CHECK(a.thetas == b.thetas);
  CHECK(a.labels.front() == "00");
  CHECK(random_phase_set(modes, 18).thetas != a.thetas);
  for (double theta : a.thetas) {
    CHECK(theta >= 0.0);
    CHECK(theta < kPeriod);
  }
}

TEST_CASE("catalog") {
  const auto catalog = scenario_catalog();
  std::set<std::string> names;
  for (const auto& s : catalog) {
    CHECK(names.insert(s.name).second);
    CHECK_NOTHROW(s.validate());
  }
  for (const auto* name : {"ground-eps0", "fn3-eps1", "fn4-eps0.5", "fn4-eps0.25", "fn4-eps0.1", "fn4-eps0.05",
                           "fn4-inhom", "fn5-eps0.1", "fn7-cohorts", "fn8-inhom-cohorts", "fn3-eps1@500T",
                           "fn7-cohorts@500T"}) {
    CHECK(names.count(name) == 1);
  }

  const auto fn3 = find_scenario("fn3-eps1");
  CHECK(fn3.horizon_periods == 3000);
  CHECK(fn3.starts == canonical_points());
  CHECK(fn3.expected.confined == std::vector<int>{5, 7, 8, 9, 10});
  CHECK(fn3.expected.unconfined == std::vector<int>{1, 2, 3, 4, 6});

  const auto fn8 = find_scenario("fn8-inhom-cohorts");
  CHECK(fn8.cohort_centers.size() == 10);
  CHECK(fn8.spec.terms().size() == 6);

  CHECK_THROWS_AS(find_scenario("nope"), InvalidArgument);
}

TEST_CASE("truncation") {
  const auto full = find_scenario("fn7-cohorts");
  const auto short_run = truncated(full, 500);
  CHECK(short_run.name == "fn7-cohorts@500T");
  CHECK(short_run.horizon_periods == 500);
  CHECK(short_run.spec == full.spec);
  for (const auto& c : short_run.expected.cohorts) {
    CHECK_FALSE(c.max_distance.has_value());
    CHECK_FALSE(c.final_distance.has_value());
    REQUIRE(c.min_overlap.has_value());
    CHECK(*c.min_overlap <= 0.7);
  }
  CHECK(truncated(find_scenario("fn3-eps1"), 100).expected.max_label_mismatches == 2);
  CHECK_THROWS_AS(truncated(full, 0), InvalidArgument);
}

TEST_CASE("checkpoints") {
  CHECK(checkpoints_for(3000) == std::vector<double>{25, 100, 200, 500, 1000, 2000, 3000});
  CHECK(checkpoints_for(500) == std::vector<double>{25, 100, 200, 500});
  CHECK(checkpoints_for(100) == std::vector<double>{25, 50, 75, 100});
  CHECK(checkpoints_for(10).size() == 4);
}

TEST_CASE("scenario documents") {
  for (const auto* name : {"fn3-eps1", "fn4-inhom", "fn7-cohorts", "fn4-eps0.25@500T"}) {
    const auto s = find_scenario(name);
    const auto text = s.to_text();
    const auto back = Scenario::from_text(text);
    CHECK(back.to_text() == text);
    CHECK(back.spec == s.spec);
    CHECK(back.starts == s.starts);
    CHECK(back.expected.annular == s.expected.annular);
  }

  const auto seeded = Scenario::from_text(
      "name = seeded\nmodes = 0:0 1:0 0:1 1:1\nepsilon = 1 0.5 0.5 0.5\nphase_seed = 9\nstarts = 0.5,0 -0.5,0\n"
      "horizon_periods = 4\n");
  CHECK(seeded.phase_source == "seed:9");
  CHECK(seeded.starts.size() == 2);
  CHECK(Scenario::from_text(seeded.to_text()).spec == seeded.spec);

  CHECK_THROWS(Scenario::from_text("name = x\nmodes = 0:0\nepsilon = 1\ntheta = 0\nstarts = 9,0\nhorizon_periods = 4\n"));
  CHECK_THROWS(Scenario::from_text("name = x\nmodes = 0:0\nepsilon = 1\ntheta = 0\nstarts = 0,0\nhorizon_periods = 0\n"));
  CHECK_THROWS(Scenario::from_text("name = x\nhorizon_periods = 4\n"));
}

TEST_CASE("run a stationary scenario") {
  const auto scenario = truncated(find_scenario("ground-eps0"), 100);
  RunOptions options;
  options.workers = 2;
  const auto dir = scratch("ground");
  const auto summary = run_scenario(scenario, options, dir);
  CHECK(summary.expectations_met());
  CHECK(summary.integration_failures == 0);

  const auto& report = summary.report;
  REQUIRE(report["starts"].size() == 10);
  for (const auto& start : report["starts"]) {
    CHECK(start["verdict"]["label"] == "Confined");
    CHECK(start["visited_cells"] == 1);
    for (const auto& w : start["bounding_box"]["widths"]) CHECK(w.get<double>() == 0.0);
  }
  const auto base = dir / scenario.name;
  CHECK(fs::exists(base / "summary.json"));
  CHECK(fs::exists(base / "scenario.txt"));
  CHECK(fs::exists(base / "start-01.csv"));
  CHECK(fs::exists(base / "start-10.svg"));
  CHECK(Scenario::from_text(slurp(base / "scenario.txt")).spec == scenario.spec);

  // Same inputs, same bytes.
  const auto again_dir = scratch("ground-again");
  options.workers = 1;
  run_scenario(scenario, options, again_dir);
  for (const auto* file : {"summary.json", "start-03.csv", "start-03.svg"}) {
    CHECK(slurp(base / file) == slurp(again_dir / scenario.name / file));
  }
  fs::remove_all(dir);
  fs::remove_all(again_dir);
}

TEST_CASE("expectation mismatches are counted") {
  auto scenario = truncated(find_scenario("fn3-eps1"), 25);
  scenario.name = "flipped";
  scenario.expected = {};
  scenario.expected.confined = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  scenario.starts = canonical_points();
  RunOptions options;
  options.write_csv = false;
  options.write_svg = false;
  const auto dir = scratch("flipped");
  const auto summary = run_scenario(scenario, options, dir);
  CHECK(summary.report["expectation_failures"].get<int>() == summary.expectation_failures);
  CHECK(summary.report.contains("expectations"));
  CHECK_FALSE(fs::exists(dir / "flipped" / "start-01.csv"));
  fs::remove_all(dir);
}

TEST_CASE("concurrent integration matches serial") {
  const auto spec = make_spec(published_phase_set("fn3"), 1.0);
  const auto starts = canonical_points();
  const auto serial = integrate_many(spec, starts, 2 * kPeriod, {}, 1);
  const auto parallel = integrate_many(spec, starts, 2 * kPeriod, {}, 4);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t k = 0; k < serial.size(); ++k) CHECK(serial[k].samples == parallel[k].samples);
}
