#include "pilotwave/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "pilotwave/errors.hpp"
#include "pilotwave/ensemble.hpp"
#include "pilotwave/plot.hpp"
#include "pilotwave/text.hpp"
#include "pilotwave/version.hpp"

namespace pilotwave {

std::vector<Point> canonical_points() {
  return {{1.5, 1.5},  {1.5, -1.5}, {-1.5, 1.5}, {-1.5, -1.5}, {0.5, 0.0},
          {0.0, -0.5}, {-0.5, 0.0}, {0.0, 0.5},  {0.25, 0.25}, {0.25, -0.25}};
}

std::vector<Point> square_cohort(Point center, double edge) {
  if (!(edge > 0.0 && std::isfinite(edge))) throw InvalidArgument("cohort edge must be positive");
  const double h = edge / 2.0;
  const double q = edge / 4.0;
  const std::vector<Point> offsets = {{-h, h}, {-h, 0}, {-h, -h}, {0, -h}, {h, -h}, {h, 0}, {h, h},
                                      {0, h},  {-q, q}, {-q, -q}, {q, -q}, {q, q},  {0, 0}};
  std::vector<Point> out;
  out.reserve(offsets.size());
  for (const auto& o : offsets) out.push_back({center.q1 + o.q1, center.q2 + o.q2});
  return out;
}

Mode mode_from_label(std::string_view label) {
  if (label.size() != 2 || label[0] < '0' || label[0] > '9' || label[1] < '0' || label[1] > '9') {
    throw InvalidArgument("mode label must be two digits: '" + std::string(label) + "'");
  }
  return Mode{label[1] - '0', label[0] - '0'};
}

std::string label_from_mode(Mode mode) {
  if (mode.m < 0 || mode.m > 9 || mode.n < 0 || mode.n > 9) {
    throw InvalidArgument("mode " + to_string(mode) + " has no two-digit label");
  }
  return std::string{static_cast<char>('0' + mode.n), static_cast<char>('0' + mode.m)};
}

double PhaseSet::theta(std::string_view label) const {
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (labels[k] == label) return thetas[k];
  }
  throw InvalidArgument("phase set " + name + " has no label " + std::string(label));
}

std::vector<PhaseSet> published_phase_sets() {
  const std::vector<std::string> four = {"00", "01", "10", "11"};
  const std::vector<std::string> six = {"00", "01", "02", "10", "11", "20"};
  return {
      {"fn3", four, {0.5442, 2.3099, 5.6703, 4.5333}},
      {"fn4", four, {4.8157, 1.486, 2.6226, 3.8416}},
      {"fn5", six, {4.2065, 0.1803, 2.0226, 5.5521, 3.3361, 2.6561}},
      {"fn7", six, {1.2434, 4.411, 4.3749, 4.2427, 1.5574, 5.7796}},
      {"fn8", six, {4.0857, 0.2194, 4.6059, 1.2201, 0.439, 4.0563}},
  };
}

PhaseSet published_phase_set(std::string_view name) {
  for (auto& set : published_phase_sets()) {
    if (set.name == name) return set;
  }
  throw InvalidArgument("unknown phase set: " + std::string(name));
}

PhaseSet random_phase_set(std::span<const Mode> modes, std::uint64_t seed) {
  PhaseSet set;
  set.name = "seed:" + std::to_string(seed);
  set.labels.push_back("00");
  for (const auto& mode : modes) {
    if (mode == Mode{0, 0}) continue;
    const auto label = label_from_mode(mode);
    if (std::find(set.labels.begin(), set.labels.end(), label) != set.labels.end()) {
      throw InvalidArgument("duplicate mode " + to_string(mode));
    }
    set.labels.push_back(label);
  }
  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k < set.labels.size(); ++k) {
    set.thetas.push_back(std::fmod(canonical_number(kPeriod * uniform01(rng)), kPeriod));
  }
  return set;
}

WaveFunctionSpec make_spec(const PhaseSet& phases, double epsilon) {
  std::vector<std::pair<std::string, double>> amplitudes;
  for (const auto& label : phases.labels) {
    if (label != "00") amplitudes.emplace_back(label, epsilon);
  }
  return make_spec(phases, amplitudes);
}

WaveFunctionSpec make_spec(const PhaseSet& phases, std::span<const std::pair<std::string, double>> amplitudes) {
  if (phases.labels.size() != phases.thetas.size()) throw InvalidArgument("phase set is malformed");
  std::vector<Term> terms;
  for (std::size_t k = 0; k < phases.labels.size(); ++k) {
    const auto& label = phases.labels[k];
    double amplitude = 0.0;
    if (label == "00") {
      amplitude = 1.0;
    } else {
      auto it = std::find_if(amplitudes.begin(), amplitudes.end(), [&](const auto& a) { return a.first == label; });
      if (it == amplitudes.end()) throw InvalidArgument("no amplitude for mode label " + label);
      amplitude = it->second;
    }
    terms.push_back({mode_from_label(label), amplitude, phases.thetas[k]});
  }
  for (const auto& [label, value] : amplitudes) {
    (void)value;
    if (std::find(phases.labels.begin(), phases.labels.end(), label) == phases.labels.end()) {
      throw InvalidArgument("amplitude given for label " + label + " that has no phase");
    }
  }
  return WaveFunctionSpec(std::move(terms));
}

bool Expectation::empty() const {
  return confined.empty() && unconfined.empty() && annular.empty() && small.empty() && cohorts.empty();
}

void Scenario::validate() const {
  if (name.empty()) throw InvalidArgument("scenario needs a name");
  if (name.find_first_of(" \t\n/\\") != std::string::npos) {
    throw InvalidArgument("scenario name must not contain whitespace or slashes: " + name);
  }
  if (horizon_periods < 1) throw InvalidArgument("horizon must be a positive number of periods");
  if (starts.empty() && cohort_centers.empty()) throw InvalidArgument("scenario " + name + " has nothing to run");
  if (!(cohort_edge > 0.0)) throw InvalidArgument("cohort edge must be positive");
  for (const auto& p : starts) {
    if (!(std::abs(p.q1) < kDomainHalfWidth && std::abs(p.q2) < kDomainHalfWidth)) {
      throw InvalidArgument("scenario " + name + ": start " + format_point(p.q1, p.q2) + " lies outside the domain");
    }
  }
  const int n = static_cast<int>(starts.size());
  auto check_indices = [&](const std::vector<int>& indices, const char* what) {
    for (int i : indices) {
      if (i < 1 || i > n) {
        throw InvalidArgument("scenario " + name + ": expected " + what + " start " + std::to_string(i) +
                              " does not exist");
      }
    }
  };
  check_indices(expected.confined, "confined");
  check_indices(expected.unconfined, "unconfined");
  check_indices(expected.annular, "annular");
  check_indices(expected.small, "small");
  for (int i : expected.confined) {
    if (std::find(expected.unconfined.begin(), expected.unconfined.end(), i) != expected.unconfined.end()) {
      throw InvalidArgument("scenario " + name + ": start " + std::to_string(i) + " expected both ways");
    }
  }
  for (const auto& c : expected.cohorts) {
    if (std::find(cohort_centers.begin(), cohort_centers.end(), c.center) == cohort_centers.end()) {
      throw InvalidArgument("scenario " + name + ": cohort expectation at " + format_point(c.center.q1, c.center.q2) +
                            " has no cohort");
    }
  }
}

namespace {

std::string join_points(const std::vector<Point>& points) {
  std::string out;
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (k > 0) out += ' ';
    out += format_point(points[k].q1, points[k].q2);
  }
  return out;
}

std::vector<Point> parse_points(std::string_view text) {
  if (trim(text) == "canonical") return canonical_points();
  std::vector<Point> out;
  for (auto token : split_ws(text)) {
    auto [x, y] = parse_point(token);
    out.push_back({x, y});
  }
  return out;
}

std::string join_indices(const std::vector<int>& indices) {
  std::string out;
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (k > 0) out += ' ';
    out += std::to_string(indices[k]);
  }
  return out;
}

std::vector<int> parse_indices(std::string_view text) {
  std::vector<int> out;
  for (auto token : split_ws(text)) out.push_back(static_cast<int>(parse_integer(token)));
  return out;
}

std::string render_cohorts(const std::vector<Expectation::Cohort>& cohorts) {
  std::string out;
  for (std::size_t k = 0; k < cohorts.size(); ++k) {
    const auto& c = cohorts[k];
    if (k > 0) out += " ; ";
    out += format_point(c.center.q1, c.center.q2);
    if (c.max_distance) {
      out += " max=" + format_number(*c.max_distance) + " rel_tol=" + format_number(c.max_distance_rel_tol);
    }
    if (c.final_distance) {
      out += " final=" + format_number(*c.final_distance) + " factor=" + format_number(c.final_distance_factor);
    }
    if (c.min_overlap) out += " overlap=" + format_number(*c.min_overlap);
  }
  return out;
}

std::vector<Expectation::Cohort> parse_cohorts(std::string_view text) {
  std::vector<Expectation::Cohort> out;
  for (auto entry : split(text, ';')) {
    auto tokens = split_ws(entry);
    if (tokens.empty()) continue;
    Expectation::Cohort c;
    auto [x, y] = parse_point(tokens[0]);
    c.center = {x, y};
    for (std::size_t k = 1; k < tokens.size(); ++k) {
      const auto eq = tokens[k].find('=');
      if (eq == std::string_view::npos) throw ParseError("cohort expectation field without '=': " + std::string(tokens[k]));
      const auto key = tokens[k].substr(0, eq);
      const double value = parse_number(tokens[k].substr(eq + 1));
      if (key == "max") {
        c.max_distance = value;
      } else if (key == "rel_tol") {
        c.max_distance_rel_tol = value;
      } else if (key == "final") {
        c.final_distance = value;
      } else if (key == "factor") {
        c.final_distance_factor = value;
      } else if (key == "overlap") {
        c.min_overlap = value;
      } else {
        throw ParseError("unknown cohort expectation field: " + std::string(key));
      }
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::string Scenario::to_text() const {
  KeyValueText doc;
  doc.set("name", name);
  if (!description.empty()) doc.set("description", description);
  auto spec_doc = KeyValueText::parse(spec.serialize());
  for (const auto& [k, v] : spec_doc.entries()) doc.set(k, v);
  doc.set("phase_source", phase_source.empty() ? "explicit" : phase_source);
  doc.set("starts", join_points(starts));
  doc.set("horizon_periods", std::to_string(horizon_periods));
  if (!cohort_centers.empty()) {
    doc.set("cohort_centers", join_points(cohort_centers));
    doc.set("cohort_edge", format_number(cohort_edge));
  }
  if (!expected.confined.empty()) doc.set("expected_confined", join_indices(expected.confined));
  if (!expected.unconfined.empty()) doc.set("expected_unconfined", join_indices(expected.unconfined));
  if (!expected.confined.empty() || !expected.unconfined.empty()) {
    doc.set("max_label_mismatches", std::to_string(expected.max_label_mismatches));
  }
  if (!expected.annular.empty()) {
    doc.set("expected_annular", join_indices(expected.annular));
    doc.set("annulus_inner_radius", format_number(expected.annulus_inner_radius));
    doc.set("annulus_max_width", format_number(expected.annulus_max_width));
  }
  if (!expected.small.empty()) {
    doc.set("expected_small", join_indices(expected.small));
    doc.set("small_max_coverage", format_number(expected.small_max_coverage));
  }
  if (!expected.cohorts.empty()) doc.set("expected_cohorts", render_cohorts(expected.cohorts));
  return doc.render();
}

Scenario Scenario::from_text(std::string_view text) {
  const auto doc = KeyValueText::parse(text);
  Scenario s;
  s.name = doc.at("name");
  s.description = doc.get_or("description", "");
  s.phase_source = doc.get_or("phase_source", "explicit");

  if (doc.contains("theta")) {
    s.spec = WaveFunctionSpec::parse("modes = " + doc.at("modes") + "\nepsilon = " + doc.at("epsilon") +
                                     "\ntheta = " + doc.at("theta") + "\n");
  } else if (doc.contains("phase_seed")) {
    const auto seed = static_cast<std::uint64_t>(parse_integer(doc.at("phase_seed")));
    std::vector<Mode> modes;
    for (auto token : split_ws(doc.at("modes"))) modes.push_back(parse_mode(token));
    const auto eps_tokens = split_ws(doc.at("epsilon"));
    if (eps_tokens.size() != modes.size()) throw ParseError("epsilon list does not match modes");
    if (modes.empty() || modes.front() != Mode{0, 0}) throw ParseError("modes must start with the ground state 0:0");
    auto phases = random_phase_set(std::span<const Mode>(modes).subspan(1), seed);
    std::vector<Term> terms;
    for (std::size_t k = 0; k < modes.size(); ++k) {
      terms.push_back({modes[k], parse_number(eps_tokens[k]), phases.theta(label_from_mode(modes[k]))});
    }
    s.spec = WaveFunctionSpec(std::move(terms));
    s.phase_source = "seed:" + std::to_string(seed);
  } else {
    throw ParseError("scenario needs either theta or phase_seed");
  }

  s.starts = parse_points(doc.get_or("starts", ""));
  s.horizon_periods = static_cast<int>(parse_integer(doc.get_or("horizon_periods", "3000")));
  s.cohort_centers = parse_points(doc.get_or("cohort_centers", ""));
  s.cohort_edge = parse_number(doc.get_or("cohort_edge", "0.04"));
  s.expected.confined = parse_indices(doc.get_or("expected_confined", ""));
  s.expected.unconfined = parse_indices(doc.get_or("expected_unconfined", ""));
  s.expected.max_label_mismatches = static_cast<int>(parse_integer(doc.get_or("max_label_mismatches", "0")));
  s.expected.annular = parse_indices(doc.get_or("expected_annular", ""));
  s.expected.annulus_inner_radius = parse_number(doc.get_or("annulus_inner_radius", "1"));
  s.expected.annulus_max_width = parse_number(doc.get_or("annulus_max_width", "1.5"));
  s.expected.small = parse_indices(doc.get_or("expected_small", ""));
  s.expected.small_max_coverage = parse_number(doc.get_or("small_max_coverage", "0.25"));
  s.expected.cohorts = parse_cohorts(doc.get_or("expected_cohorts", ""));
  s.validate();
  return s;
}

namespace {

std::vector<std::pair<std::string, double>> amplitudes(std::initializer_list<std::pair<const char*, double>> list) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& [label, value] : list) out.emplace_back(label, value);
  return out;
}

std::vector<int> range(int first, int last) {
  std::vector<int> out;
  for (int i = first; i <= last; ++i) out.push_back(i);
  return out;
}

std::string tag(double epsilon) { return "eps" + format_number(epsilon); }

std::vector<Scenario> full_horizon_catalog() {
  std::vector<Scenario> out;
  const auto points = canonical_points();

  {
    Scenario s;
    s.name = "ground-eps0";
    s.description = "four-mode fn3 phases with every excited amplitude zero; stationary control";
    s.spec = make_spec(published_phase_set("fn3"), 0.0);
    s.phase_source = "fn3";
    s.starts = points;
    s.expected.confined = range(1, 10);
    out.push_back(s);
  }
  {
    Scenario s;
    s.name = "fn3-eps1";
    s.description = "four modes, equal weights, fn3 phases";
    s.spec = make_spec(published_phase_set("fn3"), 1.0);
    s.phase_source = "fn3";
    s.starts = points;
    s.expected.confined = {5, 7, 8, 9, 10};
    s.expected.unconfined = {1, 2, 3, 4, 6};
    out.push_back(s);
  }
  {
    Scenario s;
    s.name = "fn4-eps0.5";
    s.description = "four modes, fn4 phases, epsilon 0.5";
    s.spec = make_spec(published_phase_set("fn4"), 0.5);
    s.phase_source = "fn4";
    s.starts = points;
    s.expected.unconfined = range(1, 4);
    s.expected.confined = range(5, 10);
    out.push_back(s);
  }
  for (double eps : {0.25, 0.1, 0.05}) {
    Scenario s;
    s.name = "fn4-" + tag(eps);
    s.description = "four modes, fn4 phases, epsilon " + format_number(eps) + "; outer points orbit in rings";
    s.spec = make_spec(published_phase_set("fn4"), eps);
    s.phase_source = "fn4";
    s.starts = points;
    s.expected.annular = range(1, 4);
    s.expected.small = range(5, 10);
    if (eps > 0.2) {
      // Wide outer rings that still leave the center empty.
      s.expected.annulus_inner_radius = 0.75;
      s.expected.annulus_max_width = 2.5;
    }
    out.push_back(s);
  }
  {
    Scenario s;
    s.name = "fn4-inhom";
    s.description = "four modes, fn4 phases, unequal weights 0.2 / 0.15 / 0.1";
    s.spec = make_spec(published_phase_set("fn4"), amplitudes({{"01", 0.2}, {"10", 0.15}, {"11", 0.1}}));
    s.phase_source = "fn4";
    s.starts = points;
    s.expected.annular = {3};
    s.expected.small = {7};
    out.push_back(s);
  }
  {
    Scenario s;
    s.name = "fn5-eps0.1";
    s.description = "six modes, fn5 phases, epsilon 0.1";
    s.spec = make_spec(published_phase_set("fn5"), 0.1);
    s.phase_source = "fn5";
    s.starts = points;
    // Thicker rings than the four-mode case, still far from the bulk.
    s.expected.annular = range(1, 4);
    s.expected.annulus_max_width = 3.0;
    s.expected.small = range(1, 10);
    s.expected.small_max_coverage = 0.6;
    out.push_back(s);
  }
  {
    Scenario s;
    s.name = "fn7-cohorts";
    s.description = "six modes, fn7 phases, epsilon 0.1; 13-point squares at the canonical points";
    s.spec = make_spec(published_phase_set("fn7"), 0.1);
    s.phase_source = "fn7";
    s.cohort_centers = points;
    Expectation::Cohort c;
    c.center = {1.5, 1.5};
    c.max_distance = 1.47;
    c.final_distance = 0.08;
    c.min_overlap = 0.8;
    s.expected.cohorts.push_back(c);
    out.push_back(s);
  }
  {
    Scenario s;
    s.name = "fn8-inhom-cohorts";
    s.description = "six modes, fn8 phases, unequal weights 0.11 to 0.15; 13-point squares at the canonical points";
    s.spec = make_spec(published_phase_set("fn8"),
                       amplitudes({{"01", 0.11}, {"02", 0.12}, {"10", 0.13}, {"11", 0.14}, {"20", 0.15}}));
    s.phase_source = "fn8";
    s.cohort_centers = points;
    Expectation::Cohort c;
    c.center = {0.25, 0.25};
    c.min_overlap = 0.8;
    s.expected.cohorts.push_back(c);
    out.push_back(s);
  }
  return out;
}

}  // namespace

Scenario truncated(const Scenario& scenario, int horizon_periods) {
  if (horizon_periods < 1) throw InvalidArgument("horizon must be a positive number of periods");
  Scenario s = scenario;
  const auto at = s.name.find('@');
  s.name = (at == std::string::npos ? s.name : s.name.substr(0, at)) + "@" + std::to_string(horizon_periods) + "T";
  s.horizon_periods = horizon_periods;
  if (horizon_periods < scenario.horizon_periods) {
    if (!s.expected.confined.empty() || !s.expected.unconfined.empty()) s.expected.max_label_mismatches = 2;
    for (auto& c : s.expected.cohorts) {
      c.max_distance.reset();
      c.final_distance.reset();
      if (c.min_overlap) c.min_overlap = std::min(*c.min_overlap, 0.7);
    }
    std::erase_if(s.expected.cohorts, [](const Expectation::Cohort& c) { return !c.min_overlap; });
  }
  return s;
}

std::vector<Scenario> scenario_catalog() {
  auto out = full_horizon_catalog();
  const std::size_t n = out.size();
  for (std::size_t k = 0; k < n; ++k) {
    if (out[k].horizon_periods != 3000) continue;
    out.push_back(truncated(out[k], 500));
    out.push_back(truncated(out[k], 100));
  }
  return out;
}

Scenario find_scenario(std::string_view name) {
  for (auto& s : scenario_catalog()) {
    if (s.name == name) return s;
  }
  throw InvalidArgument("unknown scenario: " + std::string(name));
}

std::vector<double> checkpoints_for(int horizon_periods) {
  if (horizon_periods < 1) throw InvalidArgument("horizon must be a positive number of periods");
  std::vector<double> out;
  for (double p : default_checkpoint_periods()) {
    if (p <= horizon_periods) out.push_back(p);
  }
  if (out.size() >= 4 && out.back() == horizon_periods) return out;
  if (out.size() >= 3 && out.back() < horizon_periods) {
    out.push_back(horizon_periods);
    return out;
  }
  const double h = horizon_periods;
  return {h / 4.0, h / 2.0, 3.0 * h / 4.0, h};
}

std::vector<Trajectory> integrate_many(const WaveFunctionSpec& spec, std::span<const Point> starts, double horizon,
                                       const IntegratorConfig& config, unsigned workers) {
  std::vector<Trajectory> out(starts.size());
  std::vector<std::exception_ptr> errors(starts.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < starts.size(); i = next++) {
      try {
        out[i] = integrate_trajectory(spec, starts[i], horizon, config);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(workers == 0 ? std::thread::hardware_concurrency() : workers,
                                                     static_cast<unsigned>(starts.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned k = 1; k < n; ++k) pool.emplace_back(work);
    work();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

namespace {

std::string index_name(const char* prefix, std::size_t index) {
  std::string digits = std::to_string(index);
  if (digits.size() < 2) digits = "0" + digits;
  return std::string(prefix) + digits;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("write failed for " + path.string());
}

nlohmann::json failure_json(const IntegrationFailure& f) {
  return {{"kind", to_string(f.kind)},
          {"period", f.t / kPeriod},
          {"position", {f.position.q1, f.position.q2}},
          {"message", f.message}};
}

nlohmann::json point_json(Point p) { return nlohmann::json::array({p.q1, p.q2}); }

std::string provenance(const Scenario& scenario, const IntegratorConfig& config) {
  return "pilotwave " + std::string(kVersion) + "\n" + scenario.spec.serialize() +
         "spec_digest = " + scenario.spec.fingerprint() + "\n" + config.to_text().render("config.");
}

int stride_for(const RunOptions& options, int horizon_periods) {
  if (options.svg_stride > 0) return options.svg_stride;
  return horizon_periods >= 1000 ? 3 : 1;
}

struct StartResult {
  nlohmann::json json;
  std::optional<Confinement> label;
  std::optional<AnnulusMetrics> annulus;
  std::optional<double> coverage;
};

}  // namespace

ScenarioSummary run_scenario(const Scenario& scenario, const RunOptions& options,
                             const std::filesystem::path& out_dir) {
  scenario.validate();
  options.integrator.validate();
  options.grid.validate();
  const auto dir = out_dir / scenario.name;
  std::filesystem::create_directories(dir);

  const double horizon = scenario.horizon();
  const auto checkpoint_periods =
      options.checkpoint_periods.empty() ? checkpoints_for(scenario.horizon_periods) : options.checkpoint_periods;
  const auto checkpoints = periods_to_times(checkpoint_periods);
  const auto significant = born_significant_cells(scenario.spec, options.grid);
  const int stride = stride_for(options, scenario.horizon_periods);
  const std::string origin = provenance(scenario, options.integrator);

  ScenarioSummary summary;
  auto& report = summary.report;
  report["scenario"] = scenario.name;
  report["description"] = scenario.description;
  report["tool_version"] = kVersion;
  report["spec"] = {{"text", scenario.spec.serialize()},
                    {"digest", scenario.spec.fingerprint()},
                    {"phase_source", scenario.phase_source}};
  report["horizon_periods"] = scenario.horizon_periods;
  report["checkpoint_periods"] = checkpoint_periods;
  {
    nlohmann::json cfg;
    const auto doc = options.integrator.to_text();
    for (const auto& [k, v] : doc.entries()) cfg[k] = parse_number(v);
    report["integrator"] = cfg;
  }
  report["thresholds"] = {{"tail_growth", options.thresholds.tail_growth},
                          {"support_fraction", options.thresholds.support_fraction},
                          {"support_extent", options.thresholds.support_extent},
                          {"annulus_inner_radius", scenario.expected.annulus_inner_radius},
                          {"annulus_max_width", scenario.expected.annulus_max_width},
                          {"small_max_coverage", scenario.expected.small_max_coverage}};
  report["grid"] = {{"half_width", options.grid.half_width}, {"resolution", options.grid.resolution}};
  write_file(dir / "scenario.txt", scenario.to_text());

  // Individual starts.
  std::vector<StartResult> results;
  {
    const auto trajectories =
        integrate_many(scenario.spec, scenario.starts, horizon, options.integrator, options.workers);
    nlohmann::json starts = nlohmann::json::array();
    for (std::size_t k = 0; k < trajectories.size(); ++k) {
      const auto& traj = trajectories[k];
      StartResult r;
      auto& j = r.json;
      j["index"] = k + 1;
      j["start"] = point_json(traj.start);
      j["complete"] = traj.complete();
      j["failure"] = traj.failure ? failure_json(*traj.failure) : nlohmann::json(nullptr);
      j["final"] = point_json(traj.final_position());
      j["steps_taken"] = traj.steps_taken;
      j["steps_rejected"] = traj.steps_rejected;
      j["min_density_seen"] = traj.min_density_seen;
      std::string verdict_text = "Indeterminate";
      if (traj.complete()) {
        const auto series = bounding_box_series(traj, checkpoints);
        const auto verdict = classify_confinement(series, options.thresholds);
        const auto grid = occupancy_grid(traj, options.grid);
        const auto annulus = annulus_metrics(grid, scenario.expected.annulus_inner_radius);
        r.label = verdict.label;
        r.annulus = annulus;
        r.coverage = coverage_fraction(grid, significant);
        verdict_text = to_string(verdict.label);
        j["bounding_box"] = to_json(series);
        j["verdict"] = to_json(verdict);
        j["coverage"] = *r.coverage;
        j["visited_cells"] = grid.visited_cells();
        j["annulus"] = to_json(annulus);
        try {
          j["angular_drift_rate"] = angular_drift_rate(traj);
        } catch (const InvalidArgument&) {
          j["angular_drift_rate"] = nullptr;
        }
      } else {
        j["verdict"] = {{"label", "Indeterminate"}};
      }
      const std::string stem = index_name("start-", k + 1);
      if (options.write_csv) {
        std::ostringstream csv;
        write_trajectory_csv(csv, traj, scenario.spec, options.integrator);
        write_file(dir / (stem + ".csv"), csv.str());
        j["csv"] = stem + ".csv";
      }
      if (options.write_svg) {
        PlotSpec plot;
        plot.stride = stride;
        plot.description = origin;
        plot.annotations = {scenario.name + "  start " + std::to_string(k + 1) + " (" +
                                format_point(traj.start.q1, traj.start.q2) + ")  " +
                                std::to_string(scenario.horizon_periods) + "T",
                            "verdict " + verdict_text + "  spec " + scenario.spec.fingerprint()};
        const Trajectory* one = &traj;
        write_file(dir / (stem + ".svg"), trajectory_svg(std::span<const Trajectory>(one, 1), plot));
        j["svg"] = stem + ".svg";
      }
      if (!traj.complete()) ++summary.integration_failures;
      starts.push_back(j);
      results.push_back(std::move(r));
    }
    report["starts"] = starts;
  }

  // Cohorts, one batch each to bound memory.
  std::map<std::pair<double, double>, CohortReport> cohort_reports;
  {
    nlohmann::json cohorts = nlohmann::json::array();
    for (std::size_t c = 0; c < scenario.cohort_centers.size(); ++c) {
      const Point center = scenario.cohort_centers[c];
      const auto members = square_cohort(center, scenario.cohort_edge);
      const auto trajectories = integrate_many(scenario.spec, members, horizon, options.integrator, options.workers);
      nlohmann::json j;
      j["index"] = c + 1;
      j["center"] = point_json(center);
      nlohmann::json failures = nlohmann::json::array();
      for (std::size_t m = 0; m < trajectories.size(); ++m) {
        if (!trajectories[m].complete()) {
          failures.push_back({{"member", m + 1}, {"failure", failure_json(*trajectories[m].failure)}});
          ++summary.integration_failures;
        }
      }
      j["failures"] = failures;
      if (failures.empty()) {
        auto analysis = cohort_analysis(trajectories, options.grid);
        j["report"] = to_json(analysis);
        cohort_reports[{center.q1, center.q2}] = std::move(analysis);
      }
      const std::string stem = index_name("cohort-", c + 1);
      if (options.write_cohort_csv) {
        for (std::size_t m = 0; m < trajectories.size(); ++m) {
          std::ostringstream csv;
          write_trajectory_csv(csv, trajectories[m], scenario.spec, options.integrator);
          write_file(dir / (stem + index_name("-member-", m + 1) + ".csv"), csv.str());
        }
      }
      if (options.write_svg) {
        PlotSpec plot;
        plot.stride = stride;
        plot.stroke_width = 0.4;
        plot.description = origin;
        plot.annotations = {scenario.name + "  cohort " + std::to_string(c + 1) + " at (" +
                                format_point(center.q1, center.q2) + ") edge " + format_number(scenario.cohort_edge) +
                                "  " + std::to_string(scenario.horizon_periods) + "T",
                            "spec " + scenario.spec.fingerprint()};
        write_file(dir / (stem + ".svg"), trajectory_svg(trajectories, plot));
        j["svg"] = stem + ".svg";
      }
      cohorts.push_back(j);
    }
    report["cohorts"] = cohorts;
  }

  // Expectations.
  nlohmann::json checks = nlohmann::json::array();
  if (options.check_expectations) {
    const auto& ex = scenario.expected;
    int mismatches = 0;
    auto label_check = [&](int index, Confinement expected) {
      const auto& r = results[static_cast<std::size_t>(index - 1)];
      const bool pass = r.label && *r.label == expected;
      if (!pass) ++mismatches;
      checks.push_back({{"check", "label"},
                        {"start", index},
                        {"expected", to_string(expected)},
                        {"actual", r.label ? to_string(*r.label) : "Indeterminate"},
                        {"pass", pass}});
    };
    for (int i : ex.confined) label_check(i, Confinement::Confined);
    for (int i : ex.unconfined) label_check(i, Confinement::Unconfined);
    if (!ex.confined.empty() || !ex.unconfined.empty()) {
      const bool pass = mismatches <= ex.max_label_mismatches;
      checks.push_back({{"check", "label_split"},
                        {"mismatches", mismatches},
                        {"allowed", ex.max_label_mismatches},
                        {"pass", pass}});
      if (!pass) ++summary.expectation_failures;
    }
    for (int i : ex.annular) {
      const auto& r = results[static_cast<std::size_t>(i - 1)];
      const bool pass = r.annulus && r.annulus->visits_inside_unit == 0 &&
                        r.annulus->radial_width < ex.annulus_max_width;
      checks.push_back({{"check", "annular"},
                        {"start", i},
                        {"inner_radius", ex.annulus_inner_radius},
                        {"max_width", ex.annulus_max_width},
                        {"actual", r.annulus ? to_json(*r.annulus) : nlohmann::json(nullptr)},
                        {"pass", pass}});
      if (!pass) ++summary.expectation_failures;
    }
    for (int i : ex.small) {
      const auto& r = results[static_cast<std::size_t>(i - 1)];
      const bool pass = r.coverage && *r.coverage <= ex.small_max_coverage;
      checks.push_back({{"check", "small"},
                        {"start", i},
                        {"max_coverage", ex.small_max_coverage},
                        {"actual", r.coverage ? nlohmann::json(*r.coverage) : nlohmann::json(nullptr)},
                        {"pass", pass}});
      if (!pass) ++summary.expectation_failures;
    }
    for (const auto& c : ex.cohorts) {
      auto it = cohort_reports.find({c.center.q1, c.center.q2});
      const CohortReport* cr = it == cohort_reports.end() ? nullptr : &it->second;
      auto record = [&](const char* what, nlohmann::json expected, nlohmann::json actual, bool pass) {
        checks.push_back({{"check", what},
                          {"center", point_json(c.center)},
                          {"expected", std::move(expected)},
                          {"actual", std::move(actual)},
                          {"pass", pass}});
        if (!pass) ++summary.expectation_failures;
      };
      if (c.max_distance) {
        const bool pass =
            cr && std::abs(cr->max_pairwise_distance - *c.max_distance) <= c.max_distance_rel_tol * *c.max_distance;
        record("cohort_max_distance", {{"target", *c.max_distance}, {"rel_tol", c.max_distance_rel_tol}},
               cr ? nlohmann::json(cr->max_pairwise_distance) : nlohmann::json(nullptr), pass);
      }
      if (c.final_distance) {
        const double lo = *c.final_distance / c.final_distance_factor;
        const double hi = *c.final_distance * c.final_distance_factor;
        std::optional<PairStatistics> best;
        if (cr) {
          for (const auto& p : cr->pairs) {
            if (p.final_distance >= lo && p.final_distance <= hi &&
                (!best || p.max_distance > best->max_distance)) {
              best = p;
            }
          }
        }
        nlohmann::json actual = nullptr;
        if (best) {
          actual = {{"pair", {best->a, best->b}},
                    {"final_distance", best->final_distance},
                    {"max_distance", best->max_distance}};
        }
        record("cohort_final_distance", {{"target", *c.final_distance}, {"factor", c.final_distance_factor}},
               actual, best.has_value());
      }
      if (c.min_overlap) {
        const bool pass = cr && cr->mean_overlap >= *c.min_overlap;
        record("cohort_overlap", {{"min", *c.min_overlap}},
               cr ? nlohmann::json(cr->mean_overlap) : nlohmann::json(nullptr), pass);
      }
    }
  }
  report["expectations"] = checks;
  report["expectation_failures"] = summary.expectation_failures;
  report["integration_failures"] = summary.integration_failures;
  report["expectations_met"] = summary.expectations_met();
  write_file(dir / "summary.json", report.dump(2) + "\n");
  return summary;
}

}  // namespace pilotwave
