#include "pilotwave/integrator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "pilotwave/version.hpp"

namespace pilotwave {

namespace {

using State = std::array<double, 2>;

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
// Difference between the 5th and embedded 4th order weights.
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// Dense output (Hairer & Wanner, contd5).
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

// Step-size controller.
constexpr double kSafety = 0.9;
constexpr double kBeta = 0.04;
constexpr double kExpo = 0.2 - kBeta * 0.75;
constexpr double kMinGrowth = 0.2;
constexpr double kMaxGrowth = 5.0;

struct Rhs {
  const Superposition& field;
  double node_guard;
  double min_density = std::numeric_limits<double>::infinity();

  State operator()(double t, const State& y) {
    auto s = field.flow(y[0], y[1], t, node_guard);
    min_density = std::min(min_density, s.density);
    return {s.velocity.v1, s.velocity.v2};
  }
};

// Sample grid t0 + dir * k * interval for k = 0..count.
struct SampleGrid {
  double t0 = 0.0;
  double interval = 0.0;
  long count = 0;
  std::vector<Sample>* out = nullptr;
  const ProgressFn* progress = nullptr;
  long per_period = 100;

  double time(long k, double dir) const { return t0 + dir * static_cast<double>(k) * interval; }
};

struct CoreResult {
  State y{};
  double t = 0.0;
  long steps = 0;
  long rejected = 0;
  double min_density = 0.0;
  std::optional<IntegrationFailure> failure;
};

IntegrationFailure make_failure(FailureKind kind, double t, const State& y, std::string message) {
  return {kind, t, {y[0], y[1]}, std::move(message)};
}

CoreResult run(const Superposition& field, const IntegratorConfig& cfg, const State& y0, double t0,
               double t1, SampleGrid* grid) {
  Rhs f{field, cfg.node_guard};
  CoreResult res;
  res.y = y0;
  res.t = t0;
  const double dir = t1 >= t0 ? 1.0 : -1.0;
  long next_sample = 1;

  auto emit = [&](long k, const State& y) {
    grid->out->push_back({grid->time(k, dir), y[0], y[1]});
    if (grid->progress && *grid->progress && k > 0 && k % grid->per_period == 0) (*grid->progress)(grid->time(k, dir));
  };

  State k1{};
  try {
    k1 = f(t0, y0);
  } catch (const NodeProximity& e) {
    res.min_density = e.density();
    res.failure = make_failure(FailureKind::NodeProximity, t0, y0, e.what());
    return res;
  }
  if (grid) emit(0, y0);
  if (t0 == t1) {
    res.min_density = f.min_density;
    return res;
  }

  double t = t0;
  State y = y0;
  double h = std::min({cfg.h_init, cfg.h_max, std::abs(t1 - t0)});
  double facold = 1e-4;
  bool last_rejected = false;
  std::optional<std::string> node_message;

  while (true) {
    const double remaining = std::abs(t1 - t);
    bool last = false;
    if (h >= remaining * (1.0 - 1e-12)) {
      h = remaining;
      last = true;
    }
    const double hs = dir * h;

    State k2{}, k3{}, k4{}, k5{}, k6{}, k7{}, y_new{}, tmp{};
    bool node_hit = false;
    try {
      for (int i = 0; i < 2; ++i) tmp[i] = y[i] + hs * a21 * k1[i];
      k2 = f(t + c2 * hs, tmp);
      for (int i = 0; i < 2; ++i) tmp[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
      k3 = f(t + c3 * hs, tmp);
      for (int i = 0; i < 2; ++i) tmp[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      k4 = f(t + c4 * hs, tmp);
      for (int i = 0; i < 2; ++i)
        tmp[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      k5 = f(t + c5 * hs, tmp);
      for (int i = 0; i < 2; ++i)
        tmp[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
      k6 = f(t + hs, tmp);
      for (int i = 0; i < 2; ++i)
        y_new[i] = y[i] + hs * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
      k7 = f(t + hs, y_new);
    } catch (const NodeProximity& e) {
      node_hit = true;
      node_message = e.what();
    }

    double err = 0.0;
    if (!node_hit) {
      for (int i = 0; i < 2; ++i) {
        const double e = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        const double scale = std::max(cfg.abstol, cfg.reltol * std::max(std::abs(y[i]), std::abs(y_new[i])));
        err = std::max(err, std::abs(e) / scale);
      }
    }

    if (!node_hit && err <= 1.0) {
      const double t_new = last ? t1 : t + hs;
      if (grid) {
        // Dense output on (t, t_new].
        std::array<State, 5> rc{};
        for (int i = 0; i < 2; ++i) {
          rc[0][i] = y[i];
          rc[1][i] = y_new[i] - y[i];
          rc[2][i] = hs * k1[i] - rc[1][i];
          rc[3][i] = rc[1][i] - hs * k7[i] - rc[2][i];
          rc[4][i] = hs * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
        }
        while (next_sample <= grid->count) {
          const double ts = grid->time(next_sample, dir);
          if (dir * (ts - t_new) > 0.0) break;
          if (next_sample == grid->count || ts == t_new) {
            emit(next_sample, y_new);
          } else {
            const double theta = (ts - t) / hs;
            const double theta1 = 1.0 - theta;
            State ys{};
            for (int i = 0; i < 2; ++i) {
              ys[i] = rc[0][i] + theta * (rc[1][i] + theta1 * (rc[2][i] + theta * (rc[3][i] + theta1 * rc[4][i])));
            }
            emit(next_sample, ys);
          }
          ++next_sample;
        }
      }
      ++res.steps;
      t = t_new;
      y = y_new;
      k1 = k7;
      if (last) break;

      // PI controller: current error with the previous accepted error.
      const double fac11 = std::pow(err, kExpo);
      double growth = 1.0 / std::clamp(fac11 / std::pow(facold, kBeta) / kSafety, 1.0 / kMaxGrowth, 1.0 / kMinGrowth);
      facold = std::max(err, 1e-4);
      if (last_rejected) growth = std::min(growth, 1.0);
      h = std::min(h * growth, cfg.h_max);
      last_rejected = false;
    } else {
      ++res.rejected;
      double shrink = 0.25;
      if (!node_hit) shrink = std::max(kMinGrowth, kSafety / std::pow(err, kExpo));
      h *= std::min(shrink, 1.0);
      last_rejected = true;
      if (h < cfg.h_min || t + dir * h == t) {
        res.y = y;
        res.t = t;
        res.min_density = f.min_density;
        if (node_hit) {
          res.failure = make_failure(FailureKind::NodeProximity, t, y, *node_message);
        } else {
          res.failure = make_failure(FailureKind::StepUnderflow, t, y,
                                     "step size underflow at t=" + format_number(t) + ", q=(" +
                                         format_point(y[0], y[1]) + ")");
        }
        return res;
      }
    }
  }
  res.y = y;
  res.t = t;
  res.min_density = f.min_density;
  return res;
}

void check_start(Point start) {
  if (!(std::abs(start.q1) <= kDomainHalfWidth && std::abs(start.q2) <= kDomainHalfWidth)) {
    throw InvalidArgument("start (" + format_point(start.q1, start.q2) + ") outside [-8,8]^2");
  }
}

}  // namespace

double distance(Point a, Point b) { return std::hypot(a.q1 - b.q1, a.q2 - b.q2); }

const char* to_string(FailureKind kind) {
  switch (kind) {
    case FailureKind::NodeProximity:
      return "node-proximity";
    case FailureKind::StepUnderflow:
      return "step-underflow";
  }
  return "unknown";
}

void IntegratorConfig::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(abstol)) throw InvalidArgument("abstol must be positive");
  if (!(std::isfinite(reltol) && reltol >= 0.0)) throw InvalidArgument("reltol must be non-negative");
  if (!positive(h_init) || !positive(h_min) || !positive(h_max)) {
    throw InvalidArgument("step bounds must be positive");
  }
  if (!(h_min <= h_init && h_init <= h_max)) throw InvalidArgument("need h_min <= h_init <= h_max");
  if (!positive(sample_interval)) throw InvalidArgument("sample_interval must be positive");
  if (!positive(node_guard)) throw InvalidArgument("node_guard must be positive");
}

KeyValueText IntegratorConfig::to_text() const {
  KeyValueText doc;
  doc.set("abstol", format_number(abstol));
  doc.set("reltol", format_number(reltol));
  doc.set("h_init", format_number(h_init));
  doc.set("h_min", format_number(h_min));
  doc.set("h_max", format_number(h_max));
  doc.set("sample_interval", format_number(sample_interval));
  doc.set("node_guard", format_number(node_guard));
  return doc;
}

IntegratorConfig IntegratorConfig::from_text(const KeyValueText& doc) {
  IntegratorConfig cfg;
  auto read = [&](const char* key, double& field) {
    if (doc.contains(key)) field = parse_number(doc.at(key));
  };
  read("abstol", cfg.abstol);
  read("reltol", cfg.reltol);
  read("h_init", cfg.h_init);
  read("h_min", cfg.h_min);
  read("h_max", cfg.h_max);
  read("sample_interval", cfg.sample_interval);
  read("node_guard", cfg.node_guard);
  cfg.validate();
  return cfg;
}

const Trajectory& Trajectory::require_complete() const {
  if (failure) throw IntegrationError(*failure);
  return *this;
}

Trajectory integrate_trajectory(const WaveFunctionSpec& spec, Point start, double horizon,
                                const IntegratorConfig& config, const ProgressFn& progress) {
  config.validate();
  check_start(start);
  if (!(std::isfinite(horizon) && horizon > 0.0)) throw InvalidArgument("horizon must be positive");
  const double ratio = horizon / config.sample_interval;
  const long count = std::lround(ratio);
  if (count < 1 || std::abs(ratio - static_cast<double>(count)) > 1e-6) {
    throw InvalidArgument("horizon must be a positive multiple of sample_interval");
  }

  Trajectory traj;
  traj.start = start;
  traj.spec_fingerprint = spec.fingerprint();
  traj.sample_interval = config.sample_interval;
  traj.horizon = horizon;
  traj.samples.reserve(static_cast<std::size_t>(count) + 1);

  SampleGrid grid;
  grid.t0 = 0.0;
  grid.interval = config.sample_interval;
  grid.count = count;
  grid.out = &traj.samples;
  grid.progress = &progress;
  grid.per_period = std::max(1L, std::lround(kPeriod / config.sample_interval));

  const double t1 = static_cast<double>(count) * config.sample_interval;
  auto res = run(spec.field(), config, {start.q1, start.q2}, 0.0, t1, &grid);
  traj.steps_taken = res.steps;
  traj.steps_rejected = res.rejected;
  traj.min_density_seen = res.min_density;
  traj.failure = std::move(res.failure);
  return traj;
}

AdvanceResult advance(const Superposition& field, Point start, double t0, double t1,
                      const IntegratorConfig& config) {
  config.validate();
  check_start(start);
  auto res = run(field, config, {start.q1, start.q2}, t0, t1, nullptr);
  return {{res.y[0], res.y[1]}, res.t, res.steps, res.rejected, res.min_density, std::move(res.failure)};
}

ConvergenceReport verify_convergence(const WaveFunctionSpec& spec, Point start, double horizon,
                                     double abstol, IntegratorConfig config) {
  ConvergenceReport report;
  report.abstol_coarse = abstol;
  report.abstol_fine = abstol / 10.0;

  config.abstol = report.abstol_coarse;
  auto coarse = advance(spec.field(), start, 0.0, horizon, config);
  if (coarse.failure) throw IntegrationError(*coarse.failure);
  config.abstol = report.abstol_fine;
  auto fine = advance(spec.field(), start, 0.0, horizon, config);
  if (fine.failure) throw IntegrationError(*fine.failure);

  report.final_coarse = coarse.position;
  report.final_fine = fine.position;
  report.final_separation = distance(coarse.position, fine.position);
  report.converged = report.final_separation <= kConvergenceDistance;
  return report;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const WaveFunctionSpec& spec,
                          const IntegratorConfig& config) {
  KeyValueText meta;
  meta.set("tool_version", kVersion);
  meta.set("spec_digest", spec.fingerprint());
  meta.set("start", format_point(traj.start.q1, traj.start.q2));
  meta.set("horizon", format_number(traj.horizon));
  meta.set("steps_taken", std::to_string(traj.steps_taken));
  meta.set("steps_rejected", std::to_string(traj.steps_rejected));
  meta.set("min_density_seen", format_number(traj.min_density_seen));
  meta.set("status", traj.failure ? std::string(to_string(traj.failure->kind)) : "complete");
  out << "# pilotwave trajectory\n";
  out << meta.render("# ");
  out << KeyValueText::parse(spec.serialize()).render("# spec.");
  out << config.to_text().render("# config.");
  out << "t,q1,q2\n";
  std::string line;
  for (const auto& s : traj.samples) {
    line = format_number(s.t);
    line += ',';
    line += format_number(s.q1);
    line += ',';
    line += format_number(s.q2);
    line += '\n';
    out << line;
  }
}

Trajectory read_trajectory_csv(std::istream& in) {
  Trajectory traj;
  KeyValueText meta;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    std::string_view view = trim(line);
    if (view.empty()) continue;
    if (view.front() == '#') {
      view.remove_prefix(1);
      auto eq = view.find('=');
      if (eq != std::string_view::npos) {
        meta.set(std::string(trim(view.substr(0, eq))), std::string(trim(view.substr(eq + 1))));
      }
      continue;
    }
    if (!header_seen) {
      if (view != "t,q1,q2") throw ParseError("trajectory CSV: expected header 't,q1,q2'");
      header_seen = true;
      continue;
    }
    auto cols = split(view, ',');
    if (cols.size() != 3) throw ParseError("trajectory CSV: expected 3 columns");
    traj.samples.push_back({parse_number(cols[0]), parse_number(cols[1]), parse_number(cols[2])});
  }
  if (!header_seen || traj.samples.empty()) throw ParseError("trajectory CSV: no samples");
  auto [q1, q2] = parse_point(meta.at("start"));
  traj.start = {q1, q2};
  traj.spec_fingerprint = meta.at("spec_digest");
  traj.horizon = parse_number(meta.at("horizon"));
  traj.sample_interval = parse_number(meta.at("config.sample_interval"));
  traj.steps_taken = parse_integer(meta.get_or("steps_taken", "0"));
  traj.steps_rejected = parse_integer(meta.get_or("steps_rejected", "0"));
  traj.min_density_seen = parse_number(meta.get_or("min_density_seen", "0"));
  return traj;
}

}  // namespace pilotwave
