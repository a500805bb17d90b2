#include "pilotwave/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <thread>

#include "pilotwave/version.hpp"

namespace pilotwave {

std::string InitialDistribution::name() const {
  switch (kind) {
    case InitialKind::GroundBorn:
      return "ground-born";
    case InitialKind::Born:
      return "born";
    case InitialKind::UniformDisk:
      return "uniform-disk:" + format_number(radius) + "@" + format_point(center.q1, center.q2);
    case InitialKind::Gaussian:
      return "gaussian:" + format_number(sigma) + "@" + format_point(center.q1, center.q2);
  }
  return "unknown";
}

InitialDistribution InitialDistribution::parse(std::string_view text) {
  text = trim(text);
  InitialDistribution d;
  auto colon = text.find(':');
  const auto head = text.substr(0, colon);
  std::string_view rest = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  auto parse_params = [&](double& width) {
    if (rest.empty()) return;
    auto at = rest.find('@');
    try {
      width = parse_number(rest.substr(0, at));
      if (at != std::string_view::npos) {
        auto [x, y] = parse_point(rest.substr(at + 1));
        d.center = {x, y};
      }
    } catch (const ParseError& e) {
      throw InvalidArgument("bad initial distribution '" + std::string(text) + "': " + e.what());
    }
    if (!(width > 0.0)) throw InvalidArgument("initial distribution width must be positive");
  };
  if (head == "ground-born" && rest.empty()) {
    d.kind = InitialKind::GroundBorn;
  } else if (head == "born" && rest.empty()) {
    d.kind = InitialKind::Born;
  } else if (head == "uniform-disk") {
    d.kind = InitialKind::UniformDisk;
    parse_params(d.radius);
  } else if (head == "gaussian") {
    d.kind = InitialKind::Gaussian;
    parse_params(d.sigma);
  } else {
    throw InvalidArgument("unknown initial distribution '" + std::string(text) + "'");
  }
  return d;
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::pair<double, double> standard_normal_pair(std::mt19937_64& rng) {
  while (true) {
    const double u = 2.0 * uniform01(rng) - 1.0;
    const double v = 2.0 * uniform01(rng) - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) {
      const double f = std::sqrt(-2.0 * std::log(s) / s);
      return {u * f, v * f};
    }
  }
}

namespace {

constexpr double kBornSamplingHalfWidth = 6.0;

std::vector<Point> sample_born(const WaveFunctionSpec& spec, double t, std::size_t n, std::mt19937_64& rng) {
  // Envelope from a grid scan of the density, with headroom.
  constexpr int kScan = 241;
  double peak = 0.0;
  for (int i = 0; i < kScan; ++i) {
    for (int j = 0; j < kScan; ++j) {
      const double q1 = -kBornSamplingHalfWidth + 2.0 * kBornSamplingHalfWidth * i / (kScan - 1);
      const double q2 = -kBornSamplingHalfWidth + 2.0 * kBornSamplingHalfWidth * j / (kScan - 1);
      peak = std::max(peak, born_density(spec, q1, q2, t));
    }
  }
  const double bound = 1.25 * peak;
  std::vector<Point> out;
  out.reserve(n);
  while (out.size() < n) {
    const double q1 = kBornSamplingHalfWidth * (2.0 * uniform01(rng) - 1.0);
    const double q2 = kBornSamplingHalfWidth * (2.0 * uniform01(rng) - 1.0);
    if (uniform01(rng) * bound < born_density(spec, q1, q2, t)) out.push_back({q1, q2});
  }
  return out;
}

}  // namespace

EnsembleState sample_initial(const InitialDistribution& distribution, std::size_t n, std::uint64_t seed,
                             const WaveFunctionSpec* spec, double t) {
  if (n == 0) throw InvalidArgument("ensemble size must be at least 1");
  std::mt19937_64 rng(seed);
  EnsembleState state;
  state.seed = seed;
  state.t = t;
  state.initial_density_tag = distribution.name();
  if (spec) state.spec_fingerprint = spec->fingerprint();
  state.points.reserve(n);

  switch (distribution.kind) {
    case InitialKind::GroundBorn: {
      // |phi_0|^2 per axis is normal with variance 1/2.
      const double width = std::sqrt(0.5);
      while (state.points.size() < n) {
        auto [a, b] = standard_normal_pair(rng);
        state.points.push_back({width * a, width * b});
      }
      break;
    }
    case InitialKind::UniformDisk:
      while (state.points.size() < n) {
        const double r = distribution.radius * std::sqrt(uniform01(rng));
        const double phi = 2.0 * std::numbers::pi * uniform01(rng);
        state.points.push_back({distribution.center.q1 + r * std::cos(phi), distribution.center.q2 + r * std::sin(phi)});
      }
      break;
    case InitialKind::Gaussian:
      while (state.points.size() < n) {
        auto [a, b] = standard_normal_pair(rng);
        state.points.push_back({distribution.center.q1 + distribution.sigma * a,
                                distribution.center.q2 + distribution.sigma * b});
      }
      break;
    case InitialKind::Born:
      if (!spec) throw InvalidArgument("Born sampling needs a wave-function spec");
      state.points = sample_born(*spec, t, n, rng);
      break;
  }
  return state;
}

EnsembleState evolve_ensemble(const WaveFunctionSpec& spec, const EnsembleState& state, double horizon,
                              const IntegratorConfig& config, unsigned workers) {
  config.validate();
  if (!std::isfinite(horizon)) throw InvalidArgument("horizon must be finite");
  const std::size_t n = state.points.size();
  std::vector<AdvanceResult> results(n);
  std::atomic<std::size_t> next{0};
  const double t0 = state.t;
  const double t1 = state.t + horizon;

  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        results[i] = advance(spec.field(), state.points[i], t0, t1, config);
      } catch (const InvalidArgument& e) {
        results[i].failure = IntegrationFailure{FailureKind::StepUnderflow, t0, state.points[i], e.what()};
      }
    }
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  EnsembleState out;
  out.spec_fingerprint = spec.fingerprint();
  out.t = t1;
  out.seed = state.seed;
  out.initial_density_tag = state.initial_density_tag;
  out.failures = state.failures;
  out.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (results[i].failure) {
      out.failures.push_back({i, *results[i].failure});
    } else {
      out.points.push_back(results[i].position);
    }
  }
  return out;
}

std::vector<double> cell_averaged_density(const WaveFunctionSpec& spec, double t, const GridSpec& grid,
                                          int subdivisions) {
  grid.validate();
  if (subdivisions < 1) throw InvalidArgument("need at least one quadrature point per cell side");
  const double w = grid.cell_width();
  const double sub = w / subdivisions;
  std::vector<double> out(grid.cell_count(), 0.0);
  for (int iy = 0; iy < grid.resolution; ++iy) {
    for (int ix = 0; ix < grid.resolution; ++ix) {
      double sum = 0.0;
      const double x0 = -grid.half_width + ix * w;
      const double y0 = -grid.half_width + iy * w;
      for (int a = 0; a < subdivisions; ++a) {
        for (int b = 0; b < subdivisions; ++b) {
          sum += born_density(spec, x0 + (a + 0.5) * sub, y0 + (b + 0.5) * sub, t);
        }
      }
      out[static_cast<std::size_t>(iy) * grid.resolution + ix] = sum / (subdivisions * subdivisions);
    }
  }
  return out;
}

HRecord coarse_grained_h(std::span<const Point> points, std::size_t total_count, std::span<const double> reference,
                         const GridSpec& grid, double floor) {
  if (total_count == 0 || points.empty()) throw InvalidArgument("coarse-grained H of an empty ensemble");
  if (reference.size() != grid.cell_count()) throw InvalidArgument("reference density has wrong cell count");
  const auto hist = occupancy_grid(points, grid);
  const double area = grid.cell_area();
  HRecord rec;
  rec.resolution = grid.resolution;
  double h = 0.0;
  for (std::size_t c = 0; c < hist.counts.size(); ++c) {
    if (hist.counts[c] == 0) continue;
    ++rec.cells_used;
    const double rho = static_cast<double>(hist.counts[c]) / (static_cast<double>(total_count) * area);
    double ref = reference[c];
    if (!(ref >= floor)) {
      ref = floor;
      ++rec.clamped_cells;
    }
    h += rho * std::log(rho / ref) * area;
  }
  rec.hbar = h;
  rec.undersampled = total_count < 100 * rec.cells_used;
  return rec;
}

HRecord coarse_grained_H(const EnsembleState& state, const WaveFunctionSpec& spec, const GridSpec& grid) {
  if (state.points.empty()) throw InvalidArgument("coarse-grained H of an empty ensemble");
  const auto reference = cell_averaged_density(spec, state.t, grid);
  auto rec = coarse_grained_h(state.points, state.points.size(), reference, grid);
  rec.t = state.t;
  return rec;
}

void write_ensemble_csv(std::ostream& out, const EnsembleState& state, const WaveFunctionSpec& spec,
                        std::string_view provenance) {
  KeyValueText meta;
  meta.set("tool_version", kVersion);
  meta.set("spec_digest", spec.fingerprint());
  meta.set("initial_distribution", state.initial_density_tag);
  meta.set("seed", std::to_string(state.seed));
  meta.set("t", format_number(state.t));
  meta.set("count", std::to_string(state.points.size()));
  meta.set("failed", std::to_string(state.failures.size()));
  out << "# pilotwave ensemble snapshot\n" << meta.render("# ");
  out << KeyValueText::parse(spec.serialize()).render("# spec.");
  if (!provenance.empty()) out << provenance;
  out << "q1,q2\n";
  for (const auto& p : state.points) out << format_number(p.q1) << ',' << format_number(p.q2) << '\n';
}

void write_h_series_csv(std::ostream& out, std::span<const HRecord> series, const WaveFunctionSpec& spec,
                        std::string_view provenance) {
  out << "# pilotwave coarse-grained H series\n";
  out << "# tool_version = " << kVersion << "\n";
  out << "# spec_digest = " << spec.fingerprint() << "\n";
  out << KeyValueText::parse(spec.serialize()).render("# spec.");
  if (!provenance.empty()) out << provenance;
  out << "t,hbar,cells\n";
  for (const auto& r : series) out << format_number(r.t) << ',' << format_number(r.hbar) << ',' << r.cells_used << '\n';
}

}  // namespace pilotwave
