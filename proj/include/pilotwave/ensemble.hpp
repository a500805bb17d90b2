#pragma once

// Particle ensembles transported by the velocity field, and the
// coarse-grained H-function comparing them with |psi|^2.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pilotwave/diagnostics.hpp"
#include "pilotwave/integrator.hpp"
#include "pilotwave/wavefunction.hpp"

namespace pilotwave {

enum class InitialKind {
  GroundBorn,   // |phi_0(q1) phi_0(q2)|^2
  UniformDisk,  // uniform on a disk of `radius` about `center`
  Gaussian,     // isotropic normal of width `sigma` about `center`
  Born,         // |psi(q, t)|^2 of a given spec, by rejection sampling
};

struct InitialDistribution {
  InitialKind kind = InitialKind::GroundBorn;
  double radius = 1.0;
  double sigma = 0.1;
  Point center;

  /// Canonical name, e.g. "uniform-disk:1@0,0"; parse(name()) round-trips.
  std::string name() const;

  /// Accepts "ground-born", "born", "uniform-disk[:R[@x,y]]",
  /// "gaussian[:sigma[@x,y]]". Throws InvalidArgument for anything else.
  static InitialDistribution parse(std::string_view text);
};

struct EnsembleFailure {
  std::size_t index = 0;  // position in the pre-evolution point list
  IntegrationFailure failure;
};

struct EnsembleState {
  std::string spec_fingerprint;
  double t = 0.0;
  std::vector<Point> points;
  std::uint64_t seed = 0;
  std::string initial_density_tag;
  /// Points dropped during evolution, cumulative.
  std::vector<EnsembleFailure> failures;

  std::size_t size() const { return points.size(); }
};

/// Uniform double in [0,1) from the top 53 bits of the engine output.
double uniform01(std::mt19937_64& rng);
/// Standard normal pair by the polar Box-Muller method.
std::pair<double, double> standard_normal_pair(std::mt19937_64& rng);

/// Deterministic in (distribution, n, seed). Born sampling needs `spec` and
/// draws from |psi(., t)|^2. Throws InvalidArgument for n == 0.
EnsembleState sample_initial(const InitialDistribution& distribution, std::size_t n, std::uint64_t seed,
                             const WaveFunctionSpec* spec = nullptr, double t = 0.0);

/// Advances every point by `horizon` from state.t. Points whose integration
/// fails are dropped and recorded; the result does not depend on `workers`.
EnsembleState evolve_ensemble(const WaveFunctionSpec& spec, const EnsembleState& state, double horizon,
                              const IntegratorConfig& config = {}, unsigned workers = 1);

struct HRecord {
  double t = 0.0;
  int resolution = 0;
  double hbar = 0.0;
  std::size_t cells_used = 0;     // cells with rho_bar > 0
  std::size_t clamped_cells = 0;  // cells where |psi|^2_bar hit the floor
  bool undersampled = false;      // fewer than 100 particles per occupied cell
};

/// Default coarse-graining: 30 x 30 cells over [-4,4]^2.
inline GridSpec default_h_grid() { return {4.0, 30}; }

/// Cell averages of |psi(., t)|^2 by subdivided midpoint quadrature.
std::vector<double> cell_averaged_density(const WaveFunctionSpec& spec, double t, const GridSpec& grid,
                                          int subdivisions = 4);

/// sum over cells of rho_bar ln(rho_bar / ref) * area, where rho_bar is the
/// histogram of `points` normalized by total_count and ref the cell-averaged
/// reference density; reference values below `floor` are clamped to it.
HRecord coarse_grained_h(std::span<const Point> points, std::size_t total_count,
                         std::span<const double> reference, const GridSpec& grid,
                         double floor = kDefaultNodeGuard);

/// Throws InvalidArgument for an empty ensemble.
HRecord coarse_grained_H(const EnsembleState& state, const WaveFunctionSpec& spec,
                         const GridSpec& grid = default_h_grid());

/// "q1,q2" rows after '#' provenance lines.
void write_ensemble_csv(std::ostream& out, const EnsembleState& state, const WaveFunctionSpec& spec,
                        std::string_view provenance = "");
/// "t,hbar,cells" rows.
void write_h_series_csv(std::ostream& out, std::span<const HRecord> series, const WaveFunctionSpec& spec,
                        std::string_view provenance = "");

}  // namespace pilotwave
