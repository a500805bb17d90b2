#pragma once

// Perturbed two-dimensional harmonic oscillator in units hbar = m = omega = 1.
//
//   psi(q1, q2, t) = N * sum_k eps_k exp(i(theta_k - E_k t)) phi_m(q1) phi_n(q2)
//
// with E = m + n + 1, so psi is exactly periodic with period 2*pi.

#include <complex>
#include <compare>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pilotwave {

using Complex = std::complex<double>;

/// Oscillation period of every superposition of oscillator eigenstates.
inline constexpr double kPeriod = 2.0 * std::numbers::pi;

/// Highest eigenstate order supported by the recurrences.
inline constexpr int kMaxOrder = 60;

/// Peak of the ground-state density, 1/pi.
inline constexpr double kPeakDensity = std::numbers::inv_pi;

/// |psi|^2 below this is treated as a node by the velocity field.
inline constexpr double kDefaultNodeGuard = 1e-12 * kPeakDensity;

struct Mode {
  int m = 0;  // q1 quantum number
  int n = 0;  // q2 quantum number

  constexpr int energy() const { return m + n + 1; }
  friend constexpr auto operator<=>(const Mode&, const Mode&) = default;
};

std::string to_string(Mode mode);
/// Parses "m:n".
Mode parse_mode(std::string_view text);

struct Term {
  Mode mode;
  double amplitude = 0.0;
  double phase = 0.0;

  friend bool operator==(const Term&, const Term&) = default;
};

/// Physicists' Hermite polynomial H_m(x) by the unnormalized three-term recurrence.
double hermite(int m, double x);

/// Normalized oscillator eigenfunction phi_m(q).
double eigenstate(int m, double q);

/// d phi_m / dq via the ladder identity sqrt(2m) phi_{m-1} - q phi_m.
double eigenstate_derivative(int m, double q);

/// Fills phi[k] and dphi[k] for k = 0..phi.size()-1 in one recurrence pass.
void eigenstate_table(double q, std::span<double> phi, std::span<double> dphi);

/// psi and its spatial gradient at one space-time point.
struct FieldPoint {
  Complex psi;
  Complex d1;
  Complex d2;

  double density() const { return std::norm(psi); }
};

struct Velocity {
  double v1 = 0.0;
  double v2 = 0.0;
};

/// Velocity plus the density at which it was evaluated.
struct FlowSample {
  Velocity velocity;
  double density = 0.0;
};

/// Unconstrained superposition sum_k c_k exp(-i E_k t) phi_m(q1) phi_n(q2).
///
/// WaveFunctionSpec enforces the perturbed-ground-state invariants on top of
/// this; Superposition itself accepts any modes and any complex weights.
class Superposition {
 public:
  Superposition() = default;
  explicit Superposition(std::vector<std::pair<Mode, Complex>> components);

  FieldPoint evaluate(double q1, double q2, double t) const;
  Complex psi(double q1, double q2, double t) const { return evaluate(q1, q2, t).psi; }

  /// Throws NodeProximity when |psi|^2 < node_guard.
  FlowSample flow(double q1, double q2, double t, double node_guard = kDefaultNodeGuard) const;

  const std::vector<std::pair<Mode, Complex>>& components() const { return components_; }

 private:
  std::vector<std::pair<Mode, Complex>> components_;
  int max_m_ = 0;
  int max_n_ = 0;
  int max_energy_ = 1;
};

/// Ground state plus excited-state perturbations.
///
/// Invariants: exactly one (0,0) term with amplitude 1, no duplicate modes,
/// amplitudes in [0,1], phases reduced to [0, 2pi). Amplitudes and phases are
/// stored in canonical 12-significant-digit form so serialize/parse is exact.
class WaveFunctionSpec {
 public:
  /// Validates; throws InvalidSpec.
  explicit WaveFunctionSpec(std::vector<Term> terms);

  /// Ground state alone with phase 0.
  static WaveFunctionSpec ground_state();

  /// All excited modes share one amplitude. phases[0] is the ground phase,
  /// phases[k] belongs to excited[k-1].
  static WaveFunctionSpec homogeneous(std::span<const Mode> excited, double epsilon,
                                      std::span<const double> phases);

  const std::vector<Term>& terms() const { return terms_; }
  double normalization() const { return normalization_; }
  const Superposition& field() const { return field_; }

  /// Same spec with every phase shifted by delta.
  WaveFunctionSpec with_phase_shift(double delta) const;

  /// "modes = ..", "epsilon = ..", "theta = .." lines.
  std::string serialize() const;
  static WaveFunctionSpec parse(std::string_view text);

  /// Digest of the serialized form.
  std::string fingerprint() const;

  friend bool operator==(const WaveFunctionSpec& a, const WaveFunctionSpec& b) {
    return a.terms_ == b.terms_;
  }

 private:
  std::vector<Term> terms_;
  double normalization_ = 1.0;
  Superposition field_;
};

Complex psi(const WaveFunctionSpec& spec, double q1, double q2, double t);
std::pair<Complex, Complex> grad_psi(const WaveFunctionSpec& spec, double q1, double q2, double t);
double born_density(const WaveFunctionSpec& spec, double q1, double q2, double t);

/// Im(d_r psi / psi); throws NodeProximity near nodes.
Velocity velocity(const WaveFunctionSpec& spec, double q1, double q2, double t,
                  double node_guard = kDefaultNodeGuard);

}  // namespace pilotwave
