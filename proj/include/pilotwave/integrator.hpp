#pragma once

// Adaptive Dormand-Prince 5(4) integration of the de Broglie velocity field.

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pilotwave/errors.hpp"
#include "pilotwave/text.hpp"
#include "pilotwave/wavefunction.hpp"

namespace pilotwave {

struct Point {
  double q1 = 0.0;
  double q2 = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

double distance(Point a, Point b);

/// Configuration region; starts outside it are rejected.
inline constexpr double kDomainHalfWidth = 8.0;

struct IntegratorConfig {
  double abstol = 1e-8;
  double reltol = 0.0;
  double h_init = 1e-3;
  double h_min = 1e-10;
  double h_max = kPeriod / 20.0;
  double sample_interval = kPeriod / 100.0;
  double node_guard = kDefaultNodeGuard;

  /// Throws InvalidArgument.
  void validate() const;
  KeyValueText to_text() const;
  static IntegratorConfig from_text(const KeyValueText& doc);
};

struct Sample {
  double t = 0.0;
  double q1 = 0.0;
  double q2 = 0.0;

  Point position() const { return {q1, q2}; }
  friend bool operator==(const Sample&, const Sample&) = default;
};

enum class FailureKind { NodeProximity, StepUnderflow };

const char* to_string(FailureKind kind);

/// Where and why an integration stopped early.
struct IntegrationFailure {
  FailureKind kind = FailureKind::StepUnderflow;
  double t = 0.0;
  Point position;
  std::string message;
};

class IntegrationError : public Error {
 public:
  explicit IntegrationError(IntegrationFailure failure)
      : Error(failure.message), failure_(std::move(failure)) {}
  const IntegrationFailure& failure() const { return failure_; }

 private:
  IntegrationFailure failure_;
};

/// Fixed-cadence samples of one integrated trajectory.
///
/// A trajectory that hit a node or underflowed keeps the samples recorded
/// before the failure and carries the failure record.
struct Trajectory {
  Point start;
  std::string spec_fingerprint;
  double sample_interval = kPeriod / 100.0;
  double horizon = 0.0;  // requested
  std::vector<Sample> samples;
  long steps_taken = 0;
  long steps_rejected = 0;
  double min_density_seen = 0.0;
  std::optional<IntegrationFailure> failure;

  bool complete() const { return !failure.has_value(); }
  Point final_position() const { return samples.back().position(); }
  double final_time() const { return samples.back().t; }
  /// Throws IntegrationError if the run was truncated.
  const Trajectory& require_complete() const;
};

/// Result of an integration that keeps only the end point.
struct AdvanceResult {
  Point position;
  double t = 0.0;
  long steps_taken = 0;
  long steps_rejected = 0;
  double min_density_seen = 0.0;
  std::optional<IntegrationFailure> failure;
};

/// Called with the current sample time, once per period of trajectory time.
using ProgressFn = std::function<void(double t)>;

/// Integrates from t = 0 to horizon, sampling every config.sample_interval.
Trajectory integrate_trajectory(const WaveFunctionSpec& spec, Point start, double horizon,
                                const IntegratorConfig& config = {},
                                const ProgressFn& progress = {});

/// Integrates an arbitrary superposition from t0 to t1 (t1 < t0 runs backwards).
AdvanceResult advance(const Superposition& field, Point start, double t0, double t1,
                      const IntegratorConfig& config = {});

struct ConvergenceReport {
  double abstol_coarse = 0.0;
  double abstol_fine = 0.0;
  Point final_coarse;
  Point final_fine;
  double final_separation = 0.0;
  bool converged = false;
};

/// Final-position agreement required between two tolerance levels.
inline constexpr double kConvergenceDistance = 0.01;

/// Integrates at abstol and abstol/10 and compares final positions.
/// Throws IntegrationError if either run fails.
ConvergenceReport verify_convergence(const WaveFunctionSpec& spec, Point start, double horizon,
                                     double abstol, IntegratorConfig config = {});

/// CSV with header "t,q1,q2" preceded by '#' provenance lines.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const WaveFunctionSpec& spec,
                          const IntegratorConfig& config);
/// Reads samples and the start/fingerprint/cadence provenance back.
Trajectory read_trajectory_csv(std::istream& in);

}  // namespace pilotwave
