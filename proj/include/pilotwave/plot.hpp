#pragma once

// Deterministic SVG rendering of trajectories and cell densities.

#include <span>
#include <string>
#include <vector>

#include "pilotwave/diagnostics.hpp"
#include "pilotwave/integrator.hpp"

namespace pilotwave {

struct PlotSpec {
  double half_width = 4.0;  // plotted square [-L, L]^2
  double stroke_width = 0.6;
  int stride = 1;           // plot every stride-th sample
  int pixels = 600;
  std::vector<std::string> annotations;
  std::string description;  // emitted as <desc>, e.g. provenance

  void validate() const;
};

/// One polyline per trajectory, overlaid.
std::string trajectory_svg(std::span<const Trajectory> trajectories, const PlotSpec& plot);

/// Gray-scale heat map of per-cell values (flat iy * resolution + ix).
std::string density_svg(std::span<const double> cells, const GridSpec& grid, const PlotSpec& plot);

}  // namespace pilotwave
