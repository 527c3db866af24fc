#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "distrep/errors.hpp"

namespace distrep {

enum class RepresentationKind { Density, Survival, Hazard, Quantile, TTT, ScalarMean };
enum class CurveDomain { SampleSpace, QuantileLevel };

inline const char* kind_name(RepresentationKind k) {
  switch (k) {
    case RepresentationKind::Density: return "density";
    case RepresentationKind::Survival: return "survival";
    case RepresentationKind::Hazard: return "hazard";
    case RepresentationKind::Quantile: return "quantile";
    case RepresentationKind::TTT: return "ttt";
    case RepresentationKind::ScalarMean: return "scalar_mean";
  }
  return "?";
}

inline const char* domain_name(CurveDomain d) {
  return d == CurveDomain::SampleSpace ? "sample_space" : "quantile_level";
}

inline CurveDomain domain_of(RepresentationKind k) {
  switch (k) {
    case RepresentationKind::Quantile:
    case RepresentationKind::TTT:
      return CurveDomain::QuantileLevel;
    default:
      return CurveDomain::SampleSpace;
  }
}

// A representation evaluated on a grid. Sample-space curves carry an x-grid
// in data units; quantile-level curves a p-grid inside (0, 1).
struct Curve {
  RepresentationKind kind = RepresentationKind::Density;
  CurveDomain domain = CurveDomain::SampleSpace;
  std::vector<double> grid;
  std::vector<double> values;
};

inline void validate(const Curve& c) {
  if (c.grid.size() != c.values.size())
    throw data_error("curve: grid/values length mismatch");
  if (c.grid.empty()) throw data_error("curve: empty grid");
  for (std::size_t i = 0; i < c.grid.size(); ++i) {
    if (!std::isfinite(c.grid[i]) || !std::isfinite(c.values[i]))
      throw data_error("curve: non-finite entry");
    if (i > 0 && !(c.grid[i] > c.grid[i - 1]))
      throw data_error("curve: grid must be strictly increasing");
  }
  switch (c.kind) {
    case RepresentationKind::Survival:
      for (std::size_t i = 0; i < c.values.size(); ++i) {
        if (c.values[i] < 0.0 || c.values[i] > 1.0)
          throw data_error("survival curve: values outside [0,1]");
        if (i > 0 && c.values[i] > c.values[i - 1] + 1e-12)
          throw data_error("survival curve: not nonincreasing");
      }
      break;
    case RepresentationKind::Quantile:
    case RepresentationKind::TTT:
      if (c.domain != CurveDomain::QuantileLevel)
        throw data_error("quantile/TTT curve: wrong domain");
      for (std::size_t i = 1; i < c.values.size(); ++i)
        if (c.values[i] < c.values[i - 1] - 1e-12)
          throw data_error("quantile/TTT curve: not nondecreasing");
      break;
    case RepresentationKind::Density:
    case RepresentationKind::Hazard:
      for (double v : c.values)
        if (v < 0.0) throw data_error("density/hazard curve: negative value");
      break;
    case RepresentationKind::ScalarMean:
      break;
  }
}

// Grid construction policy for a cohort.
struct GridSpec {
  int sample_space_points = 100;
  double sample_space_upper = 0.99;  // pooled quantile level for truncation
  int quantile_levels = 100;         // equally spaced on [0.005, 0.995]
};

inline void validate(const GridSpec& g) {
  if (g.sample_space_points < 10 || g.quantile_levels < 10)
    throw config_error("grid spec: point counts must be >= 10");
  if (!(g.sample_space_upper > 0.5) || !(g.sample_space_upper <= 1.0))
    throw config_error("grid spec: truncation level must lie in (0.5, 1]");
}

}  // namespace distrep
