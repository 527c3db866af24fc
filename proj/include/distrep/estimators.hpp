#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "distrep/cohort.hpp"
#include "distrep/curve.hpp"
#include "distrep/errors.hpp"

namespace distrep {

// Ascending copy of a subject's values; every estimator below works off this.
struct SortedSample {
  std::vector<double> v;

  static SortedSample from(const std::vector<double>& values) {
    SortedSample s;
    s.v = values;
    std::sort(s.v.begin(), s.v.end());
    return s;
  }
  std::size_t m() const { return v.size(); }
};

inline double sample_mean(const std::vector<double>& v) {
  long double s = 0.0L;
  for (double x : v) s += x;
  return static_cast<double>(s / static_cast<long double>(v.size()));
}

inline double sample_sd(const std::vector<double>& v) {
  const std::size_t n = v.size();
  if (n < 2) return 0.0;
  const double mu = sample_mean(v);
  long double ss = 0.0L;
  for (double x : v) ss += (x - mu) * static_cast<long double>(x - mu);
  return static_cast<double>(std::sqrt(ss / static_cast<long double>(n - 1)));
}

// Linear interpolation of order statistics: with g = (m+1)p = j + w,
// Q(p) = (1-w) X(j) + w X(j+1), clamped to the extreme order statistics
// whenever j falls outside 1..m-1.
inline double interpolated_quantile(const std::vector<double>& sorted, double p) {
  const std::size_t m = sorted.size();
  const double g = static_cast<double>(m + 1) * p;
  const double j = std::floor(g);
  const double w = g - j;
  if (j < 1.0) return sorted.front();
  if (j >= static_cast<double>(m)) return sorted.back();
  const std::size_t idx = static_cast<std::size_t>(j);
  return (1.0 - w) * sorted[idx - 1] + w * sorted[idx];
}

// Rule-of-thumb Gaussian KDE bandwidth; falls back to a grid-scaled floor
// for zero-variance samples.
struct Bandwidth {
  double h;
  bool fallback;
};

inline Bandwidth kde_bandwidth(const SortedSample& s, double grid_spacing) {
  const double sd = sample_sd(s.v);
  if (sd > 0.0) {
    return {1.06 * sd * std::pow(static_cast<double>(s.m()), -0.2), false};
  }
  return {std::max(1e-6, 0.1 * grid_spacing), true};
}

inline Curve estimate_density(const SortedSample& s, const std::vector<double>& grid,
                              bool* used_fallback = nullptr) {
  if (s.m() < 2) throw data_error("estimate_density: need m >= 2");
  const double spacing =
      grid.size() > 1 ? (grid.back() - grid.front()) / static_cast<double>(grid.size() - 1) : 0.0;
  const Bandwidth bw = kde_bandwidth(s, spacing);
  if (used_fallback) *used_fallback = bw.fallback;
  const double h = bw.h;
  const double inv = 1.0 / (h * static_cast<double>(s.m()) * 2.5066282746310005024);
  Curve c{RepresentationKind::Density, CurveDomain::SampleSpace, grid, {}};
  c.values.resize(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double x = grid[g];
    // kernel mass beyond 8 bandwidths is below fp noise
    auto lo = std::lower_bound(s.v.begin(), s.v.end(), x - 8.0 * h);
    auto hi = std::upper_bound(lo, s.v.end(), x + 8.0 * h);
    double acc = 0.0;
    for (auto it = lo; it != hi; ++it) {
      const double t = (x - *it) / h;
      acc += std::exp(-0.5 * t * t);
    }
    c.values[g] = acc * inv;
  }
  return c;
}

// With complete data the Kaplan-Meier product telescopes to the empirical
// survival #\{X > x\}/m, which is what we evaluate.
inline Curve estimate_survival(const SortedSample& s, const std::vector<double>& grid) {
  if (s.m() < 2) throw data_error("estimate_survival: need m >= 2");
  Curve c{RepresentationKind::Survival, CurveDomain::SampleSpace, grid, {}};
  c.values.resize(grid.size());
  const double m = static_cast<double>(s.m());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto above = s.v.end() - std::upper_bound(s.v.begin(), s.v.end(), grid[g]);
    c.values[g] = static_cast<double>(above) / m;
  }
  return c;
}

namespace detail {

// Nelson-Aalen increments d/N aggregated over tied values.
struct NaSteps {
  std::vector<double> value;   // distinct event values, ascending
  std::vector<double> cumhaz;  // cumulative sum of d/N up to and including value[k]
  std::vector<double> step;    // d/N at value[k]
};

inline NaSteps nelson_aalen_steps(const SortedSample& s) {
  NaSteps out;
  const std::size_t m = s.m();
  std::size_t i = 0;
  double cum = 0.0;
  while (i < m) {
    std::size_t j = i;
    while (j < m && s.v[j] == s.v[i]) ++j;
    const double d = static_cast<double>(j - i);
    const double at_risk = static_cast<double>(m - i);
    cum += d / at_risk;
    out.value.push_back(s.v[i]);
    out.cumhaz.push_back(cum);
    out.step.push_back(d / at_risk);
    i = j;
  }
  return out;
}

}  // namespace detail

inline Curve estimate_cumhaz(const SortedSample& s, const std::vector<double>& grid) {
  if (s.m() < 2) throw data_error("estimate_cumhaz: need m >= 2");
  const auto steps = detail::nelson_aalen_steps(s);
  Curve c{RepresentationKind::Hazard, CurveDomain::SampleSpace, grid, {}};
  c.values.resize(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto it = std::upper_bound(steps.value.begin(), steps.value.end(), grid[g]);
    c.values[g] = it == steps.value.begin() ? 0.0 : steps.cumhaz[it - steps.value.begin() - 1];
  }
  return c;
}

enum class HazardEstimator { Ratio, BinnedIncrements };

struct HazardOptions {
  HazardEstimator estimator = HazardEstimator::Ratio;
  double survival_floor = 1e-3;
};

// Default: smooth ratio KDE/KM with a floored denominator. The alternative
// bins Nelson-Aalen increments into grid cells and divides by cell width.
inline Curve estimate_hazard(const SortedSample& s, const std::vector<double>& grid,
                             const HazardOptions& opt = {}) {
  if (s.m() < 2) throw data_error("estimate_hazard: need m >= 2");
  Curve c{RepresentationKind::Hazard, CurveDomain::SampleSpace, grid, {}};
  if (opt.estimator == HazardEstimator::Ratio) {
    const Curve f = estimate_density(s, grid);
    const Curve surv = estimate_survival(s, grid);
    c.values.resize(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g)
      c.values[g] = f.values[g] / std::max(surv.values[g], opt.survival_floor);
    return c;
  }
  const auto steps = detail::nelson_aalen_steps(s);
  c.values.assign(grid.size(), 0.0);
  if (grid.size() < 2) return c;
  for (std::size_t g = 0; g + 1 < grid.size(); ++g) {
    const double width = grid[g + 1] - grid[g];
    auto lo = std::lower_bound(steps.value.begin(), steps.value.end(), grid[g]);
    auto hi = std::lower_bound(lo, steps.value.end(), grid[g + 1]);
    double acc = 0.0;
    for (auto it = lo; it != hi; ++it) acc += steps.step[it - steps.value.begin()];
    c.values[g] = acc / width;
  }
  c.values.back() = c.values[grid.size() - 2];
  return c;
}

inline Curve estimate_quantile(const SortedSample& s, const std::vector<double>& levels) {
  if (s.m() < 2) throw data_error("estimate_quantile: need m >= 2");
  for (double p : levels)
    if (!(p > 0.0) || !(p < 1.0))
      throw data_error("estimate_quantile: levels must lie strictly inside (0, 1)");
  Curve c{RepresentationKind::Quantile, CurveDomain::QuantileLevel, levels, {}};
  c.values.resize(levels.size());
  for (std::size_t g = 0; g < levels.size(); ++g)
    c.values[g] = interpolated_quantile(s.v, levels[g]);
  return c;
}

// Total time on test: tau(X(r)) = sum_{k<=r} (m-k+1)(X(k) - X(k-1)), with
// T(r/m) = tau(X(r))/m and linear interpolation between order-statistic levels.
inline Curve estimate_ttt(const SortedSample& s, const std::vector<double>& levels) {
  const std::size_t m = s.m();
  if (m < 2) throw data_error("estimate_ttt: need m >= 2");
  for (double p : levels)
    if (!(p >= 0.0) || !(p <= 1.0)) throw data_error("estimate_ttt: levels must lie in [0, 1]");
  std::vector<double> tau(m + 1, 0.0);
  long double acc = 0.0L;
  double prev = 0.0;
  for (std::size_t k = 1; k <= m; ++k) {
    acc += static_cast<long double>(m - k + 1) * (s.v[k - 1] - prev);
    prev = s.v[k - 1];
    tau[k] = static_cast<double>(acc);
  }
  Curve c{RepresentationKind::TTT, CurveDomain::QuantileLevel, levels, {}};
  c.values.resize(levels.size());
  const double md = static_cast<double>(m);
  for (std::size_t g = 0; g < levels.size(); ++g) {
    const double t = levels[g] * md;
    const std::size_t r = std::min(static_cast<std::size_t>(std::floor(t)), m);
    const double frac = t - static_cast<double>(r);
    double val = tau[r];
    if (r < m && frac > 0.0) val += frac * (tau[r + 1] - tau[r]);
    c.values[g] = val / md;
  }
  return c;
}

// Shared evaluation grids: x-grid from 0 to the pooled upper quantile,
// p-grid equally spaced on [0.005, 0.995].
inline std::pair<std::vector<double>, std::vector<double>> pooled_grid(
    const std::vector<SubjectSample>& samples, const GridSpec& spec) {
  validate(spec);
  if (samples.empty()) throw data_error("pooled_grid: empty cohort");
  std::vector<double> pool;
  for (const auto& s : samples) pool.insert(pool.end(), s.values.begin(), s.values.end());
  if (pool.empty()) throw data_error("pooled_grid: no values");
  std::sort(pool.begin(), pool.end());
  const double upper = interpolated_quantile(pool, spec.sample_space_upper);
  std::vector<double> xgrid(spec.sample_space_points);
  const int gx = spec.sample_space_points;
  for (int i = 0; i < gx; ++i)
    xgrid[i] = upper * static_cast<double>(i) / static_cast<double>(gx - 1);
  std::vector<double> pgrid(spec.quantile_levels);
  const int gp = spec.quantile_levels;
  for (int i = 0; i < gp; ++i)
    pgrid[i] = 0.005 + (0.995 - 0.005) * static_cast<double>(i) / static_cast<double>(gp - 1);
  return {std::move(xgrid), std::move(pgrid)};
}

inline Curve estimate_representation(const SortedSample& s, RepresentationKind kind,
                                     const std::vector<double>& xgrid,
                                     const std::vector<double>& pgrid,
                                     const HazardOptions& hazard = {}) {
  switch (kind) {
    case RepresentationKind::Density: return estimate_density(s, xgrid);
    case RepresentationKind::Survival: return estimate_survival(s, xgrid);
    case RepresentationKind::Hazard: return estimate_hazard(s, xgrid, hazard);
    case RepresentationKind::Quantile: return estimate_quantile(s, pgrid);
    case RepresentationKind::TTT: return estimate_ttt(s, pgrid);
    case RepresentationKind::ScalarMean: {
      Curve c{RepresentationKind::ScalarMean, CurveDomain::SampleSpace, {0.0}, {sample_mean(s.v)}};
      return c;
    }
  }
  throw std::invalid_argument("unknown representation kind");
}

// One curve per subject on the grids from pooled_grid. Estimator failures
// surface with the subject id attached; degenerate-variance KDE subjects are
// reported through the warning sink (stderr by default).
inline std::vector<Curve> represent_cohort(
    const std::vector<SubjectSample>& samples, const GridSpec& spec,
    RepresentationKind kind, const HazardOptions& hazard = {},
    const std::function<void(const std::string&)>& warn = {}) {
  const auto [xgrid, pgrid] = pooled_grid(samples, spec);
  std::vector<Curve> curves;
  curves.reserve(samples.size());
  for (const auto& s : samples) {
    validate(s);
    try {
      const SortedSample sorted = SortedSample::from(s.values);
      if ((kind == RepresentationKind::Density || kind == RepresentationKind::Hazard) &&
          sample_sd(s.values) == 0.0) {
        const std::string msg =
            "subject " + s.subject_id + ": zero variance, KDE fallback bandwidth";
        if (warn)
          warn(msg);
        else
          std::cerr << "warning: " << msg << "\n";
      }
      curves.push_back(estimate_representation(sorted, kind, xgrid, pgrid, hazard));
    } catch (const std::exception& e) {
      throw data_error("subject " + s.subject_id + ": " + e.what());
    }
  }
  return curves;
}

}  // namespace distrep
