#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "distrep/errors.hpp"
#include "distrep/expweibull.hpp"
#include "distrep/rng.hpp"

namespace distrep {

// One subject's epoch-level sample plus outcome labels.
struct SubjectSample {
  std::string subject_id;
  std::vector<double> values;
  std::optional<int> outcome_binary;
  std::optional<double> outcome_continuous;

  std::size_t m() const { return values.size(); }
};

inline void validate(const SubjectSample& s) {
  if (s.values.size() < 2)
    throw data_error("subject " + s.subject_id + ": needs at least 2 values");
  for (double v : s.values)
    if (!std::isfinite(v) || v < 0.0)
      throw data_error("subject " + s.subject_id + ": values must be finite and non-negative");
}

enum class DataTransform { Raw, Log1 };

inline const char* transform_name(DataTransform t) {
  return t == DataTransform::Raw ? "raw" : "log1";
}

// elementwise natural log(x + 1)
inline std::vector<double> apply_log1(const std::vector<double>& values) {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < 0.0) throw data_error("apply_log1: negative input");
    out[i] = std::log1p(values[i]);
  }
  return out;
}

inline std::vector<SubjectSample> apply_transform(const std::vector<SubjectSample>& samples,
                                                  DataTransform transform) {
  if (transform == DataTransform::Raw) return samples;
  std::vector<SubjectSample> out = samples;
  for (auto& s : out) s.values = apply_log1(s.values);
  return out;
}

struct GroupDesign {
  std::size_t n = 0;
  ExpWeibullParams params{20.0, 1.0, 1.0};
};

// Continuous outcome: a*group + b*standardized log1p(subject mean) + N(0, sd^2)
struct OutcomeModel {
  double group_effect = 2.0;
  double logmean_effect = 1.0;
  double noise_sd = 0.5;
};

struct CohortDesign {
  GroupDesign group0;
  GroupDesign group1;
  std::size_t epochs_per_subject = 720;
  OutcomeModel outcome;
};

// Draws a two-group cohort. Values and noise for subject i come from streams
// keyed by (seed, i), so the result is identical under any parallel schedule.
inline std::vector<SubjectSample> simulate_cohort(const CohortDesign& design,
                                                  std::uint64_t seed) {
  if (design.group0.n < 1 || design.group1.n < 1)
    throw config_error("simulate_cohort: each group needs n >= 1");
  if (design.epochs_per_subject < 2)
    throw config_error("simulate_cohort: epochs_per_subject must be >= 2");
  validate(design.group0.params);
  validate(design.group1.params);

  const std::size_t n = design.group0.n + design.group1.n;
  std::vector<SubjectSample> cohort(n);
  std::vector<double> logmean(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool high = i >= design.group0.n;
    const ExpWeibullParams& pars = high ? design.group1.params : design.group0.params;
    KeyedRng rng(seed, i);
    SubjectSample& s = cohort[i];
    char buf[24];
    std::snprintf(buf, sizeof(buf), "s%05zu", i + 1);
    s.subject_id = buf;
    s.values = ew_sample(pars, design.epochs_per_subject, rng);
    s.outcome_binary = high ? 1 : 0;
    double sum = 0.0;
    for (double v : s.values) sum += v;
    logmean[i] = std::log1p(sum / static_cast<double>(s.values.size()));
  }

  double mu = 0.0;
  for (double v : logmean) mu += v;
  mu /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : logmean) ss += (v - mu) * (v - mu);
  const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;

  for (std::size_t i = 0; i < n; ++i) {
    const double z = sd > 0.0 ? (logmean[i] - mu) / sd : 0.0;
    KeyedRng rng(seed, i, 1);
    cohort[i].outcome_continuous = design.outcome.group_effect * (*cohort[i].outcome_binary) +
                                   design.outcome.logmean_effect * z +
                                   design.outcome.noise_sd * rng.normal();
  }
  return cohort;
}

// Scale for a (scale, shape, power) family member whose analytic mean matches
// a target, solved by bisection on the quadrature mean.
inline double solve_mean_matched_scale(double target_mean, double shape, double power,
                                       double tol = 1e-9) {
  if (!(target_mean > 0.0)) throw std::invalid_argument("target mean must be positive");
  double lo = 1e-8, hi = 1.0;
  auto mean_at = [&](double scale) { return ew_mean({scale, shape, power}); };
  while (mean_at(hi) < target_mean) {
    hi *= 2.0;
    if (hi > 1e12) throw numeric_error("mean matching failed to bracket");
  }
  for (int it = 0; it < 200 && hi - lo > tol * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean_at(mid) < target_mean ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace distrep
