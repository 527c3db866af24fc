#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "distrep/quadrature.hpp"
#include "distrep/rng.hpp"

namespace distrep {

// Exponentiated Weibull family. With scale l, shape k and power a:
//   F(x) = {1 - exp(-(x/l)^k)}^a
//   f(x) = (a*k/l) (x/l)^(k-1) {1 - exp(-(x/l)^k)}^(a-1) exp(-(x/l)^k)
// power == 1 reduces to Weibull, shape == power == 1 to Exponential(l).
struct ExpWeibullParams {
  double scale;  // l > 0, data units
  double shape;  // k > 0
  double power;  // a > 0
};

enum class HazardShape { Constant, Decreasing, Increasing, Bathtub, Unimodal };

inline const char* hazard_shape_name(HazardShape s) {
  switch (s) {
    case HazardShape::Constant: return "constant";
    case HazardShape::Decreasing: return "decreasing";
    case HazardShape::Increasing: return "increasing";
    case HazardShape::Bathtub: return "bathtub";
    case HazardShape::Unimodal: return "unimodal";
  }
  return "?";
}

// Parameter triples producing the five canonical hazard shapes.
inline ExpWeibullParams hazard_shape_params(HazardShape s) {
  switch (s) {
    case HazardShape::Constant: return {20.0, 1.0, 1.0};
    case HazardShape::Decreasing: return {5.0, 0.5, 2.0};
    case HazardShape::Increasing: return {50.0, 2.0, 2.0};
    case HazardShape::Bathtub: return {150.0, 4.0, 0.15};
    case HazardShape::Unimodal: return {5.0, 0.55, 4.0};
  }
  throw std::invalid_argument("unknown hazard shape");
}

inline void validate(const ExpWeibullParams& p) {
  if (!(p.scale > 0.0) || !std::isfinite(p.scale) || !(p.shape > 0.0) ||
      !std::isfinite(p.shape) || !(p.power > 0.0) || !std::isfinite(p.power))
    throw std::invalid_argument("exponentiated Weibull parameters must be positive and finite");
}

namespace detail {

// log{1 - exp(-(x/l)^k)}, stable for x near 0 and in the far tail
inline double ew_log_base_cdf(const ExpWeibullParams& p, double x) {
  const double logu = p.shape * std::log(x / p.scale);
  if (logu < -37.0) return logu;  // G = u - u^2/2 + ..., log G = log u to fp precision
  const double u = std::exp(logu);
  return std::log(-std::expm1(-u));
}

}  // namespace detail

inline double ew_density(const ExpWeibullParams& p, double x) {
  validate(p);
  if (!std::isfinite(x)) throw std::domain_error("ew_density: non-finite x");
  if (x < 0.0) return 0.0;
  if (x == 0.0) {
    // limit of (a*k/l)(x/l)^(a*k - 1) as x -> 0+
    const double ak = p.power * p.shape;
    if (ak > 1.0) return 0.0;
    if (ak == 1.0) return p.power * p.shape / p.scale;
    return std::numeric_limits<double>::infinity();
  }
  const double logu = p.shape * std::log(x / p.scale);
  const double u = std::exp(logu);
  const double logG = detail::ew_log_base_cdf(p, x);
  const double lf = std::log(p.power * p.shape / p.scale) +
                    (p.shape - 1.0) * std::log(x / p.scale) +
                    (p.power - 1.0) * logG - u;
  return std::exp(lf);
}

inline double ew_cdf(const ExpWeibullParams& p, double x) {
  validate(p);
  if (!std::isfinite(x)) throw std::domain_error("ew_cdf: non-finite x");
  if (x <= 0.0) return 0.0;
  return std::exp(p.power * detail::ew_log_base_cdf(p, x));
}

inline double ew_survival(const ExpWeibullParams& p, double x) {
  validate(p);
  if (!std::isfinite(x)) throw std::domain_error("ew_survival: non-finite x");
  if (x <= 0.0) return 1.0;
  return -std::expm1(p.power * detail::ew_log_base_cdf(p, x));
}

inline double ew_quantile(const ExpWeibullParams& p, double prob) {
  validate(p);
  if (!(prob >= 0.0) || !(prob < 1.0))
    throw std::domain_error("ew_quantile: p must lie in [0, 1)");
  if (prob == 0.0) return 0.0;
  if (p.power == 1.0)  // Weibull closed form
    return p.scale * std::pow(-std::log1p(-prob), 1.0 / p.shape);
  double lo = 0.0;
  double hi = p.scale * std::pow(-std::log(1e-300), 1.0 / p.shape);
  double mid = 0.5 * hi;
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double fm = ew_cdf(p, mid);
    if (std::fabs(fm - prob) <= 1e-12) return mid;
    (fm < prob ? lo : hi) = mid;
    if (hi - lo <= 1e-15 * std::max(1.0, hi)) break;
  }
  return mid;
}

inline double ew_hazard(const ExpWeibullParams& p, double x) {
  const double s = ew_survival(p, x);
  if (s <= 0.0)
    throw std::domain_error("ew_hazard: undefined (infinite) where survival is zero");
  return ew_density(p, x) / s;
}

// T(p) = integral of the survival function from 0 to Q(p)
inline double ew_ttt(const ExpWeibullParams& p, double prob) {
  const double q = ew_quantile(p, prob);
  if (q == 0.0) return 0.0;
  return integrate([&](double x) { return ew_survival(p, x); }, 0.0, q, 1e-10).value;
}

inline double ew_mean(const ExpWeibullParams& p) {
  validate(p);
  // beyond u = (x/l)^k with S ~ a*exp(-u), survival mass is below fp noise
  const double u_cut = std::log(p.power / 1e-13) + 2.0;
  const double hi = p.scale * std::pow(std::max(u_cut, 1e-3), 1.0 / p.shape);
  return integrate([&](double x) { return ew_survival(p, x); }, 0.0, hi, 1e-12).value;
}

inline std::vector<double> ew_sample(const ExpWeibullParams& p, std::size_t m,
                                     KeyedRng& rng) {
  validate(p);
  if (m < 1) throw std::invalid_argument("ew_sample: m must be >= 1");
  std::vector<double> v(m);
  for (std::size_t j = 0; j < m; ++j) v[j] = ew_quantile(p, rng.uniform01());
  return v;
}

inline std::vector<double> ew_sample(const ExpWeibullParams& p, std::size_t m,
                                     std::uint64_t seed, std::uint64_t stream = 0) {
  KeyedRng rng(seed, stream);
  return ew_sample(p, m, rng);
}

}  // namespace distrep
