#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <vector>

namespace distrep {

struct QuadResult {
  double value = 0.0;
  double abserr = 0.0;
  std::size_t evaluations = 0;
};

namespace detail {

// Gauss-Kronrod 7-15 pair on [-1, 1] (QUADPACK abscissae/weights).
inline constexpr double kGk15Nodes[8] = {
    0.0,
    0.2077849550078984676006894037732449,
    0.4058451513773971669066064120769615,
    0.5860872354676911302941448382587296,
    0.7415311855993944398638647732807884,
    0.8648644233597690727897127886409262,
    0.9491079123427585245261896840478513,
    0.9914553711208126392068546975263285};

inline constexpr double kGk15Weights[8] = {
    0.2094821410847278280129991748917143,
    0.2044329400752988924141619992346491,
    0.1903505780647854099132564024210137,
    0.1690047266392679028265834265985503,
    0.1406532597155259187451895905102379,
    0.1047900103222501838398763225415180,
    0.0630920926299785532907006631892043,
    0.0229353220105292249637320080589695};

// Gauss-7 weights sit on Kronrod nodes 0, 2, 4, 6.
inline constexpr double kG7Weights[4] = {
    0.4179591836734693877551020408163265,
    0.3818300505051189449503697754889751,
    0.2797053914892766679014677714237796,
    0.1294849661688696932706114326790820};

template <class F>
inline void gk15(const F& f, double a, double b, double& kronrod, double& err) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double fv[15];
  fv[0] = f(c);
  for (int i = 1; i < 8; ++i) {
    const double dx = h * kGk15Nodes[i];
    fv[2 * i - 1] = f(c - dx);
    fv[2 * i] = f(c + dx);
  }
  double k = kGk15Weights[0] * fv[0];
  for (int i = 1; i < 8; ++i) k += kGk15Weights[i] * (fv[2 * i - 1] + fv[2 * i]);
  double g = kG7Weights[0] * fv[0];
  for (int i = 1; i < 4; ++i) g += kG7Weights[i] * (fv[4 * i - 1] + fv[4 * i]);
  kronrod = k * h;
  err = std::fabs((k - g) * h);
}

struct QuadSegment {
  double a, b, value, err;
  bool operator<(const QuadSegment& o) const { return err < o.err; }
};

}  // namespace detail

// Adaptive Gauss-Kronrod quadrature of f over [a, b]: repeatedly bisect the
// segment with the largest error estimate. Segments whose split no longer
// reduces the estimate (fp noise, hard singularities) are frozen so the
// routine always terminates.
template <class F>
inline QuadResult integrate(const F& f, double a, double b,
                            double rel_tol = 1e-10, double abs_tol = 0.0,
                            std::size_t max_segments = 2000) {
  QuadResult out;
  if (!(a < b)) return out;

  std::priority_queue<detail::QuadSegment> active;
  double frozen_value = 0.0, frozen_err = 0.0;
  double active_value = 0.0, active_err = 0.0;

  detail::QuadSegment root{a, b, 0.0, 0.0};
  detail::gk15(f, a, b, root.value, root.err);
  out.evaluations += 15;
  active.push(root);
  active_value = root.value;
  active_err = root.err;

  std::size_t segments = 1;
  while (!active.empty() && segments < max_segments) {
    const double total = frozen_value + active_value;
    const double tol = std::max(abs_tol, rel_tol * std::fabs(total));
    if (frozen_err + active_err <= tol) break;

    detail::QuadSegment worst = active.top();
    active.pop();
    active_value -= worst.value;
    active_err -= worst.err;

    const double mid = 0.5 * (worst.a + worst.b);
    if (!(worst.a < mid && mid < worst.b)) {  // width at fp resolution
      frozen_value += worst.value;
      frozen_err += worst.err;
      continue;
    }
    detail::QuadSegment left{worst.a, mid, 0.0, 0.0}, right{mid, worst.b, 0.0, 0.0};
    detail::gk15(f, left.a, left.b, left.value, left.err);
    detail::gk15(f, right.a, right.b, right.value, right.err);
    out.evaluations += 30;
    ++segments;

    if (left.err + right.err >= 0.999 * worst.err &&
        worst.err <= 1e-10 * (std::fabs(frozen_value + active_value) + 1.0)) {
      // stalled on noise: keep the refined values but stop splitting here
      frozen_value += left.value + right.value;
      frozen_err += left.err + right.err;
      continue;
    }
    active.push(left);
    active.push(right);
    active_value += left.value + right.value;
    active_err += left.err + right.err;
  }

  out.value = frozen_value + active_value;
  out.abserr = frozen_err + active_err;
  return out;
}

}  // namespace distrep
