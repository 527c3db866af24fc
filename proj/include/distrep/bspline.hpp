#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "distrep/curve.hpp"
#include "distrep/errors.hpp"

namespace distrep {

// B-spline basis on an open (clamped) uniform knot vector.
struct BasisSpec {
  int num_basis = 10;
  int degree = 3;
  double a = 0.0;
  double b = 1.0;
};

inline void validate(const BasisSpec& s) {
  if (s.degree < 1) throw config_error("basis spec: degree must be >= 1");
  if (s.num_basis < s.degree + 1)
    throw config_error("basis spec: num_basis must be >= degree + 1");
  if (!(s.a < s.b)) throw config_error("basis spec: domain must satisfy a < b");
}

inline std::vector<double> open_uniform_knots(const BasisSpec& s) {
  validate(s);
  const int p = s.degree, k = s.num_basis;
  std::vector<double> knots(k + p + 1);
  const int spans = k - p;
  for (int i = 0; i <= k + p; ++i) {
    if (i <= p)
      knots[i] = s.a;
    else if (i >= k)
      knots[i] = s.b;
    else
      knots[i] = s.a + (s.b - s.a) * static_cast<double>(i - p) / static_cast<double>(spans);
  }
  return knots;
}

namespace detail {

inline int find_span(const std::vector<double>& knots, int num_basis, int degree, double u) {
  if (u >= knots[num_basis]) return num_basis - 1;  // right-closed at the domain end
  int lo = degree, hi = num_basis;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    (u < knots[mid] ? hi : lo) = mid;
  }
  return lo;
}

// Nonzero basis values N_{span-p..span, p}(u); Cox-de Boor in the banded form.
inline void basis_funs(const std::vector<double>& knots, int span, double u, int p,
                       double* out) {
  double left[16], right[16];
  out[0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = u - knots[span + 1 - j];
    right[j] = knots[span + j] - u;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = out[r] / (right[r + 1] + left[j - r]);
      out[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    out[j] = saved;
  }
}

// Values and derivatives up to order n of the p+1 nonzero basis functions at u;
// ders is (n+1) x (p+1) row-major.
inline void ders_basis_funs(const std::vector<double>& knots, int span, double u, int p,
                            int n, double* ders) {
  double ndu[16][16], a[2][16], left[16], right[16];
  ndu[0][0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = u - knots[span + 1 - j];
    right[j] = knots[span + j] - u;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu[j][r] = right[r + 1] + left[j - r];
      const double temp = ndu[r][j - 1] / ndu[j][r];
      ndu[r][j] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu[j][j] = saved;
  }
  for (int j = 0; j <= p; ++j) ders[j] = ndu[j][p];
  for (int k = 1; k <= n; ++k)
    for (int j = 0; j <= p; ++j) ders[k * (p + 1) + j] = 0.0;

  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    a[0][0] = 1.0;
    for (int k = 1; k <= n; ++k) {
      double d = 0.0;
      const int rk = r - k, pk = p - k;
      if (r >= k) {
        a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
        d = a[s2][0] * ndu[rk][pk];
      }
      const int j1 = rk >= -1 ? 1 : -rk;
      const int j2 = r - 1 <= pk ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
        d += a[s2][j] * ndu[rk + j][pk];
      }
      if (r <= pk) {
        a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
        d += a[s2][k] * ndu[r][pk];
      }
      ders[k * (p + 1) + r] = d;
      std::swap(s1, s2);
    }
  }
  double factor = static_cast<double>(p);
  for (int k = 1; k <= n; ++k) {
    for (int j = 0; j <= p; ++j) ders[k * (p + 1) + j] *= factor;
    factor *= static_cast<double>(p - k);
  }
}

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(3.14159265358979323846 * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

}  // namespace detail

// G x num_basis matrix of basis values; row g holds B_k(z_g).
inline Eigen::MatrixXd eval_basis(const BasisSpec& spec, const std::vector<double>& z) {
  validate(spec);
  if (spec.degree > 15) throw config_error("basis spec: degree too high");
  const auto knots = open_uniform_knots(spec);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(z.size()), spec.num_basis);
  double vals[16];
  for (std::size_t g = 0; g < z.size(); ++g) {
    const double u = z[g];
    if (u < spec.a - 1e-12 || u > spec.b + 1e-12)
      throw std::domain_error("eval_basis: point outside basis domain");
    const double uc = std::min(std::max(u, spec.a), spec.b);
    const int span = detail::find_span(knots, spec.num_basis, spec.degree, uc);
    detail::basis_funs(knots, span, uc, spec.degree, vals);
    for (int j = 0; j <= spec.degree; ++j)
      out(static_cast<Eigen::Index>(g), span - spec.degree + j) = vals[j];
  }
  return out;
}

// G x num_basis matrix of order-th derivatives.
inline Eigen::MatrixXd eval_basis_derivative(const BasisSpec& spec, const std::vector<double>& z,
                                             int order) {
  validate(spec);
  if (order < 0 || order > spec.degree)
    throw config_error("eval_basis_derivative: order must lie in [0, degree]");
  const auto knots = open_uniform_knots(spec);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(z.size()), spec.num_basis);
  std::vector<double> ders((order + 1) * (spec.degree + 1));
  for (std::size_t g = 0; g < z.size(); ++g) {
    const double u = z[g];
    if (u < spec.a - 1e-12 || u > spec.b + 1e-12)
      throw std::domain_error("eval_basis_derivative: point outside basis domain");
    const double uc = std::min(std::max(u, spec.a), spec.b);
    const int span = detail::find_span(knots, spec.num_basis, spec.degree, uc);
    detail::ders_basis_funs(knots, span, uc, spec.degree, order, ders.data());
    for (int j = 0; j <= spec.degree; ++j)
      out(static_cast<Eigen::Index>(g), span - spec.degree + j) =
          ders[order * (spec.degree + 1) + j];
  }
  return out;
}

// Curvature penalty P_{kl} = int B_k''(z) B_l''(z) dz, integrated exactly by
// per-span Gauss-Legendre (the integrand is piecewise polynomial).
inline Eigen::MatrixXd build_penalty(const BasisSpec& spec) {
  validate(spec);
  if (spec.degree < 2)
    throw config_error("build_penalty: second-derivative penalty needs degree >= 2");
  const auto knots = open_uniform_knots(spec);
  const int p = spec.degree;
  std::vector<double> nodes, weights;
  detail::gauss_legendre(std::max(3, p), nodes, weights);

  Eigen::MatrixXd pen = Eigen::MatrixXd::Zero(spec.num_basis, spec.num_basis);
  std::vector<double> ders(3 * (p + 1));
  for (int span = p; span < spec.num_basis; ++span) {
    const double lo = knots[span], hi = knots[span + 1];
    if (!(hi > lo)) continue;
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      const double u = mid + half * nodes[q];
      detail::ders_basis_funs(knots, span, u, p, 2, ders.data());
      const double w = weights[q] * half;
      for (int j = 0; j <= p; ++j)
        for (int l = 0; l <= p; ++l)
          pen(span - p + j, span - p + l) += w * ders[2 * (p + 1) + j] * ders[2 * (p + 1) + l];
    }
  }
  return pen;
}

// W_{ik} = int D_i(z) B_k(z) dz by trapezoid on the shared curve grid, with
// the grid mapped affinely onto the basis domain.
inline Eigen::MatrixXd functional_weights(const std::vector<Curve>& curves,
                                          const BasisSpec& spec) {
  validate(spec);
  if (curves.empty()) throw data_error("functional_weights: no curves");
  const auto& grid = curves.front().grid;
  if (grid.size() < 2) throw data_error("functional_weights: need at least 2 grid points");
  for (const auto& c : curves)
    if (c.grid != grid) throw data_error("functional_weights: curves on mismatched grids");

  const double g0 = grid.front(), g1 = grid.back();
  if (!(g1 > g0)) throw data_error("functional_weights: degenerate curve grid");
  const std::size_t n_pts = grid.size();
  std::vector<double> z(n_pts);
  for (std::size_t i = 0; i < n_pts; ++i)
    z[i] = spec.a + (spec.b - spec.a) * (grid[i] - g0) / (g1 - g0);

  Eigen::VectorXd w(static_cast<Eigen::Index>(n_pts));
  w(0) = 0.5 * (z[1] - z[0]);
  for (std::size_t i = 1; i + 1 < n_pts; ++i) w(static_cast<Eigen::Index>(i)) = 0.5 * (z[i + 1] - z[i - 1]);
  w(static_cast<Eigen::Index>(n_pts - 1)) = 0.5 * (z[n_pts - 1] - z[n_pts - 2]);

  const Eigen::MatrixXd basis = eval_basis(spec, z);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(curves.size()), spec.num_basis);
  for (std::size_t i = 0; i < curves.size(); ++i) {
    Eigen::VectorXd dv(static_cast<Eigen::Index>(n_pts));
    for (std::size_t gpt = 0; gpt < n_pts; ++gpt)
      dv(static_cast<Eigen::Index>(gpt)) = curves[i].values[gpt] * w(static_cast<Eigen::Index>(gpt));
    out.row(static_cast<Eigen::Index>(i)) = (basis.transpose() * dv).transpose();
  }
  return out;
}

}  // namespace distrep
