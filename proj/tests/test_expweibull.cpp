#include <catch2/catch.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "distrep/expweibull.hpp"
#include "distrep/quadrature.hpp"
#include "distrep/rng.hpp"

using namespace distrep;

namespace {

// composite Simpson with uniform refinement until stable; independent of
// the adaptive Gauss-Kronrod used by the implementation
template <class F>
double simpson(const F& f, double a, double b, double tol = 1e-11) {
  std::size_t n = 64;
  auto pass = [&](std::size_t segments) {
    const double h = (b - a) / static_cast<double>(segments);
    double acc = f(a) + f(b);
    for (std::size_t i = 1; i < segments; ++i)
      acc += f(a + h * static_cast<double>(i)) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
  };
  double prev = pass(n);
  for (int it = 0; it < 14; ++it) {
    n *= 2;
    const double cur = pass(n);
    if (std::fabs(cur - prev) < tol * (std::fabs(cur) + 1.0)) return cur;
    prev = cur;
  }
  return prev;
}

const std::vector<ExpWeibullParams> kPresets = {
    hazard_shape_params(HazardShape::Constant), hazard_shape_params(HazardShape::Decreasing),
    hazard_shape_params(HazardShape::Increasing), hazard_shape_params(HazardShape::Bathtub),
    hazard_shape_params(HazardShape::Unimodal)};

}  // namespace

TEST_CASE("hazard shape presets carry the canonical parameter triples", "[expweibull]") {
  auto p = hazard_shape_params(HazardShape::Constant);
  REQUIRE(p.scale == 20.0);
  REQUIRE(p.shape == 1.0);
  REQUIRE(p.power == 1.0);
  p = hazard_shape_params(HazardShape::Decreasing);
  REQUIRE(p.scale == 5.0);
  REQUIRE(p.shape == 0.5);
  REQUIRE(p.power == 2.0);
  p = hazard_shape_params(HazardShape::Increasing);
  REQUIRE(p.scale == 50.0);
  REQUIRE(p.shape == 2.0);
  REQUIRE(p.power == 2.0);
  p = hazard_shape_params(HazardShape::Bathtub);
  REQUIRE(p.scale == 150.0);
  REQUIRE(p.shape == 4.0);
  REQUIRE(p.power == 0.15);
  p = hazard_shape_params(HazardShape::Unimodal);
  REQUIRE(p.scale == 5.0);
  REQUIRE(p.shape == 0.55);
  REQUIRE(p.power == 4.0);
}

TEST_CASE("density: exponential special case and CDF-derivative oracle", "[expweibull]") {
  const ExpWeibullParams expo{20.0, 1.0, 1.0};

  SECTION("reduces to Exponential(20)") {
    REQUIRE(ew_density(expo, 0.0) == Approx(0.05).epsilon(1e-12));
    REQUIRE(ew_density(expo, 20.0) == Approx(std::exp(-1.0) / 20.0).epsilon(1e-12));
    // pointwise agreement with the exponential density
    for (double x : {0.1, 1.0, 5.0, 20.0, 60.0})
      REQUIRE(ew_density(expo, x) == Approx(std::exp(-x / 20.0) / 20.0).margin(1e-12));
  }

  SECTION("matches central difference of the CDF at x = 1 for the unimodal preset") {
    const ExpWeibullParams p{5.0, 0.55, 4.0};
    const double eps = 1e-5;
    const double oracle = (ew_cdf(p, 1.0 + eps) - ew_cdf(p, 1.0 - eps)) / (2.0 * eps);
    REQUIRE(ew_density(p, 1.0) == Approx(oracle).margin(1e-6));
  }

  SECTION("negative and non-finite arguments") {
    REQUIRE(ew_density(expo, -3.0) == 0.0);
    REQUIRE_THROWS_AS(ew_density(expo, std::nan("")), std::domain_error);
  }

  SECTION("rejects non-positive parameters") {
    REQUIRE_THROWS_AS(ew_density({0.0, 1.0, 1.0}, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(ew_density({1.0, -1.0, 1.0}, 1.0), std::invalid_argument);
  }
}

TEST_CASE("cdf: closed form and integral cross-check", "[expweibull]") {
  REQUIRE(ew_cdf({20.0, 1.0, 1.0}, 20.0) == Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
  REQUIRE(ew_cdf({5.0, 0.5, 2.0}, 0.0) == 0.0);

  // F(5; 5, 0.5, 2) = (1 - e^{-1})^2
  const ExpWeibullParams p{5.0, 0.5, 2.0};
  const double closed = std::pow(1.0 - std::exp(-1.0), 2.0);
  REQUIRE(closed == Approx(0.39958).margin(5e-6));
  REQUIRE(ew_cdf(p, 5.0) == Approx(closed).epsilon(1e-12));
  const double integral = simpson([&](double x) { return ew_density(p, x); }, 1e-12, 5.0);
  REQUIRE(ew_cdf(p, 5.0) == Approx(integral).margin(1e-7));

  SECTION("monotone nondecreasing") {
    double prev = 0.0;
    for (double x = 0.0; x <= 40.0; x += 0.25) {
      const double f = ew_cdf(p, x);
      REQUIRE(f >= prev);
      prev = f;
    }
  }
}

TEST_CASE("quantile: closed-form cases and bisection oracle", "[expweibull]") {
  REQUIRE(ew_quantile({20.0, 1.0, 1.0}, 1.0 - std::exp(-1.0)) == Approx(20.0).epsilon(1e-10));
  REQUIRE(ew_quantile({5.0, 0.5, 2.0}, 0.0) == 0.0);

  SECTION("bathtub median against an independent bisection") {
    const ExpWeibullParams p{150.0, 4.0, 0.15};
    double lo = 0.0, hi = 1500.0;
    while (hi - lo > 1e-11) {
      const double mid = 0.5 * (lo + hi);
      (ew_cdf(p, mid) < 0.5 ? lo : hi) = mid;
    }
    REQUIRE(ew_quantile(p, 0.5) == Approx(0.5 * (lo + hi)).margin(1e-7));
  }

  SECTION("round trip cdf(quantile(p)) = p on all presets") {
    for (const auto& p : kPresets)
      for (int i = 1; i <= 99; ++i) {
        const double prob = static_cast<double>(i) / 100.0;
        REQUIRE(ew_cdf(p, ew_quantile(p, prob)) == Approx(prob).margin(1e-9));
      }
  }

  SECTION("domain errors") {
    REQUIRE_THROWS_AS(ew_quantile({5.0, 0.5, 2.0}, 1.0), std::domain_error);
    REQUIRE_THROWS_AS(ew_quantile({5.0, 0.5, 2.0}, -0.1), std::domain_error);
  }
}

TEST_CASE("hazard: constant, increasing and bathtub shapes", "[expweibull]") {
  SECTION("exponential has constant hazard 1/20") {
    for (double x : {0.5, 3.0, 17.0, 55.0})
      REQUIRE(ew_hazard({20.0, 1.0, 1.0}, x) == Approx(0.05).epsilon(1e-12));
  }

  SECTION("increasing preset is monotone on a grid") {
    const ExpWeibullParams p{50.0, 2.0, 2.0};
    REQUIRE(ew_hazard(p, 10.0) < ew_hazard(p, 40.0));
    double prev = 0.0;
    for (double x = 2.0; x <= 120.0; x += 2.0) {
      const double h = ew_hazard(p, x);
      REQUIRE(h > prev);
      prev = h;
    }
  }

  SECTION("bathtub preset dips in the interior") {
    const ExpWeibullParams p{150.0, 4.0, 0.15};
    const double near_zero = ew_hazard(p, 1.0);
    const double late = ew_hazard(p, 300.0);
    double interior_min = near_zero;
    for (double x = 1.0; x <= 300.0; x += 1.0)
      interior_min = std::min(interior_min, ew_hazard(p, x));
    REQUIRE(interior_min < near_zero);
    REQUIRE(interior_min < late);
  }

  SECTION("undefined where survival underflows to zero") {
    REQUIRE_THROWS_AS(ew_hazard({20.0, 1.0, 1.0}, 1e6), std::domain_error);
  }
}

TEST_CASE("ttt: linear for the exponential, quadrature oracle otherwise", "[expweibull]") {
  SECTION("T(p) = 20 p for Exponential(20)") {
    const ExpWeibullParams expo{20.0, 1.0, 1.0};
    for (double prob : {0.05, 0.3, 0.5, 0.75, 0.95})
      REQUIRE(ew_ttt(expo, prob) == Approx(20.0 * prob).epsilon(1e-9));
    REQUIRE(ew_ttt(expo, 0.0) == 0.0);
  }

  SECTION("decreasing preset at p = 0.9 against a Simpson oracle") {
    const ExpWeibullParams p{5.0, 0.5, 2.0};
    const double q = ew_quantile(p, 0.9);
    const double oracle = simpson([&](double x) { return ew_survival(p, x); }, 0.0, q);
    REQUIRE(ew_ttt(p, 0.9) == Approx(oracle).margin(1e-8));
  }

  SECTION("derivative identity dT/dp = 1 / hazard(Q(p))") {
    const double dp = 1e-6;
    for (const auto& p : kPresets)
      for (double prob : {0.2, 0.5, 0.8}) {
        const double deriv = (ew_ttt(p, prob + dp) - ew_ttt(p, prob - dp)) / (2.0 * dp);
        const double expected = 1.0 / ew_hazard(p, ew_quantile(p, prob));
        REQUIRE(deriv == Approx(expected).epsilon(1e-3));
      }
  }

  SECTION("T(p -> 1) approaches the quadrature mean") {
    for (const auto& p : kPresets) {
      const double mean = ew_mean(p);
      const double t = ew_ttt(p, 0.9999);
      REQUIRE(t <= mean + 1e-9);
      REQUIRE(t == Approx(mean).epsilon(1e-3));
      // exact gap: mean - T(p) = integral of S beyond Q(p)
      const double q = ew_quantile(p, 0.9999);
      const double tail = mean - simpson([&](double x) { return ew_survival(p, x); }, 0.0, q);
      REQUIRE(mean - t == Approx(tail).epsilon(1e-5));
    }
  }
}

TEST_CASE("density integrates to one on all presets", "[expweibull]") {
  for (const auto& p : kPresets) {
    const double hi = ew_quantile(p, 1.0 - 1e-10);
    const double mass = integrate([&](double x) { return ew_density(p, x); }, 0.0, hi, 1e-10).value;
    REQUIRE(mass == Approx(1.0).margin(1e-6));
  }
}

TEST_CASE("sampling: moments, determinism, KS distance", "[expweibull]") {
  const ExpWeibullParams expo{20.0, 1.0, 1.0};

  SECTION("CLT bound on the mean at m = 1000") {
    const auto v = ew_sample(expo, 1000, 7);
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    REQUIRE(std::fabs(mean - 20.0) < 4.0 * 20.0 / std::sqrt(1000.0));
  }

  SECTION("same seed gives identical output") {
    REQUIRE(ew_sample(expo, 100, 42) == ew_sample(expo, 100, 42));
    REQUIRE(ew_sample(expo, 100, 42) != ew_sample(expo, 100, 43));
    REQUIRE(ew_sample(expo, 100, 42, 0) != ew_sample(expo, 100, 42, 1));
  }

  SECTION("KS statistic below 1.95/sqrt(m) at m = 1e5") {
    for (const auto& p : kPresets) {
      const std::size_t m = 100000;
      auto v = ew_sample(p, m, 11);
      std::sort(v.begin(), v.end());
      double ks = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double f = ew_cdf(p, v[i]);
        ks = std::max(ks, std::fabs(f - static_cast<double>(i + 1) / m));
        ks = std::max(ks, std::fabs(f - static_cast<double>(i) / m));
      }
      REQUIRE(ks < 1.95 / std::sqrt(static_cast<double>(m)));
    }
  }
}

TEST_CASE("quadrature module reproduces closed forms", "[quadrature]") {
  REQUIRE(integrate([](double x) { return x * x; }, 0.0, 3.0).value == Approx(9.0).epsilon(1e-12));
  REQUIRE(integrate([](double x) { return std::exp(-x); }, 0.0, 50.0).value ==
          Approx(1.0).epsilon(1e-10));
  // integrable endpoint singularity
  REQUIRE(integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, 1e-10).value ==
          Approx(2.0).margin(1e-6));
}
