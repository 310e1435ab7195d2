#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fd_oracle.hpp"
#include "linrec/special.hpp"
#include "oracle_values.hpp"
#include "test_util.hpp"

using namespace linrec;
using testutil::rel_err;

namespace {

/// K_nu(r) = int_0^inf exp(-r cosh t) cosh(nu t) dt by the trapezoid rule,
/// which converges geometrically for this analytic, decaying integrand.
double bessel_k_quadrature(int nu, double r) {
  const double h = 1.0 / 64;
  double sum = 0.5 * std::exp(-r);
  for (int k = 1;; ++k) {
    const double t = k * h;
    const double term = std::exp(-r * std::cosh(t) + nu * t) * 0.5 * (1 + std::exp(-2 * nu * t));
    sum += term;
    if (term < 1e-18 * sum && r * std::cosh(t) > nu * t + 50) break;
  }
  return h * sum;
}

}  // namespace

TEST_CASE("bessel_k reference values at r = 1") {
  CHECK(rel_err(bessel_k<double>(0, 1.0), 0.42102443824070834) < 1e-14);
  CHECK(rel_err(bessel_k<double>(1, 1.0), 0.6019072301972346) < 1e-14);
  CHECK(rel_err(bessel_k<double>(2, 1.0), 1.6248388986351776) < 1e-14);
  CHECK(rel_err(bessel_k<double>(2, 1.0), bessel_k<double>(0, 1.0) + 2 * bessel_k<double>(1, 1.0)) < 1e-15);
}

TEST_CASE("bessel_k matches the high-precision table on [1e-6, 30]") {
  for (const auto& e : oracle::kBessel) {
    CAPTURE(e.nu);
    CAPTURE(e.r);
    CHECK(rel_err(bessel_k<double>(e.nu, e.r), e.value) < 1e-10);
    CHECK(rel_err(to_double(bessel_k<Quad>(e.nu, Quad(e.r))), e.value) < 1e-15);
  }
}

TEST_CASE("bessel_k agrees with the integral representation") {
  for (int nu = 0; nu <= 8; ++nu)
    for (double r : {0.25, 0.5, 1.0, 2.0, 5.0, 12.0, 30.0}) {
      CAPTURE(nu);
      CAPTURE(r);
      CHECK(rel_err(bessel_k<double>(nu, r), bessel_k_quadrature(nu, r)) < 1e-10);
    }
}

TEST_CASE("bessel_k satisfies the three-term recurrence") {
  for (int nu = 1; nu <= 10; ++nu)
    for (double r = 0.1; r <= 10.0; r *= 1.37) {
      const double lhs = bessel_k<double>(nu + 1, r);
      const double rhs = bessel_k<double>(nu - 1, r) + 2 * nu / r * bessel_k<double>(nu, r);
      CHECK(rel_err(lhs, rhs) < 1e-9);
    }
}

TEST_CASE("bessel_k rejects non-positive radii and negative orders") {
  CHECK_THROWS_AS(bessel_k<double>(0, 0.0), std::domain_error);
  CHECK_THROWS_AS(bessel_k<double>(2, -1.0), std::domain_error);
  CHECK_THROWS_AS(bessel_k<double>(-1, 1.0), std::invalid_argument);
}

TEST_CASE("matern_g limits and values") {
  CHECK(matern_g<double>(2, 0.0) == 2.0);
  CHECK(matern_g<double>(6, 0.0) == 3840.0);
  CHECK(rel_err(matern_g<double>(2, 1.0), 1.6248388986351776) < 1e-13);
  CHECK(std::isinf(matern_g<double>(0, 0.0)));
}

TEST_CASE("matern_g is continuous at the origin") {
  // g_1(r) - 1 ~ (r^2 / 2) log r, so at r = 1e-4 order 1 sits at 5e-8.
  for (int nu = 1; nu <= 8; ++nu) {
    const double limit = std::ldexp(std::tgamma(nu), nu - 1);
    for (double r : {1e-8, 1e-6, 1e-4}) {
      if (nu == 1 && r > 1e-6) continue;
      CAPTURE(nu);
      CAPTURE(r);
      CHECK(rel_err(matern_g<double>(nu, r), limit) < 1e-8);
    }
  }
}

TEST_CASE("matern_g is positive and decreasing") {
  for (int nu = 1; nu <= 8; ++nu) {
    double prev = matern_g<double>(nu, 0.0);
    for (double r = 0.01; r < 40; r *= 1.2) {
      const double v = matern_g<double>(nu, r);
      CHECK(v > 0);
      CHECK(v < prev);
      prev = v;
    }
  }
}

TEST_CASE("series and direct branches agree at the switch radius") {
  for (int nu = 1; nu <= 8; ++nu) {
    const double r = kSeriesSwitchRadius;
    const double series = to_double(detail::matern_g_series<Quad>(nu, Quad(r)));
    const double direct = to_double(ipow(Quad(r), nu) * bessel_k<Quad>(nu, Quad(r)));
    CHECK(rel_err(series, direct) < 1e-14);
  }
}

TEST_CASE("laplacian profiles match the high-precision table") {
  for (const auto& e : oracle::kProfile) {
    CAPTURE(e.nu);
    CAPTURE(e.laplacians);
    CAPTURE(e.r);
    CHECK(rel_err(matern_laplacian_profile<double>(e.nu, 2, e.laplacians, e.r), e.value) < 1e-10);
    CHECK(rel_err(to_double(matern_laplacian_profile<Quad>(e.nu, 2, e.laplacians, Quad(e.r))), e.value) < 1e-15);
  }
}

TEST_CASE("laplacian profile examples") {
  CHECK(matern_laplacian_profile<double>(2, 2, 0, 0.5) == matern_g<double>(2, 0.5));
  const double one = matern_laplacian_profile<double>(6, 2, 1, 0.7);
  CHECK(rel_err(one, -2 * matern_g<double>(5, 0.7) + 0.49 * matern_g<double>(4, 0.7)) < 1e-13);
  CHECK(rel_err(one, fd::laplacian_profile(6, 1, 0.7)) < 1e-6);
  CHECK(rel_err(matern_laplacian_profile<double>(6, 2, 2, 0.7), fd::laplacian_profile(6, 2, 0.7)) < 1e-5);
}

TEST_CASE("laplacian profile at the origin is the limit of nearby values") {
  for (int nu = 2; nu <= 7; ++nu)
    for (int L = 0; L <= 2 && nu - L >= 1; ++L) {
      CAPTURE(nu);
      CAPTURE(L);
      const double at0 = matern_laplacian_profile<double>(nu, 2, L, 0.0);
      const double near = matern_laplacian_profile<double>(nu, 2, L, 1e-7);
      CHECK(std::isfinite(at0));
      CHECK(rel_err(near, at0) < 1e-6);
    }
}

TEST_CASE("laplacian profile finite-difference oracle at random radii") {
  auto gen = testutil::rng();
  std::uniform_real_distribution<double> radius(0.05, 2.5);
  for (int nu : {4, 5, 6})
    for (int L : {1, 2})
      for (int k = 0; k < 100; ++k) {
        const double r = radius(gen);
        CAPTURE(nu);
        CAPTURE(L);
        CAPTURE(r);
        CHECK(rel_err(matern_laplacian_profile<double>(nu, 2, L, r), fd::laplacian_profile(nu, L, r)) < 1e-5);
      }
}

TEST_CASE("inadmissible profiles") {
  CHECK_FALSE(profile_admissible(2, 2));
  CHECK(profile_admissible(3, 2));
  CHECK_THROWS_AS(matern_laplacian_profile<double>(2, 2, 2, 0.0), OrderTooLow);
  CHECK_THROWS_AS(matern_laplacian_profile<double>(2, 2, 2, 0.3), OrderTooLow);
  // with a floor the divergent value is evaluated at max(r, floor)
  const double floored = matern_laplacian_profile<double>(2, 2, 2, 0.0, 1e-16);
  CHECK(std::isfinite(floored));
  CHECK(floored == matern_laplacian_profile<double>(2, 2, 2, 1e-16, 1e-16));
  CHECK(rel_err(matern_laplacian_profile<double>(2, 2, 2, 0.3, 1e-16), fd::laplacian_profile(2, 2, 0.3)) < 1e-5);
  CHECK_THROWS_AS(matern_laplacian_profile<double>(4, 3, 1, 0.5), std::invalid_argument);
}

TEST_CASE("normalization constant and kernel diagonal") {
  CHECK(rel_err(matern_normalization<double>(7), std::pow(2.0, -6) / 720) < 1e-15);
  CHECK(matern_normalization<double>(3) * matern_g<double>(2, 0.0) == 0.25);
  CHECK(rel_err(matern_normalization<double>(7) * matern_g<double>(6, 0.0), 1.0 / 12) < 1e-15);
}
