#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "critfield/covariance.hpp"
#include "critfield/qualification.hpp"

using namespace critfield;

namespace {

// Cubic with prescribed derivatives at the origin.
RadialModel taylor_model(int N, double d1, double d2, double d3) {
  return custom_model(
      N, [=](double x) { return 1 + d1 * x + d2 * x * x / 2 + d3 * x * x * x / 6; },
      [=](double x) { return d1 + d2 * x + d3 * x * x / 2; }, [=](double x) { return d2 + d3 * x; },
      [=](double) { return d3; });
}

}  // namespace

TEST_CASE("Gaussian covariance is qualified") {
  for (int N : {2, 3, 4, 5}) {
    auto rep = check_qualified(gaussian_model(N));
    INFO("N=" << N);
    CHECK(rep.overall_pass());
    CHECK(rep.get("gc2").pass);
  }
}

TEST_CASE("constants for exp(-2x)") {
  auto rep = check_qualified(gaussian_model(2, 2.0));
  // rho' = -2, rho'' = 4, rho''' = -8 and alpha = rho''^2 / rho'
  CHECK(rep.alpha == doctest::Approx(-8.0));
  CHECK(rep.beta == doctest::Approx(-8.0));
  CHECK(rep.get("alpha_beta").value == doctest::Approx(-8.0 + 40.0 / 3.0));
  CHECK(rep.get("alpha_beta").pass);
  CHECK(rep.overall_pass());
}

TEST_CASE("boundary of the spectral bound is rejected by name") {
  for (int N : {2, 3}) {
    double d2 = static_cast<double>(N) / (N + 2);
    auto rep = check_qualified(taylor_model(N, -1.0, d2, -0.5));
    CHECK_FALSE(rep.overall_pass());
    CHECK_FALSE(rep.get("spectral_bound").pass);
    CHECK(rep.get("rho1_negative").pass);
    CHECK(rep.get("rho2_positive").pass);
  }
}

TEST_CASE("sign conditions") {
  auto rep = check_qualified(taylor_model(2, -1.0, 1.0, 0.5));
  CHECK_FALSE(rep.get("rho3_negative").pass);
  auto bad = check_qualified(custom_model(
      2, [](double x) { return 1.1 - x; }, [](double) { return -1.0; }, [](double) { return 0.0; },
      [](double) { return 0.0; }));
  CHECK_FALSE(bad.get("unit_variance").pass);
  CHECK_FALSE(bad.get("rho2_positive").pass);
}

TEST_CASE("Cauchy-type family") {
  auto rep = check_qualified(cauchy_model(3, 1.0, 2.0));
  CHECK(rep.get("alpha_beta").pass);
  CHECK(rep.get("spectral_bound").pass);
  CHECK(rep.get("rho1_bounded").pass);
}

TEST_CASE("grid") {
  auto g = qualification_grid(1.0);
  CHECK(g.size() == 256);
  CHECK(g.front() > 0);
  CHECK(g.back() == doctest::Approx(1.0));
  for (size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
}

TEST_CASE("rescaling") {
  auto m = gaussian_model(4);
  auto same = rescale(m, 1.0);
  for (double x : {0.0, 0.3, 0.9})
    for (int k = 0; k < 4; ++k) CHECK(same.d(k, x) == m.d(k, x));
  auto s = rescale(m, 2.5);
  for (int k = 0; k < 4; ++k) CHECK(s.d(k, 0.0) == doctest::Approx(std::pow(2.5, k) * m.d(k, 0.0)));
  CHECK(rescale(s, 2.0).d(2, 0.0) == doctest::Approx(25.0 * m.rho2()));

  for (int N = 2; N <= 6; ++N) {
    auto g = gaussian_model(N);
    double C = find_rescaling(g);
    auto sc = rescale(g, C);
    double r1 = sc.rho1(), r2 = sc.rho2();
    double a = (32 + 8.0 * (N - 2)) * r2 / 3, b = 8 * r1 / 3, c = 4.0 * (N - 1) * r1 / 3,
           d = 2 * (1 - r1 * r1 / (3 * r2));
    double lm = (a + d - std::sqrt((a - d) * (a - d) + 4 * b * c)) / 2;
    CHECK(lm < 4 * r2);
    CHECK(rescaling_quartic(g, C) < 0);
  }
}
