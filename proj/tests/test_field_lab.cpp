#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "critfield/errors.hpp"
#include "critfield/field_lab.hpp"
#include "critfield/rice_mc.hpp"

using namespace critfield;

namespace {

constexpr double pi = std::numbers::pi;

struct MeanSe {
  double mean = 0, se = 0;
};

MeanSe mean_se(const std::vector<double>& v) {
  double s = 0, s2 = 0;
  for (double x : v) s += x;
  const double m = s / v.size();
  for (double x : v) s2 += (x - m) * (x - m);
  return {m, std::sqrt(s2 / (v.size() - 1) / v.size())};
}

FieldRealization cos_surface() {
  const int M = 128;
  const double h = 4 * pi / M;
  std::vector<double> v(M * M);
  for (int j = 0; j < M; ++j)
    for (int i = 0; i < M; ++i) v[i + M * j] = std::cos(i * h) * std::cos(j * h);
  return field_from_values(M, h, v);
}

CriticalPoint point(double x, double y, int index, double det_sign) {
  CriticalPoint p;
  p.x = x;
  p.y = y;
  p.index = index;
  p.hessian = Eigen::Matrix2d::Identity();
  p.hessian(1, 1) = det_sign;
  return p;
}

}  // namespace

TEST_CASE("sample_field has unit variance and the model correlation") {
  const RadialModel m = gaussian_model(2);
  std::vector<double> var, lag1, lag8;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const FieldRealization f = sample_field(m, Grid{}, s);
    double a = 0, b = 0, c = 0;
    for (int j = 0; j < f.M; ++j)
      for (int i = 0; i < f.M; ++i) {
        a += f.at(i, j) * f.at(i, j);
        b += f.at(i, j) * f.at((i + 1) % f.M, j);
        c += f.at(i, j) * f.at((i + 8) % f.M, j);
      }
    const double n = static_cast<double>(f.M) * f.M;
    var.push_back(a / n);
    lag1.push_back(b / n);
    lag8.push_back(c / n);
  }
  CHECK(std::abs(mean_se(var).mean - 1) < 0.05);
  const MeanSe l1 = mean_se(lag1), l8 = mean_se(lag8);
  CHECK(std::abs(l1.mean - std::exp(-1.0 / 64)) < 3 * l1.se);
  // lag vector (1, 0) in field units is eight grid steps
  CHECK(std::abs(l8.mean - std::exp(-1.0)) < 3 * l8.se);
}

TEST_CASE("sample_field is deterministic in the seed") {
  const RadialModel m = gaussian_model(2);
  const FieldRealization a = sample_field(m, Grid{64, 0.125}, 11), b = sample_field(m, Grid{64, 0.125}, 11);
  const FieldRealization c = sample_field(m, Grid{64, 0.125}, 12);
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);
  CHECK(a.seed == 11);
  CHECK(a.extent() == doctest::Approx(8.0));
}

TEST_CASE("sample_field preconditions") {
  CHECK_THROWS_AS(sample_field(gaussian_model(3), Grid{}, 1), DomainError);
  CHECK_THROWS_AS(sample_field(gaussian_model(2), Grid{32, 0.125}, 1), DomainError);
  CHECK_THROWS_AS(field_from_values(8, 0.1, std::vector<double>(10)), DomainError);
}

TEST_CASE("spline surface interpolates nodes and has consistent derivatives") {
  const FieldRealization f = sample_field(gaussian_model(2), Grid{64, 0.125}, 3);
  const SplineSurface S(f);
  double worst = 0;
  for (int j = 0; j < f.M; j += 7)
    for (int i = 0; i < f.M; i += 5) worst = std::max(worst, std::abs(S.eval(i * f.h, j * f.h).value - f.at(i, j)));
  CHECK(worst < 1e-10);

  const double x = 3.217, y = 5.031, e = 1e-5;
  const auto j0 = S.eval(x, y);
  const auto jx = S.eval(x + e, y), jxm = S.eval(x - e, y);
  const auto jy = S.eval(x, y + e), jym = S.eval(x, y - e);
  CHECK(j0.grad[0] == doctest::Approx((jx.value - jxm.value) / (2 * e)).epsilon(1e-6));
  CHECK(j0.grad[1] == doctest::Approx((jy.value - jym.value) / (2 * e)).epsilon(1e-6));
  CHECK(j0.hess(0, 0) == doctest::Approx((jx.grad[0] - jxm.grad[0]) / (2 * e)).epsilon(1e-5));
  CHECK(j0.hess(0, 1) == doctest::Approx((jy.grad[0] - jym.grad[0]) / (2 * e)).epsilon(1e-5));
  CHECK(j0.hess(1, 1) == doctest::Approx((jy.grad[1] - jym.grad[1]) / (2 * e)).epsilon(1e-5));
  // periodicity
  CHECK(S.eval(x + f.extent(), y - f.extent()).value == doctest::Approx(j0.value).epsilon(1e-12));
}

TEST_CASE("critical points of cos x cos y") {
  const FieldRealization f = cos_surface();
  const CriticalSearch cs = find_critical_points(f);
  REQUIRE(cs.points.size() == 32);
  int count[3] = {0, 0, 0};
  for (const auto& p : cs.points) {
    ++count[p.index];
    const double gx = p.x / (pi / 2), gy = p.y / (pi / 2);
    CHECK(std::abs(gx - std::round(gx)) < 1e-8);
    CHECK(std::abs(gy - std::round(gy)) < 1e-8);
    const bool extremum = static_cast<long>(std::round(gx)) % 2 == 0;
    CHECK(extremum == (static_cast<long>(std::round(gy)) % 2 == 0));
    if (p.index == 2) CHECK(p.value == doctest::Approx(1.0).epsilon(1e-3));
    if (p.index == 0) CHECK(p.value == doctest::Approx(-1.0).epsilon(1e-3));
    if (p.index == 1) CHECK(!extremum);
  }
  CHECK(count[2] == 8);
  CHECK(count[0] == 8);
  CHECK(count[1] == 16);
  CHECK(euler_count(cs.points) == 0);
  CHECK(find_critical_points(f, 0.5).points.size() == 8);
}

TEST_CASE("critical points converge, match their index and satisfy the torus Euler count") {
  const RadialModel m = gaussian_model(2);
  for (std::uint64_t s = 100; s < 120; ++s) {
    const FieldRealization f = sample_field(m, Grid{}, s);
    double scale = 0;
    for (double v : f.values) scale = std::max(scale, std::abs(v));
    const CriticalSearch cs = find_critical_points(f);
    CHECK(cs.points.size() > 100);
    CHECK(euler_count(cs.points) == 0);
    for (const auto& p : cs.points) {
      CHECK(p.grad_norm < 1e-8 * scale);
      CHECK(p.index == hessian_index(p.hessian).index);
      CHECK(p.x >= 0);
      CHECK(p.x < f.extent());
    }
  }
}

TEST_CASE("unconditional critical density matches the isotropic closed form") {
  // maxima per unit area for an isotropic planar field: lambda4 / (6 sqrt(3) pi lambda2)
  for (double a : {1.0, 0.6}) {
    const RadialModel m = gaussian_model(2, a);
    const double lambda2 = -2 * m.rho1(), lambda4 = 12 * m.rho2();
    const double expect = lambda4 / (6 * std::sqrt(3.0) * pi * lambda2);
    RiceOptions o;
    o.n = 400000;
    o.seed = 5;
    const RiceEstimate mx = critical_density_mc(m, 2, o), mn = critical_density_mc(m, 0, o);
    const RiceEstimate sd = critical_density_mc(m, 1, o);
    CHECK(std::abs(mx.value - expect) < 4 * mx.std_error);
    CHECK(std::abs(mn.value - expect) < 4 * mn.std_error);
    CHECK(std::abs(sd.value - 2 * expect) < 4 * sd.std_error);
  }
  CHECK(critical_density_mc(gaussian_model(2), 3).value == 0.0);
}

TEST_CASE("maxima count matches the Kac-Rice expectation") {
  const RadialModel m = gaussian_model(2);
  SimulationConfig cfg;
  cfg.realizations = 100;
  cfg.seed = 77;
  cfg.u_thr = -std::numeric_limits<double>::infinity();
  const SimulationSummary sum = simulate(m, cfg);
  std::vector<double> maxima;
  for (const auto& c : sum.counts_above) maxima.push_back(static_cast<double>(c[2]));
  const MeanSe emp = mean_se(maxima);
  RiceOptions o;
  o.n = 1000000;
  const RiceEstimate d = critical_density_mc(m, 2, o);
  const double area = cfg.grid.M * cfg.grid.h * cfg.grid.M * cfg.grid.h;
  CHECK(std::abs(emp.mean - d.value * area) < 3 * std::hypot(emp.se, d.std_error * area));
}

TEST_CASE("counts above a threshold are non-increasing") {
  const RadialModel m = gaussian_model(2);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const FieldRealization f = sample_field(m, Grid{}, s);
    std::size_t prev = find_critical_points(f).points.size();
    for (double u = -3; u <= 3.01; u += 0.5) {
      const CriticalSearch cs = find_critical_points(f, u);
      for (const auto& p : cs.points) CHECK(p.value > u);
      CHECK(cs.points.size() <= prev);
      prev = cs.points.size();
    }
  }
}

TEST_CASE("share of index-0 points falls as the threshold grows") {
  const RadialModel m = gaussian_model(2);
  const std::vector<double> us{1.0, 2.0, 2.5, 3.0};
  std::vector<double> low(us.size(), 0), all(us.size(), 0);
  for (std::uint64_t s = 0; s < 300; ++s) {
    const CriticalSearch cs = find_critical_points(sample_field(m, Grid{}, 1000 + s), us.front());
    for (const auto& p : cs.points)
      for (std::size_t k = 0; k < us.size(); ++k)
        if (p.value > us[k]) {
          all[k] += 1;
          low[k] += p.index == 0;
        }
  }
  std::vector<double> share(us.size());
  for (std::size_t k = 0; k < us.size(); ++k) share[k] = low[k] / all[k];
  CHECK(share[0] > share[1]);
  CHECK(share[1] >= share[2]);
  CHECK(share[2] >= share[3]);
  CHECK(share[0] > 0);
}

TEST_CASE("pair statistics") {
  const PairTable empty = pair_statistics({}, 0.5);
  CHECK(empty.pairs == 0);
  CHECK(empty.points == 0);
  CHECK(empty.opposite_det_fraction() == 0.0);

  const std::vector<CriticalPoint> maxima{point(0, 0, 2, 1), point(0.1, 0, 2, 1), point(0, 0.2, 2, 1)};
  const PairTable mm = pair_statistics(maxima, 0.5);
  CHECK(mm.pairs == 3);
  CHECK(mm.fraction(2, 2) == 1.0);
  CHECK(mm.max_saddle_fraction() == 0.0);
  CHECK(mm.opposite_det == 0);

  const std::vector<CriticalPoint> mixed{point(0.05, 1, 2, 1), point(9.95, 1, 1, -1), point(5, 5, 1, -1)};
  CHECK(pair_statistics(mixed, 0.5).pairs == 0);
  const PairTable torus = pair_statistics(mixed, 0.5, 10.0);
  CHECK(torus.pairs == 1);
  CHECK(torus.fraction(1, 2) == 1.0);
  CHECK(torus.fraction(2, 1) == 1.0);
  CHECK(torus.opposite_det_fraction() == 1.0);

  PairTable sum = mm;
  sum += torus;
  CHECK(sum.pairs == 4);
  CHECK(sum.max_saddle_fraction() == doctest::Approx(0.25));
}

TEST_CASE("simulate is independent of the thread count") {
  const RadialModel m = gaussian_model(2);
  SimulationConfig cfg;
  cfg.realizations = 12;
  cfg.seed = 9;
  cfg.u_thr = 1.5;
  cfg.threads = 1;
  const SimulationSummary a = simulate(m, cfg);
  cfg.threads = 4;
  const SimulationSummary b = simulate(m, cfg);
  CHECK(a.euler == b.euler);
  CHECK(a.counts_above == b.counts_above);
  CHECK(a.pairs.pairs == b.pairs.pairs);
  CHECK(a.pairs.by_index == b.pairs.by_index);
  for (int e : a.euler) CHECK(e == 0);
  CHECK(a.eps == doctest::Approx(0.5 * m.correlation_length()));
  cfg.realizations = 0;
  CHECK_THROWS_AS(simulate(m, cfg), DomainError);
}
