#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "critfield/covariance.hpp"
#include "critfield/errors.hpp"
#include "critfield/symvec.hpp"

namespace critfield {

namespace {

long double stencil(const ScalarFn& f, long double x, long double h, int k) {
  auto F = [&](long double s) { return static_cast<long double>(f(static_cast<double>(x + s * h))); };
  switch (k) {
    case 1:
      return (F(1) - F(-1)) / (2 * h);
    case 2:
      return (F(1) - 2 * F(0) + F(-1)) / (h * h);
    case 3:
      return (F(2) - 2 * F(1) + 2 * F(-1) - F(-2)) / (2 * h * h * h);
    case 4:
      return (F(2) - 4 * F(1) + 6 * F(0) - 4 * F(-1) + F(-2)) / (h * h * h * h);
    default:
      throw DomainError("fd_derivative: order must be 1..4");
  }
}

struct Var {
  int at;  // 0: the point t, 1: the origin
  std::vector<int> idx;
};

// d^alpha R(t) as sum of coef * t^e * rho^(k)(|t|^2), derived by repeated chain rule.
struct Term {
  double coef;
  std::vector<int> e;
  int k;
};

std::vector<Term> differentiate(const std::vector<int>& alpha, int N) {
  std::vector<Term> terms{{1.0, std::vector<int>(N, 0), 0}};
  for (int i : alpha) {
    std::map<std::pair<std::vector<int>, int>, double> acc;
    for (const auto& T : terms) {
      if (T.e[i] > 0) {
        auto e = T.e;
        e[i] -= 1;
        acc[{e, T.k}] += T.coef * T.e[i];
      }
      auto e = T.e;
      e[i] += 1;
      acc[{e, T.k + 1}] += 2.0 * T.coef;
    }
    terms.clear();
    for (const auto& [key, c] : acc)
      if (c != 0.0) terms.push_back({c, key.first, key.second});
  }
  return terms;
}

Eigen::MatrixXd assemble(const std::vector<Var>& vars, const Eigen::VectorXd& t,
                         const std::function<double(const Eigen::VectorXd&, const std::vector<int>&)>& R) {
  const int n = static_cast<int>(vars.size());
  Eigen::MatrixXd C(n, n);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(t.size());
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      const auto& va = vars[a];
      const auto& vb = vars[b];
      const Eigen::VectorXd pa = va.at == 0 ? t : zero;
      const Eigen::VectorXd pb = vb.at == 0 ? t : zero;
      std::vector<int> idx = va.idx;
      idx.insert(idx.end(), vb.idx.begin(), vb.idx.end());
      const double sgn = (va.idx.size() % 2) ? -1.0 : 1.0;
      C(a, b) = C(b, a) = sgn * R(pb - pa, idx);
    }
  return C;
}

std::vector<Var> joint_layout(int N) {
  std::vector<Var> v;
  for (int j = 0; j < N; ++j)
    for (int i = 0; i <= j; ++i) v.push_back({0, {i, j}});
  v.push_back({0, {}});
  v.push_back({1, {}});
  for (int i = 0; i < N; ++i) v.push_back({0, {i}});
  for (int i = 0; i < N; ++i) v.push_back({1, {i}});
  return v;
}

}  // namespace

double fd_derivative(const ScalarFn& f, double x, int k) {
  constexpr int ntab = 12;
  constexpr long double con = 1.4L, con2 = con * con;
  long double h = 0.1L * std::max(1.0L, std::abs(static_cast<long double>(x)));
  long double a[ntab][ntab];
  long double best = 0, err = 1e300L;
  a[0][0] = stencil(f, x, h, k);
  best = a[0][0];
  for (int i = 1; i < ntab; ++i) {
    h /= con;
    a[0][i] = stencil(f, x, h, k);
    long double fac = con2;
    for (int j = 1; j <= i; ++j) {
      a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1);
      fac *= con2;
      long double e = std::max(std::abs(a[j][i] - a[j - 1][i]), std::abs(a[j][i] - a[j - 1][i - 1]));
      if (e <= err) {
        err = e;
        best = a[j][i];
      }
    }
    if (std::abs(a[i][i] - a[i - 1][i - 1]) >= 2 * err) break;
  }
  return static_cast<double>(best);
}

Eigen::MatrixXd joint_covariance(const RadialModel& m, const Eigen::VectorXd& t) {
  auto R = [&](const Eigen::VectorXd& s, const std::vector<int>& idx) { return cov_partials(m, s, idx); };
  return assemble(joint_layout(m.N), t, R);
}

CondCov conditional_covariance_oracle(const RadialModel& m, double r, const Eigen::VectorXd& u) {
  const int N = m.N;
  check_direction(u, N);
  if (!(r > 0)) throw DomainError("oracle: r must be positive");
  const int L = sym_len(N) + 2;
  const Eigen::VectorXd t = r * u;

  const ScalarFn rho = [&m](double x) { return m.rho(x); };
  std::map<std::pair<double, int>, double> cache;
  auto deriv = [&](double x, int k) {
    if (k == 0) return m.rho(x);
    auto key = std::make_pair(x, k);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    return cache[key] = fd_derivative(rho, x, k);
  };
  std::map<std::vector<int>, std::vector<Term>> forms;
  auto R = [&](const Eigen::VectorXd& s, const std::vector<int>& idx) {
    std::vector<int> key = idx;
    std::sort(key.begin(), key.end());
    auto it = forms.find(key);
    if (it == forms.end()) it = forms.emplace(key, differentiate(key, N)).first;
    const double x = s.squaredNorm();
    double v = 0;
    for (const auto& T : it->second) {
      double mono = T.coef;
      for (int i = 0; i < N && mono != 0.0; ++i)
        if (T.e[i]) mono *= std::pow(s[i], T.e[i]);
      if (mono != 0.0) v += mono * deriv(x, T.k);
    }
    return v;
  };

  const Eigen::MatrixXd C = assemble(joint_layout(N), t, R);
  CondCov c;
  c.N = N;
  c.L = L;
  c.r = r;
  c.u = u;
  c.V11 = C.topLeftCorner(L, L);
  c.V12 = C.topRightCorner(L, 2 * N);
  c.V22 = C.bottomRightCorner(2 * N, 2 * N);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(c.V22);
  const Eigen::VectorXd piv = ldlt.vectorD();
  if (ldlt.info() != Eigen::Success || piv.minCoeff() <= 1e-14 * piv.cwiseAbs().maxCoeff())
    throw ConditioningError("oracle: V22 is numerically singular at r=" + std::to_string(r));
  c.sigma = c.V11 - c.V12 * ldlt.solve(c.V12.transpose());
  c.sigma = 0.5 * (c.sigma + c.sigma.transpose()).eval();
  return c;
}

}  // namespace critfield
