#include "critfield/covariance.hpp"

#include <cmath>
#include <string>

#include "critfield/errors.hpp"
#include "critfield/symvec.hpp"

namespace critfield {

namespace {

inline double kd(int a, int b) { return a == b ? 1.0 : 0.0; }

// rho'(x) - rho'(0). Near the origin the plain difference cancels, so it is
// integrated from rho'' instead.
double rho1_increment(const RadialModel& m, double x) {
  const double direct = m.d(1, x) - m.rho1();
  if (std::abs(direct) > 0.1 * std::abs(m.rho1())) return direct;
  static const double gx[8] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                               0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                               0.9445750230732326, 0.9894009349916499};
  static const double gw[8] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                               0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                               0.0622535239386479, 0.0271524594117541};
  const double h = 0.5 * x;
  double s = 0;
  for (int i = 0; i < 8; ++i) s += gw[i] * (m.d(2, h - h * gx[i]) + m.d(2, h + h * gx[i]));
  return h * s;
}

}  // namespace

Eigen::VectorXd axis_direction(int N) {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(N);
  u[N - 1] = 1.0;
  return u;
}

void check_direction(const Eigen::VectorXd& u, int N) {
  if (u.size() != N) throw DomainError("direction has wrong dimension");
  if (std::abs(u.norm() - 1.0) > 1e-12) throw DomainError("direction is not a unit vector");
}

double cov_partials(const RadialModel& m, const Eigen::VectorXd& t, const std::vector<int>& idx) {
  for (int i : idx)
    if (i < 0 || i >= t.size()) throw DomainError("cov_partials: coordinate out of range");
  const double x = t.squaredNorm();
  switch (idx.size()) {
    case 0:
      return m.d(0, x);
    case 1:
      return 2.0 * t[idx[0]] * m.d(1, x);
    case 2: {
      int i = idx[0], j = idx[1];
      return 2.0 * m.d(1, x) * kd(i, j) + 4.0 * t[i] * t[j] * m.d(2, x);
    }
    case 3: {
      int i = idx[0], j = idx[1], k = idx[2];
      return 4.0 * (t[k] * kd(i, j) + t[i] * kd(j, k) + t[j] * kd(i, k)) * m.d(2, x) +
             8.0 * t[i] * t[j] * t[k] * m.d(3, x);
    }
    case 4: {
      int a = idx[0], b = idx[1], c = idx[2], e = idx[3];
      double v = 4.0 * (kd(a, b) * kd(c, e) + kd(b, c) * kd(a, e) + kd(a, c) * kd(b, e)) * m.d(2, x) +
                 8.0 *
                     (t[c] * t[e] * kd(a, b) + t[a] * t[e] * kd(b, c) + t[b] * t[e] * kd(a, c) +
                      t[b] * t[c] * kd(a, e) + t[a] * t[c] * kd(b, e) + t[a] * t[b] * kd(c, e)) *
                     m.d(3, x);
      double tttt = t[a] * t[b] * t[c] * t[e];
      // The model carries three derivatives; the fourth is only needed off the axes.
      if (tttt != 0.0) {
        const double C = m.scale;
        auto f3 = m.fn[3];
        v += 16.0 * tttt * std::pow(C, 4) * fd_derivative(f3, C * x, 1);
      }
      return v;
    }
    default:
      throw DomainError("cov_partials: order " + std::to_string(idx.size()) + " not supported");
  }
}

double third_derivative_variance(const RadialModel& m) { return -120.0 * m.rho3(); }

CondCov conditional_covariance(const RadialModel& m, double r, const Eigen::VectorXd& u) {
  const int N = m.N;
  check_direction(u, N);
  if (!(r > 0)) throw DomainError("conditional_covariance: r must be positive");
  if (r > m.delta) throw DomainError("conditional_covariance: r exceeds the validity radius");

  const int S = sym_len(N), L = S + 2;
  const Eigen::VectorXd t = r * u;
  const double x = r * r;
  const double r1 = m.rho1(), r2 = m.rho2();
  const double p0 = m.d(0, x), p1 = m.d(1, x), p2 = m.d(2, x), p3 = m.d(3, x);

  CondCov c;
  c.N = N;
  c.L = L;
  c.r = r;
  c.u = u;
  c.k1 = p1 / r1;
  c.k2 = 2.0 * p2 / r1;
  c.kstar = c.k1 + c.k2 * x;
  // 1-k1 and 1-k* without cancellation
  const double inc = rho1_increment(m, x);
  const double g1 = (-inc / r1) * (1.0 + c.k1);
  const double gs = ((-inc - 2.0 * x * p2) / r1) * (1.0 + c.kstar);
  if (!(g1 > 0) || !(gs > 0))
    throw ConditioningError("conditional_covariance: 1-k1^2 or 1-k*^2 is not positive at r=" +
                            std::to_string(r));
  c.k3 = c.k2 * (c.k1 + c.kstar) / g1;
  c.k4 = c.k2 * (c.k1 + c.kstar) / gs;
  c.k5 = c.k2 * (1.0 + c.k1 * c.kstar) / gs;

  // V11: Hessian at t, X(t), X(0)
  c.V11 = Eigen::MatrixXd::Zero(L, L);
  for (int j1 = 0; j1 < N; ++j1)
    for (int i1 = 0; i1 <= j1; ++i1) {
      const int p = sym_pos(i1, j1);
      for (int j2 = 0; j2 < N; ++j2)
        for (int i2 = 0; i2 <= j2; ++i2) {
          const int q = sym_pos(i2, j2);
          c.V11(p, q) = 4.0 * r2 *
                        (kd(i1, j1) * kd(i2, j2) + kd(i1, i2) * kd(j1, j2) + kd(i1, j2) * kd(j1, i2));
        }
      c.V11(p, L - 2) = c.V11(L - 2, p) = 2.0 * r1 * kd(i1, j1);
      c.V11(p, L - 1) = c.V11(L - 1, p) = 2.0 * p1 * kd(i1, j1) + 4.0 * t[i1] * t[j1] * p2;
    }
  c.V11(L - 2, L - 2) = c.V11(L - 1, L - 1) = 1.0;
  c.V11(L - 2, L - 1) = c.V11(L - 1, L - 2) = p0;

  // V12 against (grad X(t), grad X(0))
  c.V12 = Eigen::MatrixXd::Zero(L, 2 * N);
  for (int j = 0; j < N; ++j)
    for (int i = 0; i <= j; ++i) {
      const int p = sym_pos(i, j);
      for (int k = 0; k < N; ++k) {
        double Rijk = 4.0 * (t[k] * kd(i, j) + t[i] * kd(j, k) + t[j] * kd(i, k)) * p2 +
                      8.0 * t[i] * t[j] * t[k] * p3;
        c.V12(p, N + k) = -Rijk;
      }
    }
  for (int k = 0; k < N; ++k) {
    const double Rk = 2.0 * t[k] * p1;
    c.V12(L - 2, N + k) = -Rk;
    c.V12(L - 1, k) = Rk;
  }

  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(N, N);
  const Eigen::MatrixXd tt = t * t.transpose();
  c.V22.resize(2 * N, 2 * N);
  const Eigen::MatrixXd B = c.k1 * I + c.k2 * tt;
  c.V22 << I, B, B, I;
  c.V22 *= -2.0 * r1;

  Eigen::MatrixXd W(2 * N, 2 * N);
  W << I + c.k4 * tt, -c.k1 * I - c.k5 * tt, -c.k1 * I - c.k5 * tt, I + c.k4 * tt;
  W /= (-2.0 * r1) * g1;

  c.sigma = c.V11 - c.V12 * W * c.V12.transpose();
  c.sigma = 0.5 * (c.sigma + c.sigma.transpose()).eval();
  return c;
}

SigmaExpansion sigma_expansion(const RadialModel& m, const Eigen::VectorXd& u) {
  const int N = m.N;
  check_direction(u, N);
  const int S = sym_len(N), L = S + 2;
  const double r1 = m.rho1(), r2 = m.rho2(), r3 = m.rho3();
  const double al = r2 * r2 / r1, be = r3;
  const double alp = r2, bep = r1 * r3 / r2;

  SigmaExpansion e;
  e.u = u;
  e.S0 = Eigen::MatrixXd::Zero(L, L);
  e.S2 = Eigen::MatrixXd::Zero(L, L);
  for (int j1 = 0; j1 < N; ++j1)
    for (int i1 = 0; i1 <= j1; ++i1) {
      const int p = sym_pos(i1, j1);
      const double ui1 = u[i1], uj1 = u[j1];
      for (int j2 = 0; j2 < N; ++j2)
        for (int i2 = 0; i2 <= j2; ++i2) {
          const int q = sym_pos(i2, j2);
          const double ui2 = u[i2], uj2 = u[j2];
          e.S0(p, q) = 4.0 * r2 *
                           (kd(i2, j1) * kd(i1, j2) + kd(i1, i2) * kd(j1, j2) -
                            kd(j1, j2) * ui1 * ui2 - kd(i1, j2) * uj1 * ui2 -
                            kd(i2, j1) * ui1 * uj2 - kd(i1, i2) * uj1 * uj2 +
                            2.0 * ui1 * uj1 * ui2 * uj2) +
                       8.0 / 3.0 * r2 * (kd(i1, j1) - ui1 * uj1) * (kd(i2, j2) - ui2 * uj2);
          e.S2(p, q) = (2.0 * al - 14.0 / 9.0 * be) * kd(i1, j1) * kd(i2, j2) +
                       (4.0 * al - 52.0 / 9.0 * be) * (kd(i2, j2) * ui1 * uj1 + kd(i1, j1) * ui2 * uj2) +
                       (2.0 * al - 6.0 * be) *
                           (kd(j1, j2) * ui1 * ui2 + kd(i1, j2) * uj1 * ui2 +
                            kd(i2, j1) * ui1 * uj2 + kd(i1, i2) * uj1 * uj2) +
                       64.0 / 9.0 * be * ui1 * uj1 * ui2 * uj2;
        }
      const double side0 = 4.0 / 3.0 * r1 * (kd(i1, j1) - ui1 * uj1);
      const double side2 = (alp / 3.0 - bep / 9.0) * kd(i1, j1) +
                           (2.0 * alp / 3.0 - 14.0 * bep / 9.0) * ui1 * uj1;
      for (int c : {L - 2, L - 1}) {
        e.S0(p, c) = e.S0(c, p) = side0;
        e.S2(p, c) = e.S2(c, p) = side2;
      }
    }
  const double corner0 = 1.0 - r1 * r1 / (3.0 * r2);
  const double corner2 = -r1 / 6.0 + 5.0 / 18.0 * r1 * r1 / (r2 * r2) * r3;
  e.S0.bottomRightCorner(2, 2).setConstant(corner0);
  e.S2.bottomRightCorner(2, 2).setConstant(corner2);
  return e;
}

}  // namespace critfield
