#pragma once

// Tensor Gauss-Legendre evaluation of E[|det M| 1{index M = k} 1{x > u, z > u}] for N = 2,
// where (M11, M12, M22, x, z) ~ N(0, Sigma). Variables are ordered (d, s, a, b, c) with
// d = (x-z)/2, s = (x+z)/2, a = M11, b = M12, c = M22; the c integral is closed form.

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

namespace quad {

inline double phi(double t) { return std::exp(-0.5 * t * t) / std::sqrt(2 * M_PI); }
inline double Phi(double t) { return 0.5 * std::erfc(-t / std::sqrt(2.0)); }

// E[(c - T)_+] and E[(T - c)_+] for c ~ N(mu, sd^2).
inline double excess_above(double T, double mu, double sd) {
  const double t = (T - mu) / sd;
  return sd * (phi(t) - t * (1 - Phi(t)));
}
inline double excess_below(double T, double mu, double sd) {
  const double t = (T - mu) / sd;
  return sd * (t * Phi(t) + phi(t));
}

// Prefactor for rho(x) = exp(-x) along the last axis, assembled from the gradient covariance directly.
inline double exp_prefactor(int N, double r, double u) {
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(2 * N, 2 * N);
  V.topLeftCorner(N, N) = V.bottomRightCorner(N, N) = 2.0 * Eigen::MatrixXd::Identity(N, N);
  const double e = std::exp(-r * r);
  for (int i = 0; i < N; ++i) {
    // Cov(X_i(t), X_i(0)) = -d^2/dt_i^2 exp(-|t|^2)
    const double ti = i == N - 1 ? r : 0.0;
    V(i, N + i) = V(N + i, i) = (2.0 - 4.0 * ti * ti) * e;
  }
  const double tail = 0.5 * std::erfc(u / std::numbers::sqrt2);
  const double p0 = std::pow(4.0 * std::numbers::pi, -0.5 * N);
  return std::pow(2.0 * std::numbers::pi, -N) / std::sqrt(V.determinant()) / (tail * p0);
}

inline std::array<double, 3> index_integrals(const Eigen::MatrixXd& sigma, double u) {
  using GL = boost::math::quadrature::gauss<double, 64>;
  constexpr double W = 9.0;
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(5, 5);
  T(0, 3) = 0.5, T(0, 4) = -0.5;
  T(1, 3) = 0.5, T(1, 4) = 0.5;
  T(2, 0) = T(3, 1) = T(4, 2) = 1;
  const Eigen::MatrixXd S = T * sigma * T.transpose();
  const Eigen::MatrixXd C = Eigen::LLT<Eigen::MatrixXd>(S).matrixL();

  std::array<double, 3> out{0, 0, 0};
  for (int k = 0; k < 3; ++k) {
    auto in_b = [&](double w0, double w1, double w2) {
      const double a = C(2, 0) * w0 + C(2, 1) * w1 + C(2, 2) * w2;
      return GL::integrate(
          [&](double w3) {
            const double b = C(3, 0) * w0 + C(3, 1) * w1 + C(3, 2) * w2 + C(3, 3) * w3;
            const double mu = C(4, 0) * w0 + C(4, 1) * w1 + C(4, 2) * w2 + C(4, 3) * w3;
            const double sd = C(4, 4), Tb = b * b / a;
            double v;
            if (k == 0) v = a * excess_above(Tb, mu, sd);
            else if (k == 2) v = -a * excess_below(Tb, mu, sd);
            else v = a > 0 ? a * excess_below(Tb, mu, sd) : -a * excess_above(Tb, mu, sd);
            return v * phi(w3);
          },
          -W, W);
    };
    auto in_a = [&](double w0, double w1) {
      const double m = C(2, 0) * w0 + C(2, 1) * w1;
      const double cut = std::clamp(-m / C(2, 2), -W, W);
      auto f = [&](double w2) { return in_b(w0, w1, w2) * phi(w2); };
      double s = 0;
      if (k != 2) s += GL::integrate(f, cut, W);
      if (k != 0) s += GL::integrate(f, -W, cut);
      return s;
    };
    auto in_s = [&](double w0) {
      const double d = C(0, 0) * w0;
      double lo = std::isinf(u) ? -W : (u + std::abs(d) - C(1, 0) * w0) / C(1, 1);
      lo = std::max(lo, -W);
      if (lo >= W) return 0.0;
      return GL::integrate([&](double w1) { return in_a(w0, w1) * phi(w1); }, lo, W);
    };
    auto f0 = [&](double w0) { return in_s(w0) * phi(w0); };
    out[k] = GL::integrate(f0, -W, 0.0) + GL::integrate(f0, 0.0, W);
  }
  return out;
}

}  // namespace quad
