#pragma once

#include <array>
#include <functional>
#include <map>
#include <string>

namespace critfield {

using ScalarFn = std::function<double(double)>;

// Isotropic covariance R(t) = rho(|t|^2) on R^N. The closures are the unscaled
// rho and its first three derivatives; `scale` C maps them to rho(Cx).
struct RadialModel {
  int N = 2;
  std::array<ScalarFn, 4> fn;
  double scale = 1.0;
  double delta = 1.0;  // validity radius
  std::string family = "custom";
  std::map<std::string, double> params;

  // k-th derivative (k <= 3) of the scaled rho at x.
  double d(int k, double x) const;
  double rho(double x) const { return d(0, x); }
  double rho0() const { return d(0, 0.0); }
  double rho1() const { return d(1, 0.0); }
  double rho2() const { return d(2, 0.0); }
  double rho3() const { return d(3, 0.0); }

  // Correlation length 1/sqrt(-2 rho'(0)).
  double correlation_length() const;
  std::string describe() const;
};

RadialModel gaussian_model(int N, double a = 1.0);
RadialModel cauchy_model(int N, double ell = 1.0, double nu = 1.0);
RadialModel custom_model(int N, ScalarFn rho, ScalarFn d1, ScalarFn d2, ScalarFn d3);

// rho~(x) = rho(Cx).
RadialModel rescale(const RadialModel& m, double C);

// "gaussian:a=1", "cauchy:ell=1,nu=2".
RadialModel parse_model(const std::string& spec, int N);

}  // namespace critfield
