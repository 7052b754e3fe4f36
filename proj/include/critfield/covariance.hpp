#pragma once

#include <vector>

#include <Eigen/Dense>

#include "critfield/radial_model.hpp"

namespace critfield {

// Partial derivative R_{i1...ik}(t) of R(t) = rho(|t|^2), k <= 4, 0-based coordinates.
double cov_partials(const RadialModel& m, const Eigen::VectorXd& t, const std::vector<int>& idx);

// Var[X_111(0)] = -120 rho'''(0).
double third_derivative_variance(const RadialModel& m);

// Covariance of (vech Hessian X(t), X(t), X(0)) given grad X(t) = grad X(0) = 0, t = r u.
// Index layout is 0-based: Hessian entries at sym_pos(i,j), then X(t) at L-2, X(0) at L-1.
struct CondCov {
  int N = 0;
  int L = 0;
  double r = 0;
  Eigen::VectorXd u;
  Eigen::MatrixXd sigma;
  Eigen::MatrixXd V11, V12, V22;
  double k1 = 0, k2 = 0, k3 = 0, k4 = 0, k5 = 0, kstar = 0;
};

CondCov conditional_covariance(const RadialModel& m, double r, const Eigen::VectorXd& u);

// Brute-force version: joint covariance from numerically differentiated rho and a
// generic Schur complement.
CondCov conditional_covariance_oracle(const RadialModel& m, double r, const Eigen::VectorXd& u);

struct SigmaExpansion {
  Eigen::MatrixXd S0, S2;
  Eigen::VectorXd u;
};

// Sigma(ru) = S0 + S2 r^2 + o(r^2).
SigmaExpansion sigma_expansion(const RadialModel& m, const Eigen::VectorXd& u);

// (0,...,0,1)
Eigen::VectorXd axis_direction(int N);
void check_direction(const Eigen::VectorXd& u, int N);

// Joint covariance of (vech Hessian, grad, X) at t and (grad, X) at 0, used for
// the non-degeneracy check.
Eigen::MatrixXd joint_covariance(const RadialModel& m, const Eigen::VectorXd& t);

// Richardson-extrapolated central difference of order k (1..4).
double fd_derivative(const ScalarFn& f, double x, int k);

}  // namespace critfield
