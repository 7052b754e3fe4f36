#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "critfield/radial_model.hpp"

namespace critfield {

struct OrderedEig {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // columns
};

// Eigenvalues within 1e-9*trace of each other form a cluster; each cluster gets the
// basis obtained by Gram-Schmidt on the projected unit vectors e_1, e_2, ..., with the
// first nonzero coordinate of every column positive and columns in descending
// lexicographic order.
OrderedEig ordered_eigendecomposition(const Eigen::MatrixXd& S);

// Consecutive index ranges [begin, end) of numerically equal eigenvalues.
std::vector<std::pair<int, int>> eigen_clusters(const Eigen::VectorXd& values, double tol);

struct CatalogueEntry {
  std::string label;
  double value;
  int multiplicity;
};

struct Sigma0Spectrum {
  double a = 0, b = 0, c = 0, d = 0;
  double lambda_plus = 0, lambda_minus = 0;
  std::vector<CatalogueEntry> catalogue;
  Eigen::VectorXd numeric;  // descending eigenvalues of S0
  double max_mismatch = 0;
};

// Throws CollisionError if lambda_minus coincides with 4 rho''(0) or 8 rho''(0).
Sigma0Spectrum spectrum_sigma0(const RadialModel& m);

std::vector<double> default_r_grid();

struct SpectralExpansion {
  int N = 0, L = 0, rank0 = 0;
  Eigen::VectorXd u;
  std::vector<double> r_grid;
  std::vector<Eigen::VectorXd> path_values;
  std::vector<Eigen::MatrixXd> path_vectors;
  Eigen::VectorXd Lambda0, Lambda1, Lambda2;
  Eigen::MatrixXd P0, P1, A0, A1;
  Eigen::MatrixXd S0, S2;
};

SpectralExpansion eigenpath(const RadialModel& m, const Eigen::VectorXd& u,
                            const std::vector<double>& r_grid = default_r_grid());

// P(r) Lambda(r)^{1/2} with columns continued from the expansion's P0.
Eigen::MatrixXd aligned_factor(const SpectralExpansion& ex, const RadialModel& m, double r);

Eigen::MatrixXd h_matrix(const Eigen::VectorXd& u);

// det B^v with rows Matri(A^{(v_i)})_{(i)}; v holds 0-based column indices.
double bv_determinant(const Eigen::MatrixXd& A, const std::vector<int>& v);

// Sum of det B^{sigma(v)} over all permutations sigma.
double bv_symmetrized(const Eigen::MatrixXd& A, std::vector<int> v);

enum class ScalingClass { LittleO, Theta, Slower };

struct ScalingReport {
  ScalingClass cls = ScalingClass::LittleO;
  std::vector<double> r, value;
  double slope = 0;
};

ScalingReport scaling_class(const RadialModel& m, const Eigen::VectorXd& u, const std::vector<int>& v);
ScalingReport scaling_class(const SpectralExpansion& ex, const RadialModel& m, const std::vector<int>& v);
std::string to_string(ScalingClass c);

struct LimitPolynomial {
  int N = 0, L = 0, rank0 = 0;
  Eigen::MatrixXd A0, A1;
  // Sorted 0-based index multisets with exactly one null-space index.
  std::map<std::vector<int>, double> coefficients;

  // d/dr det Matri((A0 + r A1) y) at r = 0.
  double operator()(const Eigen::VectorXd& y) const;
  double from_coefficients(const Eigen::VectorXd& y) const;
};

// Coefficient map is filled for N <= 5; the evaluator works for every N.
LimitPolynomial limit_polynomial(const SpectralExpansion& ex);
LimitPolynomial limit_polynomial(const RadialModel& m, const Eigen::VectorXd& u);

// Negates the last N+1 coordinates.
Eigen::VectorXd flip_null(const Eigen::VectorXd& y, int N);

double h_r(const SpectralExpansion& ex, const RadialModel& m, double r, const Eigen::VectorXd& y);
double h_r(const RadialModel& m, const Eigen::VectorXd& u, double r, const Eigen::VectorXd& y);

}  // namespace critfield
