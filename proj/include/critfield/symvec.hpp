#pragma once

#include <Eigen/Dense>

namespace critfield {

// tau(i,j) = i + j(j-1)/2 with 1-based i <= j; arguments are swapped when i > j.
int tau_index(int i, int j);
int tau_index(int i, int j, int N);

// 0-based position of entry (i,j) in the half-vectorization.
inline int sym_pos(int i, int j) {
  if (i > j) std::swap(i, j);
  return i + j * (j + 1) / 2;
}

inline int sym_len(int N) { return N * (N + 1) / 2; }
inline int cov_dim(int N) { return sym_len(N) + 2; }

// Rebuilds the symmetric N x N matrix from the first N(N+1)/2 coordinates of a.
Eigen::MatrixXd matriculate(const Eigen::VectorXd& a, int N);
Eigen::VectorXd vectorize_sym(const Eigen::MatrixXd& M);

}  // namespace critfield
