#include "critfield/symvec.hpp"

#include <string>

#include "critfield/errors.hpp"

namespace critfield {

int tau_index(int i, int j) {
  if (i < 1 || j < 1) throw DomainError("tau_index: indices are 1-based");
  if (i > j) std::swap(i, j);
  return i + j * (j - 1) / 2;
}

int tau_index(int i, int j, int N) {
  if (i > N || j > N) throw DomainError("tau_index: index exceeds N=" + std::to_string(N));
  return tau_index(i, j);
}

Eigen::MatrixXd matriculate(const Eigen::VectorXd& a, int N) {
  if (N < 1) throw DomainError("matriculate: N must be positive");
  if (a.size() < sym_len(N))
    throw DomainError("matriculate: vector of length " + std::to_string(a.size()) +
                      " is shorter than N(N+1)/2");
  Eigen::MatrixXd M(N, N);
  for (int j = 0; j < N; ++j)
    for (int i = 0; i <= j; ++i) M(i, j) = M(j, i) = a[sym_pos(i, j)];
  return M;
}

Eigen::VectorXd vectorize_sym(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols()) throw DomainError("vectorize_sym: matrix is not square");
  const int N = static_cast<int>(M.rows());
  Eigen::VectorXd a(sym_len(N));
  for (int j = 0; j < N; ++j)
    for (int i = 0; i <= j; ++i) a[sym_pos(i, j)] = M(i, j);
  return a;
}

}  // namespace critfield
