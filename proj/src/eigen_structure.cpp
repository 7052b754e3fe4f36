#include "critfield/eigen_structure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "critfield/covariance.hpp"
#include "critfield/errors.hpp"
#include "critfield/symvec.hpp"

namespace critfield {

namespace {

double tie_tolerance(const Eigen::MatrixXd& S) {
  double tr = std::abs(S.trace());
  if (tr == 0) tr = S.cwiseAbs().maxCoeff();
  return 1e-9 * tr;
}

void canonical_sign(Eigen::Ref<Eigen::VectorXd> v) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > 1e-12) {
      if (v[i] < 0) v = -v;
      return;
    }
}

bool lex_greater(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) <= 1e-12) continue;
    return a[i] > b[i];
  }
  return false;
}

// Closest matrix with orthonormal columns (polar factor).
Eigen::MatrixXd polar(const Eigen::MatrixXd& M) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().transpose();
}

// Least-squares coefficients of y(r) in the monomials r^p, p in powers.
Eigen::VectorXd power_fit(const std::vector<double>& r, const Eigen::VectorXd& y, const std::vector<int>& powers) {
  const double rmax = *std::max_element(r.begin(), r.end());
  Eigen::MatrixXd V(r.size(), powers.size());
  for (size_t k = 0; k < r.size(); ++k)
    for (size_t j = 0; j < powers.size(); ++j) V(k, j) = std::pow(r[k] / rmax, powers[j]);
  Eigen::VectorXd c = V.colPivHouseholderQr().solve(y);
  for (size_t j = 0; j < powers.size(); ++j) c[j] /= std::pow(rmax, powers[j]);
  return c;
}

// Re-express the eigenvectors of `cur` so that every cluster best matches the same
// columns of `ref`.
Eigen::MatrixXd align_to(const Eigen::MatrixXd& ref, const OrderedEig& cur, double tol, double r) {
  Eigen::MatrixXd P = cur.vectors;
  for (auto [b, e] : eigen_clusters(cur.values, tol)) {
    const int n = e - b;
    Eigen::MatrixXd M = cur.vectors.middleCols(b, n).transpose() * ref.middleCols(b, n);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.singularValues().minCoeff() < 0.5) {
      std::ostringstream os;
      os << "eigenpath: columns " << b << ".." << e - 1 << " lost continuity at r=" << r
         << " (overlap " << svd.singularValues().minCoeff() << ")";
      throw PathError(os.str(), r);
    }
    P.middleCols(b, n) = cur.vectors.middleCols(b, n) * (svd.matrixU() * svd.matrixV().transpose());
  }
  return P;
}

}  // namespace

std::vector<std::pair<int, int>> eigen_clusters(const Eigen::VectorXd& values, double tol) {
  std::vector<std::pair<int, int>> out;
  const int n = static_cast<int>(values.size());
  int b = 0;
  for (int i = 1; i <= n; ++i)
    if (i == n || std::abs(values[i - 1] - values[i]) >= tol) {
      out.emplace_back(b, i);
      b = i;
    }
  return out;
}

OrderedEig ordered_eigendecomposition(const Eigen::MatrixXd& S) {
  if (S.rows() != S.cols()) throw DomainError("ordered_eigendecomposition: matrix is not square");
  const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
  if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw DomainError("ordered_eigendecomposition: matrix is not symmetric");
  const int n = static_cast<int>(S.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  OrderedEig out;
  out.values = es.eigenvalues().reverse();
  out.vectors = es.eigenvectors().rowwise().reverse();

  for (auto [b, e] : eigen_clusters(out.values, tie_tolerance(S))) {
    const int m = e - b;
    if (m == 1) {
      canonical_sign(out.vectors.col(b));
      continue;
    }
    const Eigen::MatrixXd V = out.vectors.middleCols(b, m);
    const Eigen::MatrixXd Pi = V * V.transpose();
    std::vector<Eigen::VectorXd> basis;
    for (int k = 0; k < n && static_cast<int>(basis.size()) < m; ++k) {
      Eigen::VectorXd v = Pi.col(k);
      for (const auto& q : basis) v -= q.dot(v) * q;
      for (const auto& q : basis) v -= q.dot(v) * q;
      if (v.norm() > 1e-6) basis.push_back(v / v.norm());
    }
    for (auto& v : basis) canonical_sign(v);
    std::sort(basis.begin(), basis.end(), lex_greater);
    for (int j = 0; j < m; ++j) out.vectors.col(b + j) = basis[j];
  }
  return out;
}

Sigma0Spectrum spectrum_sigma0(const RadialModel& m) {
  const int N = m.N, L = cov_dim(N);
  const double r1 = m.rho1(), r2 = m.rho2();
  Sigma0Spectrum s;
  s.a = (32.0 + 8.0 * (N - 2)) * r2 / 3.0;
  s.b = 8.0 * r1 / 3.0;
  s.c = 4.0 * (N - 1) * r1 / 3.0;
  s.d = 2.0 * (1.0 - r1 * r1 / (3.0 * r2));
  const double disc = std::sqrt((s.a - s.d) * (s.a - s.d) + 4.0 * s.b * s.c);
  s.lambda_plus = (s.a + s.d + disc) / 2.0;
  s.lambda_minus = (s.a + s.d - disc) / 2.0;

  const double tol = 1e-9 * std::max(1.0, s.lambda_plus);
  if (std::abs(s.lambda_minus - 4.0 * r2) < tol || std::abs(s.lambda_minus - 8.0 * r2) < tol)
    throw CollisionError("spectrum_sigma0: lambda_minus collides with 4rho''(0) or 8rho''(0); "
                         "rescale the model with find_rescaling");
  if (!(s.lambda_plus > 8.0 * r2)) throw CollisionError("spectrum_sigma0: lambda_plus <= 8rho''(0)");
  if (!(std::abs(s.lambda_minus) > tol)) throw CollisionError("spectrum_sigma0: lambda_minus vanishes");

  s.catalogue = {{"lambda_plus", s.lambda_plus, 1},
                 {"lambda_minus", s.lambda_minus, 1},
                 {"4rho2", 4.0 * r2, (N - 1) * (N - 2) / 2},
                 {"8rho2", 8.0 * r2, N - 2},
                 {"zero", 0.0, N + 1}};

  auto e = sigma_expansion(m, axis_direction(N));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e.S0, Eigen::EigenvaluesOnly);
  s.numeric = es.eigenvalues().reverse();
  std::vector<double> expect;
  for (const auto& c : s.catalogue)
    for (int k = 0; k < c.multiplicity; ++k) expect.push_back(c.value);
  std::sort(expect.rbegin(), expect.rend());
  if (static_cast<int>(expect.size()) != L) throw DomainError("spectrum_sigma0: multiplicities do not sum to L");
  s.max_mismatch = 0;
  for (int i = 0; i < L; ++i) s.max_mismatch = std::max(s.max_mismatch, std::abs(expect[i] - s.numeric[i]));
  return s;
}

std::vector<double> default_r_grid() { return {5e-2, 2e-2, 1e-2, 5e-3, 2e-3, 1e-3}; }

SpectralExpansion eigenpath(const RadialModel& m, const Eigen::VectorXd& u, const std::vector<double>& r_grid) {
  const int N = m.N, L = cov_dim(N);
  if (r_grid.size() < 5) throw DomainError("eigenpath: grid needs at least 5 points");
  for (size_t k = 0; k < r_grid.size(); ++k)
    if (!(r_grid[k] > 0) || (k > 0 && !(r_grid[k] < r_grid[k - 1])))
      throw DomainError("eigenpath: grid must be positive and strictly decreasing");

  SpectralExpansion ex;
  ex.N = N;
  ex.L = L;
  ex.u = u;
  ex.r_grid = r_grid;
  auto se = sigma_expansion(m, u);
  ex.S0 = se.S0;
  ex.S2 = se.S2;

  Eigen::MatrixXd prev;
  for (double r : r_grid) {
    const Eigen::MatrixXd S = conditional_covariance(m, r, u).sigma;
    OrderedEig oe = ordered_eigendecomposition(S);
    Eigen::MatrixXd P = prev.size() ? align_to(prev, oe, tie_tolerance(S), r) : oe.vectors;
    ex.path_values.push_back(oe.values);
    ex.path_vectors.push_back(P);
    prev = P;
  }

  const int K = static_cast<int>(r_grid.size());
  ex.Lambda0.resize(L);
  ex.Lambda1.resize(L);
  ex.Lambda2.resize(L);
  for (int i = 0; i < L; ++i) {
    Eigen::VectorXd y(K);
    for (int k = 0; k < K; ++k) y[k] = ex.path_values[k][i];
    Eigen::VectorXd free = power_fit(r_grid, y, {0, 1, 2, 3, 4});
    Eigen::VectorXd even = power_fit(r_grid, y, {0, 2, 4, 6});
    ex.Lambda1[i] = free[1];
    ex.Lambda0[i] = even[0];
    ex.Lambda2[i] = even[1];
  }
  Eigen::MatrixXd P0raw(L, L), P1raw(L, L);
  for (int a = 0; a < L; ++a)
    for (int b = 0; b < L; ++b) {
      Eigen::VectorXd y(K);
      for (int k = 0; k < K; ++k) y[k] = ex.path_vectors[k](a, b);
      Eigen::VectorXd c = power_fit(r_grid, y, {0, 1, 2, 4});
      P0raw(a, b) = c[0];
      P1raw(a, b) = c[1];
    }

  // Snap P0 onto the exact eigenspaces of S0 and P1 onto the constraints
  // S0 P1^(i) = lambda_i0 P1^(i), P0^(i).P1^(i) = 0.
  const OrderedEig e0 = ordered_eigendecomposition(ex.S0);
  const double tol0 = tie_tolerance(ex.S0);
  ex.P0.resize(L, L);
  ex.P1 = P1raw;
  ex.rank0 = 0;
  for (auto [b, e] : eigen_clusters(e0.values, tol0)) {
    const int n = e - b;
    const Eigen::MatrixXd V = e0.vectors.middleCols(b, n);
    ex.P0.middleCols(b, n) = V * polar(V.transpose() * P0raw.middleCols(b, n));
    const bool null = std::abs(e0.values[b]) < tol0;
    if (null) {
      for (int i = b; i < e; ++i) ex.Lambda0[i] = 0.0;
    } else {
      ex.rank0 += n;
      ex.P1.middleCols(b, n) = V * (V.transpose() * P1raw.middleCols(b, n));
    }
  }
  for (int i = 0; i < L; ++i) ex.P1.col(i) -= ex.P0.col(i).dot(ex.P1.col(i)) * ex.P0.col(i);
  const double l2max = std::max(1.0, ex.Lambda2.tail(L - ex.rank0).cwiseAbs().maxCoeff());
  for (int i = ex.rank0; i < L; ++i)
    if (std::abs(ex.Lambda2[i]) < 1e-8 * l2max) ex.Lambda2[i] = 0.0;

  ex.A0 = Eigen::MatrixXd::Zero(L, L);
  ex.A1 = Eigen::MatrixXd::Zero(L, L);
  for (int i = 0; i < L; ++i) {
    if (i < ex.rank0) {
      const double s = std::sqrt(std::max(ex.Lambda0[i], 0.0));
      ex.A0.col(i) = s * ex.P0.col(i);
      ex.A1.col(i) = s * ex.P1.col(i);
    } else {
      ex.A1.col(i) = std::sqrt(std::max(ex.Lambda2[i], 0.0)) * ex.P0.col(i);
    }
  }
  return ex;
}

Eigen::MatrixXd aligned_factor(const SpectralExpansion& ex, const RadialModel& m, double r) {
  const Eigen::MatrixXd S = conditional_covariance(m, r, ex.u).sigma;
  OrderedEig oe = ordered_eigendecomposition(S);
  Eigen::MatrixXd P = align_to(ex.P0, oe, tie_tolerance(S), r);
  return P * oe.values.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

Eigen::MatrixXd h_matrix(const Eigen::VectorXd& u) {
  const int N = static_cast<int>(u.size());
  const int L = cov_dim(N);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(N, L);
  for (int k = 0; k < N; ++k)
    for (int j = 0; j < N; ++j)
      for (int i = 0; i <= j; ++i) H(k, sym_pos(i, j)) = (j == k) ? u[i] : (i == k ? u[j] : 0.0);
  return H;
}

double bv_determinant(const Eigen::MatrixXd& A, const std::vector<int>& v) {
  const int N = static_cast<int>(v.size());
  if (A.rows() != cov_dim(N)) throw DomainError("bv_determinant: A has the wrong number of rows");
  Eigen::MatrixXd B(N, N);
  for (int i = 0; i < N; ++i) {
    if (v[i] < 0 || v[i] >= A.cols()) throw DomainError("bv_determinant: column index out of range");
    for (int j = 0; j < N; ++j) B(i, j) = A(sym_pos(i, j), v[i]);
  }
  return B.determinant();
}

double bv_symmetrized(const Eigen::MatrixXd& A, std::vector<int> v) {
  std::vector<int> perm(v.size());
  std::iota(perm.begin(), perm.end(), 0);
  double s = 0;
  std::vector<int> w(v.size());
  do {
    for (size_t i = 0; i < v.size(); ++i) w[i] = v[perm[i]];
    s += bv_determinant(A, w);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return s;
}

std::string to_string(ScalingClass c) {
  switch (c) {
    case ScalingClass::LittleO:
      return "o(r)";
    case ScalingClass::Theta:
      return "Theta(r)";
    default:
      return "slower than r";
  }
}

ScalingReport scaling_class(const SpectralExpansion& ex, const RadialModel& m, const std::vector<int>& v) {
  ScalingReport rep;
  rep.r = {1e-2, 1e-3, 1e-4};
  bool below_floor = false;
  for (double r : rep.r) {
    Eigen::MatrixXd A = aligned_factor(ex, m, r);
    double s = bv_symmetrized(A, v);
    rep.value.push_back(s);
    const double floor = 1e-12 * std::pow(std::max(1.0, A.cwiseAbs().maxCoeff()), ex.N);
    if (std::abs(s) <= floor) below_floor = true;
  }
  if (below_floor) {
    rep.cls = ScalingClass::LittleO;
    rep.slope = std::numeric_limits<double>::infinity();
    return rep;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t k = 0; k < rep.r.size(); ++k) {
    double x = std::log(rep.r[k]), y = std::log(std::abs(rep.value[k]));
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  const double n = static_cast<double>(rep.r.size());
  rep.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  rep.cls = rep.slope >= 1.5 ? ScalingClass::LittleO : rep.slope > 0.5 ? ScalingClass::Theta : ScalingClass::Slower;
  return rep;
}

ScalingReport scaling_class(const RadialModel& m, const Eigen::VectorXd& u, const std::vector<int>& v) {
  return scaling_class(eigenpath(m, u), m, v);
}

double LimitPolynomial::operator()(const Eigen::VectorXd& y) const {
  const Eigen::MatrixXd M0 = matriculate(A0 * y, N);
  const Eigen::MatrixXd M1 = matriculate(A1 * y, N);
  double s = 0;
  for (int j = 0; j < N; ++j) {
    Eigen::MatrixXd M = M0;
    M.row(j) = M1.row(j);
    s += M.determinant();
  }
  return s;
}

double LimitPolynomial::from_coefficients(const Eigen::VectorXd& y) const {
  double s = 0;
  for (const auto& [v, c] : coefficients) {
    double mono = c;
    for (int i : v) mono *= y[i];
    s += mono;
  }
  return s;
}

LimitPolynomial limit_polynomial(const SpectralExpansion& ex) {
  LimitPolynomial h;
  h.N = ex.N;
  h.L = ex.L;
  h.rank0 = ex.rank0;
  h.A0 = ex.A0;
  h.A1 = ex.A1;
  if (ex.N > 5) return h;

  const int N = ex.N, R = ex.rank0;
  std::vector<int> digits(N - 1, 0);
  Eigen::MatrixXd B(N, N);
  for (int j = 0; j < N; ++j)
    for (int n = R; n < ex.L; ++n) {
      std::fill(digits.begin(), digits.end(), 0);
      while (true) {
        std::vector<int> v;
        for (int i = 0, d = 0; i < N; ++i) v.push_back(i == j ? n : digits[d++]);
        for (int i = 0; i < N; ++i)
          for (int c = 0; c < N; ++c) B(i, c) = (i == j ? ex.A1 : ex.A0)(sym_pos(i, c), v[i]);
        const double det = B.determinant();
        if (det != 0.0) {
          std::sort(v.begin(), v.end());
          h.coefficients[v] += det;
        }
        int k = 0;
        while (k < N - 1 && ++digits[k] == R) digits[k++] = 0;
        if (k == N - 1) break;
      }
    }
  return h;
}

LimitPolynomial limit_polynomial(const RadialModel& m, const Eigen::VectorXd& u) {
  return limit_polynomial(eigenpath(m, u));
}

Eigen::VectorXd flip_null(const Eigen::VectorXd& y, int N) {
  Eigen::VectorXd z = y;
  z.tail(N + 1) *= -1.0;
  return z;
}

double h_r(const SpectralExpansion& ex, const RadialModel& m, double r, const Eigen::VectorXd& y) {
  if (!(r > 0)) throw DomainError("h_r: r must be positive");
  return matriculate(aligned_factor(ex, m, r) * y, ex.N).determinant() / r;
}

double h_r(const RadialModel& m, const Eigen::VectorXd& u, double r, const Eigen::VectorXd& y) {
  return h_r(eigenpath(m, u), m, r, y);
}

}  // namespace critfield
