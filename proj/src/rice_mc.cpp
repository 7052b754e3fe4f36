#include "critfield/rice_mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <thread>

#include <Eigen/Eigenvalues>

#include "critfield/covariance.hpp"
#include "critfield/eigen_structure.hpp"
#include "critfield/errors.hpp"
#include "critfield/symvec.hpp"

namespace critfield {

namespace {

constexpr std::size_t kBlockUnits = 4096;

double normal_tail(double a) { return 0.5 * std::erfc(a / std::numbers::sqrt2); }

// Index bucket (N+1 when degenerate) and |det| of the symmetric matrix stored as vech.
std::pair<int, double> classify(const double* h, int N) {
  if (N == 1) {
    const double a = h[0];
    if (a == 0.0) return {2, 0.0};
    return {a < 0 ? 1 : 0, std::abs(a)};
  }
  if (N == 2) {
    const double a = h[0], b = h[1], c = h[2];
    const double fro = std::sqrt(a * a + 2 * b * b + c * c), tol = 1e-10 * fro;
    const double mid = 0.5 * (a + c), rad = std::hypot(0.5 * (a - c), b);
    const double e0 = mid - rad, e1 = mid + rad;
    const double det = std::abs(a * c - b * b);
    if (fro == 0.0 || std::abs(e0) <= tol || std::abs(e1) <= tol) return {3, det};
    return {(e0 < 0) + (e1 < 0), det};
  }
  Eigen::MatrixXd M(N, N);
  for (int j = 0; j < N; ++j)
    for (int i = 0; i <= j; ++i) M(i, j) = M(j, i) = h[sym_pos(i, j)];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  const double tol = 1e-10 * M.norm();
  int k = 0;
  bool degenerate = M.norm() == 0.0;
  double det = 1;
  for (int i = 0; i < N; ++i) {
    const double e = es.eigenvalues()[i];
    det *= e;
    if (std::abs(e) <= tol) degenerate = true;
    if (e < -tol) ++k;
  }
  return {degenerate ? N + 1 : k, std::abs(det)};
}

// Standard normal conditioned on exceeding a.
template <class Rng>
double truncated_normal(Rng& g, double a) {
  std::normal_distribution<double> nd;
  if (a < 0.5) {
    while (true) {
      const double z = nd(g);
      if (z > a) return z;
    }
  }
  std::uniform_real_distribution<double> ud;
  const double lam = 0.5 * (a + std::sqrt(a * a + 4));
  while (true) {
    const double z = a - std::log1p(-ud(g)) / lam;
    if (ud(g) <= std::exp(-0.5 * (z - lam) * (z - lam))) return z;
  }
}

struct Plan {
  int N = 0, L = 0;
  double u = 0;
  Sampler sampler = Sampler::Plain;
  bool antithetic = true;
  Eigen::MatrixXd F;  // plain
  // tail: d ~ N(0, var_d); s | d ~ N(kappa d, tau^2) restricted to s > u + |d|;
  // hessian | (s, d) = G (s, d) + K xi
  double sd_d = 0, kappa = 0, tau = 0;
  Eigen::MatrixXd G, K;
};

struct BlockStats {
  std::size_t units = 0, degenerate = 0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd m2;
};

void merge(BlockStats& acc, const BlockStats& b) {
  if (b.units == 0) return;
  if (acc.units == 0) {
    acc = b;
    return;
  }
  const double na = static_cast<double>(acc.units), nb = static_cast<double>(b.units), n = na + nb;
  const Eigen::VectorXd delta = b.mean - acc.mean;
  acc.mean += delta * (nb / n);
  acc.m2 += b.m2 + delta * delta.transpose() * (na * nb / n);
  acc.units += b.units;
  acc.degenerate += b.degenerate;
}

BlockStats run_block(const Plan& p, std::uint64_t seed, std::size_t block, std::size_t units) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32)};
  std::mt19937_64 g(seq);
  std::normal_distribution<double> nd;
  const int B = p.N + 2, H = p.L - 2;
  BlockStats st;
  st.mean = Eigen::VectorXd::Zero(B);
  st.m2 = Eigen::MatrixXd::Zero(B, B);
  Eigen::VectorXd y(p.L), v(p.L), xi(H), h(H), unit(B);
  const int reps = p.antithetic ? 2 : 1;

  for (std::size_t k = 0; k < units; ++k) {
    unit.setZero();
    if (p.sampler == Sampler::Plain) {
      for (auto& e : y) e = nd(g);
      for (int rep = 0; rep < reps; ++rep) {
        v.noalias() = p.F * (rep == 0 ? y : Eigen::VectorXd(-y));
        if (v[p.L - 2] > p.u && v[p.L - 1] > p.u) {
          auto [bucket, det] = classify(v.data(), p.N);
          unit[bucket] += det;
          st.degenerate += bucket == p.N + 1;
        }
      }
    } else {
      const double d = p.sd_d * nd(g);
      const double mu = p.kappa * d;
      double s, w;
      if (std::isinf(p.u)) {
        s = mu + p.tau * nd(g);
        w = 1.0;
      } else {
        const double a = (p.u + std::abs(d) - mu) / p.tau;
        w = normal_tail(a);
        s = mu + p.tau * truncated_normal(g, a);
      }
      for (auto& e : xi) e = nd(g);
      for (int rep = 0; rep < reps; ++rep) {
        h.noalias() = p.G.col(0) * s + p.G.col(1) * d;
        if (rep == 0)
          h.noalias() += p.K * xi;
        else
          h.noalias() -= p.K * xi;
        auto [bucket, det] = classify(h.data(), p.N);
        unit[bucket] += w * det;
        st.degenerate += bucket == p.N + 1;
      }
    }
    unit /= reps;
    ++st.units;
    const Eigen::VectorXd delta = unit - st.mean;
    st.mean += delta / static_cast<double>(st.units);
    st.m2 += delta * (unit - st.mean).transpose();
  }
  st.m2 = 0.5 * (st.m2 + st.m2.transpose()).eval();
  return st;
}

Plan make_plan(const RadialModel& m, double r, const Eigen::VectorXd& u_dir, double u_thr, const RiceOptions& opt) {
  Plan p;
  p.N = m.N;
  p.L = cov_dim(m.N);
  p.u = u_thr;
  p.antithetic = opt.antithetic;
  p.sampler = opt.sampler == Sampler::Auto ? (u_thr > 0 ? Sampler::Tail : Sampler::Plain) : opt.sampler;
  const Eigen::MatrixXd S = conditional_covariance(m, r, u_dir).sigma;
  const int L = p.L, H = L - 2;

  if (p.sampler == Sampler::Plain) {
    if (opt.factor == Factor::Symmetric) {
      p.F = psd_sqrt(S);
    } else {
      OrderedEig oe = ordered_eigendecomposition(S);
      p.F = oe.vectors * oe.values.cwiseMax(0.0).cwiseSqrt().asDiagonal();
    }
    return p;
  }

  Eigen::Matrix2d T;
  T << 0.5, 0.5, 0.5, -0.5;
  const Eigen::Matrix2d Ssd = T * S.bottomRightCorner(2, 2) * T.transpose();
  const Eigen::MatrixXd Shsd = S.topRightCorner(H, 2) * T.transpose();
  const double var_d = Ssd(1, 1);
  const double tau2 = Ssd(0, 0) - Ssd(0, 1) * Ssd(0, 1) / var_d;
  // var_d ~ r^6 comes out of a cancelling difference of O(1) entries
  if (!(var_d > 1e-13 * Ssd(0, 0)) || !(tau2 > 0))
    throw ConditioningError("rice_mc: Var(X(t)-X(0)) is lost to rounding at this r; use the plain sampler");
  p.sd_d = std::sqrt(var_d);
  p.kappa = Ssd(0, 1) / var_d;
  p.tau = std::sqrt(tau2);
  p.G = Shsd * Ssd.inverse();
  const Eigen::MatrixXd C = S.topLeftCorner(H, H) - p.G * Shsd.transpose();
  p.K = psd_sqrt(0.5 * (C + C.transpose()));
  return p;
}

Eigen::VectorXd scaled(const RiceSums& s, bool with_prefactor, const Eigen::VectorXd& v) {
  return with_prefactor ? Eigen::VectorXd(s.prefactor * v) : v;
}

}  // namespace

HessianIndex hessian_index(const Eigen::MatrixXd& M) {
  const int N = static_cast<int>(M.rows());
  if (M.cols() != N) throw DomainError("hessian_index: matrix is not square");
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, M.cwiseAbs().maxCoeff()))
    throw DomainError("hessian_index: matrix is not symmetric");
  const Eigen::VectorXd h = vectorize_sym(M);
  auto [bucket, det] = classify(h.data(), N);
  (void)det;
  if (bucket == N + 1) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    const double tol = 1e-10 * M.norm();
    return {static_cast<int>((es.eigenvalues().array() < -tol).count()), true};
  }
  return {bucket, false};
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (S + S.transpose()));
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

double rice_prefactor(const RadialModel& m, double r, const Eigen::VectorXd& u_dir, double u_thr) {
  const int N = m.N;
  const double tail = std::isinf(u_thr) && u_thr < 0 ? 1.0 : normal_tail(u_thr / std::sqrt(m.rho0()));
  const double p0 = std::pow(-4.0 * std::numbers::pi * m.rho1(), -0.5 * N);
  const CondCov cc = conditional_covariance(m, r, u_dir);
  const double pt = std::pow(2.0 * std::numbers::pi, -N) / std::sqrt(cc.V22.determinant());
  return pt / (tail * p0);
}

RiceSums rice_sums(const RadialModel& m, double r, const Eigen::VectorXd& u_dir, double u_thr, const RiceOptions& opt) {
  if (opt.n == 0) throw DomainError("rice_mc: n must be positive");
  const Plan plan = make_plan(m, r, u_dir, u_thr, opt);

  RiceSums s;
  s.N = m.N;
  s.r = r;
  s.u_threshold = u_thr;
  s.seed = opt.seed;
  s.sampler = plan.sampler;
  s.units = opt.antithetic ? (opt.n + 1) / 2 : opt.n;
  s.n = opt.antithetic ? 2 * s.units : s.units;
  s.prefactor = rice_prefactor(m, r, u_dir, u_thr);

  const std::size_t blocks = (s.units + kBlockUnits - 1) / kBlockUnits;
  std::vector<BlockStats> results(blocks);
  unsigned threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, blocks));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t b; (b = next++) < blocks;) {
      const std::size_t units = std::min(kBlockUnits, s.units - b * kBlockUnits);
      results[b] = run_block(plan, opt.seed, b, units);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  BlockStats acc;
  for (const auto& b : results) merge(acc, b);
  s.mean = acc.mean;
  s.cov = acc.units > 1 ? Eigen::MatrixXd(acc.m2 / static_cast<double>(acc.units - 1))
                        : Eigen::MatrixXd::Zero(m.N + 2, m.N + 2);
  s.degenerate = acc.degenerate;
  return s;
}

Eigen::VectorXd index_bucket(int N, int k) {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(N + 2);
  if (k >= 0 && k <= N) a[k] = 1;
  return a;
}

Eigen::VectorXd parity_buckets(int N, bool even) {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(N + 2);
  for (int k = even ? 0 : 1; k <= N; k += 2) a[k] = 1;
  return a;
}

Eigen::VectorXd all_buckets(int N) { return Eigen::VectorXd::Ones(N + 2); }

RiceEstimate bucket_sum(const RiceSums& s, const Eigen::VectorXd& a, const std::string& tag, bool with_prefactor) {
  RiceEstimate e;
  e.tag = tag;
  e.n = s.n;
  e.seed = s.seed;
  e.r = s.r;
  e.u_threshold = s.u_threshold;
  const Eigen::VectorXd w = scaled(s, with_prefactor, a);
  e.value = w.dot(s.mean);
  e.std_error = std::sqrt(std::max(0.0, w.dot(s.cov * w)) / static_cast<double>(s.units));
  return e;
}

RiceEstimate bucket_ratio(const RiceSums& s, const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                          const std::string& tag) {
  const double num = a.dot(s.mean), den = b.dot(s.mean);
  if (!(den > 0)) throw InsufficientSamplesError("rice_mc: denominator of " + tag + " has no samples");
  RiceEstimate e;
  e.tag = tag;
  e.n = s.n;
  e.seed = s.seed;
  e.r = s.r;
  e.u_threshold = s.u_threshold;
  e.value = num / den;
  const Eigen::VectorXd c = a - e.value * b;
  e.std_error = std::sqrt(std::max(0.0, c.dot(s.cov * c)) / static_cast<double>(s.units)) / den;
  return e;
}

RiceEstimate rice_density_mc(const RadialModel& m, double r, const Eigen::VectorXd& u_dir, double u_thr, int k,
                             const RiceOptions& opt) {
  if (opt.n == 0) throw DomainError("rice_mc: n must be positive");
  if (k < 0 || k > m.N) {
    RiceEstimate e;
    e.tag = "f_" + std::to_string(k);
    e.seed = opt.seed;
    e.r = r;
    e.u_threshold = u_thr;
    return e;
  }
  const RiceSums s = rice_sums(m, r, u_dir, u_thr, opt);
  return bucket_sum(s, index_bucket(m.N, k), "f_" + std::to_string(k), opt.prefactor);
}

RiceEstimate sign_ratio(const RiceSums& s) {
  return bucket_ratio(s, parity_buckets(s.N, true), parity_buckets(s.N, false), "sign_ratio");
}

RiceEstimate psi_ratio(const RiceSums& s) {
  Eigen::VectorXd num = Eigen::VectorXd::Zero(s.N + 2);
  num.head(s.N - 1).setOnes();
  return bucket_ratio(s, num, index_bucket(s.N, s.N - 1) + index_bucket(s.N, s.N), "psi");
}

RiceEstimate maxima_share(const RiceSums& s) {
  return bucket_ratio(s, index_bucket(s.N, s.N), index_bucket(s.N, s.N - 1) + index_bucket(s.N, s.N),
                      "maxima_share");
}

RiceEstimate sign_ratio(const RadialModel& m, double r, double u_thr, const RiceOptions& opt) {
  return sign_ratio(rice_sums(m, r, axis_direction(m.N), u_thr, opt));
}

RiceEstimate psi_ratio(const RadialModel& m, double r, double u_thr, const RiceOptions& opt) {
  return psi_ratio(rice_sums(m, r, axis_direction(m.N), u_thr, opt));
}

RiceEstimate maxima_share(const RadialModel& m, double r, double u_thr, const RiceOptions& opt) {
  return maxima_share(rice_sums(m, r, axis_direction(m.N), u_thr, opt));
}

std::string to_string(ProjectionFace f) {
  switch (f) {
    case ProjectionFace::FirstFace:
      return "L-1 face";
    case ProjectionFace::SecondFace:
      return "L face";
    default:
      return "edge";
  }
}

ProjectionDiag projection_point(const RadialModel& m, double r, double u_thr) {
  if (r < 0) throw DomainError("projection_point: r must be non-negative");
  const int N = m.N, L = cov_dim(N);
  const Eigen::MatrixXd S = r == 0 ? sigma_expansion(m, axis_direction(N)).S0
                                   : conditional_covariance(m, r, axis_direction(N)).sigma;
  const Eigen::MatrixXd At = psd_sqrt(S);
  const int i1 = L - 2, i2 = L - 1;

  ProjectionDiag pd;
  pd.r = r;
  pd.u_threshold = u_thr;
  pd.candidate_first = (u_thr / S(i1, i1)) * At.row(i1).transpose();
  pd.candidate_second = (u_thr / S(i2, i2)) * At.row(i2).transpose();
  const double a = 0.5 * (S(i1, i1) + S(i2, i2)), b = S(i1, i2);
  const double block_det = S(i1, i1) * S(i2, i2) - b * b;
  const bool singular = !(block_det > 1e-14 * a * a);
  if (singular && r > 0) throw ConditioningError("projection_point: Sigma[(L-1):L,(L-1):L] is singular");
  if (!singular) pd.candidate_edge = (u_thr / (a + b)) * (At.row(i1) + At.row(i2)).transpose();

  auto feasible = [&](const Eigen::VectorXd& y) {
    const double tol = 1e-10 * std::max(1.0, std::abs(u_thr));
    return At.row(i1).dot(y) >= u_thr - tol && At.row(i2).dot(y) >= u_thr - tol;
  };
  double best = std::numeric_limits<double>::infinity();
  auto consider = [&](const Eigen::VectorXd& y, ProjectionFace f) {
    if (y.size() == 0 || !feasible(y)) return;
    if (pd.y_hat.size() == 0 || y.norm() < best * (1 - 1e-12)) {
      best = y.norm();
      pd.y_hat = y;
      pd.which = f;
    }
  };
  consider(pd.candidate_first, ProjectionFace::FirstFace);
  consider(pd.candidate_second, ProjectionFace::SecondFace);
  consider(pd.candidate_edge, ProjectionFace::Edge);
  if (pd.y_hat.size() == 0) throw ConditioningError("projection_point: no feasible candidate");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(matriculate(At * pd.y_hat, N), Eigen::EigenvaluesOnly);
  pd.hessian_eigs = es.eigenvalues();
  return pd;
}

RiceEstimate critical_density_mc(const RadialModel& m, int k, const RiceOptions& opt) {
  if (opt.n == 0) throw DomainError("critical_density_mc: n must be positive");
  const int N = m.N, H = sym_len(N);
  RiceEstimate e;
  e.tag = "density_" + std::to_string(k);
  e.seed = opt.seed;
  e.n = opt.n;
  e.u_threshold = -std::numeric_limits<double>::infinity();
  if (k < 0 || k > N) return e;

  // Cov(X_ij, X_kl) = 4 rho''(0) (d_ij d_kl + d_ik d_jl + d_il d_jk)
  Eigen::MatrixXd S(H, H);
  for (int j = 0; j < N; ++j)
    for (int i = 0; i <= j; ++i)
      for (int q = 0; q < N; ++q)
        for (int p = 0; p <= q; ++p)
          S(sym_pos(i, j), sym_pos(p, q)) =
              4 * m.rho2() * ((i == j && p == q) + (i == p && j == q) + (i == q && j == p));
  const Eigen::MatrixXd F = psd_sqrt(S);
  const double pgrad = std::pow(-4 * std::numbers::pi * m.rho1(), -0.5 * N);

  std::seed_seq seq{static_cast<std::uint32_t>(opt.seed), static_cast<std::uint32_t>(opt.seed >> 32), 0x6b726963u};
  std::mt19937_64 g(seq);
  std::normal_distribution<double> nd;
  Eigen::VectorXd y(H), v(H);
  double mean = 0, m2 = 0;
  for (std::size_t t = 0; t < opt.n; ++t) {
    for (auto& x : y) x = nd(g);
    v.noalias() = F * y;
    auto [bucket, det] = classify(v.data(), N);
    const double f = bucket == k ? det : 0.0;
    const double d = f - mean;
    mean += d / static_cast<double>(t + 1);
    m2 += d * (f - mean);
  }
  e.value = pgrad * mean;
  e.std_error = opt.n > 1 ? pgrad * std::sqrt(m2 / static_cast<double>(opt.n - 1) / static_cast<double>(opt.n)) : 0.0;
  return e;
}

}  // namespace critfield
