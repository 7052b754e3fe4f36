#include "critfield/field_lab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

#include <fftw3.h>

#include "critfield/errors.hpp"
#include "critfield/rice_mc.hpp"

namespace critfield {

namespace {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// In-place 2-D complex DFT of an M x M array (row index j, column index i).
void dft2(std::vector<std::complex<double>>& a, int M, int sign) {
  auto* p = reinterpret_cast<fftw_complex*>(a.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_dft_2d(M, M, p, p, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(fftw_planner_mutex());
  fftw_destroy_plan(plan);
}

int wrap(int i, int M) { return ((i % M) + M) % M; }

double wrap_lag(double d, double period) {
  if (period <= 0) return d;
  d = std::fmod(std::abs(d), period);
  return std::min(d, period - d);
}

// Uniform cubic B-spline segment to cubic Bernstein coefficients.
const Eigen::Matrix4d& bspline_to_bernstein() {
  static const Eigen::Matrix4d K = [] {
    Eigen::Matrix4d k;
    k << 1, 4, 1, 0,
         0, 4, 2, 0,
         0, 2, 4, 0,
         0, 1, 4, 1;
    return Eigen::Matrix4d(k / 6.0);
  }();
  return K;
}

// Cubic Bernstein to power basis.
const Eigen::Matrix4d& bernstein_to_power() {
  static const Eigen::Matrix4d Q = [] {
    Eigen::Matrix4d q;
    q << 1, 0, 0, 0,
         -3, 3, 0, 0,
         3, -6, 3, 0,
         -1, 3, -3, 1;
    return q;
  }();
  return Q;
}

bool one_sign(const Eigen::MatrixXd& C) { return (C.array() > 0).all() || (C.array() < 0).all(); }

// de Casteljau at 1/2 along the rows (first index).
void split_rows(const Eigen::MatrixXd& C, Eigen::MatrixXd& lo, Eigen::MatrixXd& hi) {
  const Eigen::Index n = C.rows();
  lo.resize(n, C.cols());
  hi.resize(n, C.cols());
  Eigen::MatrixXd w = C;
  for (Eigen::Index k = 0; k < n; ++k) {
    lo.row(k) = w.row(0);
    hi.row(n - 1 - k) = w.row(n - 1 - k);
    for (Eigen::Index i = 0; i + 1 < n - k; ++i) w.row(i) = 0.5 * (w.row(i) + w.row(i + 1));
  }
}

void split_cols(const Eigen::MatrixXd& C, Eigen::MatrixXd& lo, Eigen::MatrixXd& hi) {
  Eigen::MatrixXd a, b;
  split_rows(C.transpose(), a, b);
  lo = a.transpose();
  hi = b.transpose();
}

struct Box {
  double s, t, size;
};

void bracket(const Eigen::MatrixXd& gs, const Eigen::MatrixXd& gt, Box box, int depth, std::vector<Box>& leaves) {
  if (one_sign(gs) || one_sign(gt)) return;
  if (depth == 0) {
    leaves.push_back(box);
    return;
  }
  Eigen::MatrixXd s0, s1, t0, t1;
  split_rows(gs, s0, s1);
  split_rows(gt, t0, t1);
  const double half = 0.5 * box.size;
  const Eigen::MatrixXd* gsl[2] = {&s0, &s1};
  const Eigen::MatrixXd* gtl[2] = {&t0, &t1};
  for (int a = 0; a < 2; ++a) {
    Eigen::MatrixXd u0, u1, v0, v1;
    split_cols(*gsl[a], u0, u1);
    split_cols(*gtl[a], v0, v1);
    bracket(u0, v0, {box.s + a * half, box.t, half}, depth - 1, leaves);
    bracket(u1, v1, {box.s + a * half, box.t + half, half}, depth - 1, leaves);
  }
}

struct PatchJet {
  double v;
  Eigen::Vector2d g;
  Eigen::Matrix2d H;
};

// Value and derivatives in local coordinates of sum P(a,b) s^a t^b.
PatchJet patch_jet(const Eigen::Matrix4d& P, double s, double t) {
  double sp[4] = {1, s, s * s, s * s * s}, tp[4] = {1, t, t * t, t * t * t};
  PatchJet j{0, Eigen::Vector2d::Zero(), Eigen::Matrix2d::Zero()};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const double c = P(a, b);
      j.v += c * sp[a] * tp[b];
      if (a >= 1) j.g[0] += c * a * sp[a - 1] * tp[b];
      if (b >= 1) j.g[1] += c * b * sp[a] * tp[b - 1];
      if (a >= 2) j.H(0, 0) += c * a * (a - 1) * sp[a - 2] * tp[b];
      if (b >= 2) j.H(1, 1) += c * b * (b - 1) * sp[a] * tp[b - 2];
      if (a >= 1 && b >= 1) j.H(0, 1) += c * a * b * sp[a - 1] * tp[b - 1];
    }
  j.H(1, 0) = j.H(0, 1);
  return j;
}

constexpr int kBracketDepth = 4;

}  // namespace

FieldRealization field_from_values(int M, double h, std::vector<double> values) {
  if (M < 4 || !(h > 0)) throw DomainError("field: need M >= 4 and h > 0");
  if (values.size() != static_cast<std::size_t>(M) * M) throw DomainError("field: values must have M*M entries");
  FieldRealization f;
  f.M = M;
  f.h = h;
  f.values = std::move(values);
  return f;
}

FieldRealization sample_field(const RadialModel& m, Grid grid, std::uint64_t seed) {
  if (m.N != 2) throw DomainError("sample_field: the simulator is two-dimensional");
  if (grid.M < 4 || !(grid.h > 0)) throw DomainError("sample_field: need M >= 4 and h > 0");
  if (grid.M * grid.h < 8 * m.correlation_length())
    throw DomainError("sample_field: grid extent is below 8 correlation lengths");

  for (int attempt = 0; attempt <= 2; ++attempt) {
    const int M = grid.M;
    const double h = grid.h;
    std::vector<std::complex<double>> lam(static_cast<std::size_t>(M) * M);
    for (int j = 0; j < M; ++j)
      for (int i = 0; i < M; ++i) {
        const double dx = h * std::min(i, M - i), dy = h * std::min(j, M - j);
        lam[i + static_cast<std::size_t>(M) * j] = m.rho(dx * dx + dy * dy);
      }
    dft2(lam, M, FFTW_FORWARD);
    double lmax = 0, lmin = 0;
    for (const auto& z : lam) lmax = std::max(lmax, z.real()), lmin = std::min(lmin, z.real());
    if (lmin < -1e-8 * lmax) {
      grid.M *= 2;
      continue;
    }

    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x6669656cu};
    std::mt19937_64 g(seq);
    std::normal_distribution<double> nd;
    const double norm = 1.0 / (static_cast<double>(M) * M);
    std::vector<std::complex<double>> z(lam.size());
    for (std::size_t k = 0; k < z.size(); ++k) {
      const double a = std::sqrt(std::max(lam[k].real(), 0.0) * norm);
      const double re = nd(g), im = nd(g);
      z[k] = {a * re, a * im};
    }
    dft2(z, M, FFTW_FORWARD);

    FieldRealization f;
    f.M = M;
    f.h = h;
    f.seed = seed;
    f.model = m.describe();
    f.embedding_retries = attempt;
    f.min_eigen_ratio = lmin / lmax;
    f.values.resize(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) f.values[k] = z[k].real();
    return f;
  }
  throw EmbeddingError("sample_field: circulant embedding has negative eigenvalues after two extent doublings");
}

SplineSurface::SplineSurface(const FieldRealization& f) : M_(f.M), h_(f.h) {
  std::vector<std::complex<double>> a(f.values.begin(), f.values.end());
  dft2(a, M_, FFTW_FORWARD);
  std::vector<double> w(M_);
  for (int k = 0; k < M_; ++k) w[k] = (4.0 + 2.0 * std::cos(2.0 * std::numbers::pi * k / M_)) / 6.0;
  for (int j = 0; j < M_; ++j)
    for (int i = 0; i < M_; ++i) a[i + static_cast<std::size_t>(M_) * j] /= w[i] * w[j];
  dft2(a, M_, FFTW_BACKWARD);
  coef_.resize(a.size());
  const double norm = 1.0 / (static_cast<double>(M_) * M_);
  for (std::size_t k = 0; k < a.size(); ++k) coef_[k] = a[k].real() * norm;
}

double SplineSurface::c(int i, int j) const {
  return coef_[wrap(i, M_) + static_cast<std::size_t>(M_) * wrap(j, M_)];
}

Eigen::Matrix4d SplineSurface::bernstein(int i, int j) const {
  Eigen::Matrix4d C;
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q) C(p, q) = c(i - 1 + p, j - 1 + q);
  const Eigen::Matrix4d& K = bspline_to_bernstein();
  return K * C * K.transpose();
}

SplineSurface::Jet SplineSurface::eval(double x, double y) const {
  const double E = M_ * h_;
  x = std::fmod(x, E);
  y = std::fmod(y, E);
  if (x < 0) x += E;
  if (y < 0) y += E;
  int i = std::min(static_cast<int>(x / h_), M_ - 1), j = std::min(static_cast<int>(y / h_), M_ - 1);
  const Eigen::Matrix4d& Q = bernstein_to_power();
  const PatchJet pj = patch_jet(Q * bernstein(i, j) * Q.transpose(), x / h_ - i, y / h_ - j);
  return {pj.v, pj.g / h_, pj.H / (h_ * h_)};
}

CriticalSearch find_critical_points(const FieldRealization& f, double u_thr) {
  const SplineSurface S(f);
  const int M = f.M;
  const double h = f.h, E = f.extent();
  double scale = 0;
  for (double v : f.values) scale = std::max(scale, std::abs(v));
  scale = std::max(scale, 1.0);
  const Eigen::Matrix4d& Q = bernstein_to_power();

  CriticalSearch out;
  std::vector<CriticalPoint> raw;
  std::vector<Box> leaves;
  for (int j = 0; j < M; ++j)
    for (int i = 0; i < M; ++i) {
      const Eigen::Matrix4d B = S.bernstein(i, j);
      // gradient components in local coordinates: degree (2,3) and (3,2)
      const Eigen::MatrixXd gs = 3.0 * (B.bottomRows(3) - B.topRows(3));
      const Eigen::MatrixXd gt = 3.0 * (B.rightCols(3) - B.leftCols(3));
      if (one_sign(gs) || one_sign(gt)) continue;
      ++out.cells_flagged;
      leaves.clear();
      bracket(gs, gt, {0, 0, 1}, kBracketDepth, leaves);
      if (leaves.empty()) continue;
      const Eigen::Matrix4d P = Q * B * Q.transpose();
      for (const Box& b : leaves) {
        double s = b.s + 0.5 * b.size, t = b.t + 0.5 * b.size;
        bool ok = false;
        PatchJet pj{};
        for (int it = 0; it < 50; ++it) {
          pj = patch_jet(P, s, t);
          const double det = pj.H.determinant();
          if (det == 0.0) break;
          const Eigen::Vector2d step = pj.H.inverse() * pj.g;
          s -= step[0];
          t -= step[1];
          if (!(std::abs(s) < 4 && std::abs(t) < 4)) break;
          if (step.norm() < 1e-14) {
            ok = true;
            break;
          }
        }
        pj = patch_jet(P, s, t);
        const double gnorm = pj.g.norm() / h;
        const double tol = 1e-9;
        if (!ok || gnorm > 1e-8 * scale || s < -tol || s > 1 + tol || t < -tol || t > 1 + tol) {
          // a leaf may bracket no root; only count failures that stayed inside the cell
          if (!ok) ++out.newton_failures;
          continue;
        }
        CriticalPoint cp;
        cp.x = std::fmod((i + std::clamp(s, 0.0, 1.0)) * h, E);
        cp.y = std::fmod((j + std::clamp(t, 0.0, 1.0)) * h, E);
        cp.value = pj.v;
        cp.grad_norm = gnorm;
        cp.hessian = pj.H / (h * h);
        const HessianIndex hi = hessian_index(cp.hessian);
        cp.index = hi.index;
        cp.degenerate = hi.degenerate;
        raw.push_back(cp);
      }
    }

  const double radius = 1e-6 * h;
  for (const auto& p : raw) {
    bool dup = false;
    for (const auto& q : out.points)
      if (std::hypot(wrap_lag(p.x - q.x, E), wrap_lag(p.y - q.y, E)) < radius) {
        dup = true;
        break;
      }
    if (!dup) out.points.push_back(p);
  }
  std::erase_if(out.points, [&](const CriticalPoint& p) { return !(p.value > u_thr); });
  std::sort(out.points.begin(), out.points.end(),
            [](const CriticalPoint& a, const CriticalPoint& b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
  return out;
}

int euler_count(const std::vector<CriticalPoint>& pts) {
  int e = 0;
  for (const auto& p : pts) e += p.index % 2 == 0 ? 1 : -1;
  return e;
}

double PairTable::fraction(int a, int b) const {
  if (pairs == 0) return 0;
  auto it = by_index.find({std::min(a, b), std::max(a, b)});
  return it == by_index.end() ? 0.0 : static_cast<double>(it->second) / pairs;
}

double PairTable::opposite_det_fraction() const {
  return pairs == 0 ? 0.0 : static_cast<double>(opposite_det) / pairs;
}

double PairTable::max_saddle_fraction(int N) const { return fraction(N - 1, N); }

PairTable& PairTable::operator+=(const PairTable& o) {
  points += o.points;
  pairs += o.pairs;
  opposite_det += o.opposite_det;
  for (const auto& [k, v] : o.by_index) by_index[k] += v;
  return *this;
}

PairTable pair_statistics(const std::vector<CriticalPoint>& pts, double eps, double period) {
  PairTable t;
  t.points = pts.size();
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = a + 1; b < pts.size(); ++b) {
      const double d = std::hypot(wrap_lag(pts[a].x - pts[b].x, period), wrap_lag(pts[a].y - pts[b].y, period));
      if (!(d < eps)) continue;
      ++t.pairs;
      ++t.by_index[{std::min(pts[a].index, pts[b].index), std::max(pts[a].index, pts[b].index)}];
      if (pts[a].hessian.determinant() * pts[b].hessian.determinant() < 0) ++t.opposite_det;
    }
  return t;
}

std::uint64_t realization_seed(std::uint64_t seed, int k) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(k)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

SimulationSummary simulate(const RadialModel& m, const SimulationConfig& cfg) {
  if (cfg.realizations <= 0) throw DomainError("simulate: realizations must be positive");
  struct One {
    int euler = 0;
    std::array<std::size_t, 3> counts{0, 0, 0};
    std::size_t failures = 0;
    PairTable pairs;
  };
  const double eps = cfg.eps_corr * m.correlation_length();
  std::vector<One> res(cfg.realizations);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int k; (k = next++) < cfg.realizations;) {
      const FieldRealization f = sample_field(m, cfg.grid, realization_seed(cfg.seed, k));
      const CriticalSearch cs = find_critical_points(f);
      One& o = res[k];
      o.euler = euler_count(cs.points);
      o.failures = cs.newton_failures;
      std::vector<CriticalPoint> above;
      for (const auto& p : cs.points)
        if (p.value > cfg.u_thr) {
          above.push_back(p);
          if (p.index >= 0 && p.index <= 2) ++o.counts[p.index];
        }
      o.pairs = pair_statistics(above, eps, f.extent());
    }
  };
  unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(cfg.realizations));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  SimulationSummary sum;
  sum.realizations = cfg.realizations;
  sum.eps = eps;
  for (const auto& o : res) {
    sum.euler.push_back(o.euler);
    sum.counts_above.push_back(o.counts);
    sum.newton_failures += o.failures;
    sum.pairs += o.pairs;
  }
  return sum;
}

}  // namespace critfield
