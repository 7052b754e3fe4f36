#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "critfield/radial_model.hpp"

namespace critfield {

struct Grid {
  int M = 128;      // points per axis
  double h = 0.125; // spacing
};

// Periodic field on the square torus [0, M h)^2; values[i + M j] sits at (i h, j h).
struct FieldRealization {
  int M = 0;
  double h = 0;
  std::vector<double> values;
  std::uint64_t seed = 0;
  std::string model;
  int embedding_retries = 0;
  double min_eigen_ratio = 0;  // most negative circulant eigenvalue over the largest

  double extent() const { return M * h; }
  double at(int i, int j) const { return values[static_cast<std::size_t>(i) + static_cast<std::size_t>(M) * j]; }
};

// Circulant embedding of R(t) = rho(|t|^2) on the torus. The grid must span at least
// 8 correlation lengths. If the circulant spectrum has an eigenvalue below -1e-8 of
// the largest, the extent is doubled (at most twice) before giving up.
FieldRealization sample_field(const RadialModel& m, Grid grid, std::uint64_t seed);

FieldRealization field_from_values(int M, double h, std::vector<double> values);

// Periodic bicubic B-spline interpolant of a realization.
class SplineSurface {
 public:
  explicit SplineSurface(const FieldRealization& f);

  struct Jet {
    double value;
    Eigen::Vector2d grad;
    Eigen::Matrix2d hess;
  };
  Jet eval(double x, double y) const;

  int M() const { return M_; }
  double h() const { return h_; }
  // 4x4 Bernstein coefficients of the patch on cell (i, j), local coordinates in [0,1]^2.
  Eigen::Matrix4d bernstein(int i, int j) const;

 private:
  int M_;
  double h_;
  std::vector<double> coef_;
  double c(int i, int j) const;
};

struct CriticalPoint {
  double x = 0, y = 0;
  double value = 0;
  double grad_norm = 0;
  Eigen::Matrix2d hessian = Eigen::Matrix2d::Zero();
  int index = 0;
  bool degenerate = false;
};

struct CriticalSearch {
  std::vector<CriticalPoint> points;
  std::size_t cells_flagged = 0;
  std::size_t newton_failures = 0;  // candidate boxes where Newton left the box or stalled
};

// All critical points of the interpolant with value above u_thr.
CriticalSearch find_critical_points(const FieldRealization& f,
                                    double u_thr = -std::numeric_limits<double>::infinity());

// #max - #saddle + #min
int euler_count(const std::vector<CriticalPoint>& pts);

struct PairTable {
  std::size_t points = 0, pairs = 0, opposite_det = 0;
  std::map<std::pair<int, int>, std::size_t> by_index;

  double fraction(int a, int b) const;
  double opposite_det_fraction() const;
  double max_saddle_fraction(int N = 2) const;
  PairTable& operator+=(const PairTable& o);
};

// Unordered pairs closer than eps; period > 0 measures distance on the torus.
PairTable pair_statistics(const std::vector<CriticalPoint>& pts, double eps, double period = 0);

struct SimulationConfig {
  Grid grid;
  int realizations = 50;
  std::uint64_t seed = 0;
  double u_thr = 2.5;
  double eps_corr = 0.5;  // pair radius in correlation lengths
  unsigned threads = 0;
};

struct SimulationSummary {
  int realizations = 0;
  std::vector<int> euler;              // unthresholded, per realization
  std::vector<std::array<std::size_t, 3>> counts_above;  // by index, per realization
  std::size_t newton_failures = 0;
  PairTable pairs;
  double eps = 0;
};

// Seed of realization k in `simulate`.
std::uint64_t realization_seed(std::uint64_t seed, int k);

SimulationSummary simulate(const RadialModel& m, const SimulationConfig& cfg);

}  // namespace critfield
