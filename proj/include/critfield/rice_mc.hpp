#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "critfield/radial_model.hpp"

namespace critfield {

struct HessianIndex {
  int index = 0;
  bool degenerate = false;
};

// Negative eigenvalues below -1e-10*|M|_F; degenerate when some |eig| is within that.
HessianIndex hessian_index(const Eigen::MatrixXd& M);

enum class Sampler {
  Auto,   // Tail for u_thr > 0, Plain otherwise
  Plain,  // y ~ N(0, I_L), (x'', x, z) = F y
  Tail,   // (x, z) drawn conditionally on x, z > u_thr, weighted by the tail mass
};

enum class Factor {
  Symmetric,  // non-negative square root of Sigma
  Eigen,      // P Lambda^{1/2}
};

struct RiceOptions {
  std::size_t n = 2'000'000;
  std::uint64_t seed = 1;
  unsigned threads = 0;  // 0: hardware concurrency
  Sampler sampler = Sampler::Auto;
  Factor factor = Factor::Symmetric;
  bool antithetic = true;
  bool prefactor = true;
};

// Per-unit sums of |det| * indicator by Hessian index; bucket N+1 holds degenerate samples.
// A unit is one sample, or an antithetic pair averaged.
struct RiceSums {
  int N = 0;
  double r = 0, u_threshold = 0;
  std::uint64_t seed = 0;
  std::size_t n = 0, units = 0, degenerate = 0;
  Eigen::VectorXd mean;  // per unit, N+2 buckets
  Eigen::MatrixXd cov;   // unit-level covariance of the buckets
  double prefactor = 1;  // P(X>u)^{-1} p(0)^{-1} p_t(0,0)
  Sampler sampler = Sampler::Plain;
};

struct RiceEstimate {
  double value = 0;
  double std_error = 0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string tag;
  double r = 0, u_threshold = 0;
};

RiceSums rice_sums(const RadialModel& m, double r, const Eigen::VectorXd& u_dir, double u_thr,
                   const RiceOptions& opt = {});

// P(X(0)>u)^{-1} p(0)^{-1} p_t(0,0) with p(0)=(-4 pi rho'(0))^{-N/2}, p_t(0,0)=(2 pi)^{-N} det(V22)^{-1/2}.
double rice_prefactor(const RadialModel& m, double r, const Eigen::VectorXd& u_dir, double u_thr);

// Linear combinations of buckets, a.mean and a.mean / b.mean with delta-method errors.
RiceEstimate bucket_sum(const RiceSums& s, const Eigen::VectorXd& a, const std::string& tag, bool with_prefactor);
RiceEstimate bucket_ratio(const RiceSums& s, const Eigen::VectorXd& a, const Eigen::VectorXd& b, const std::string& tag);

// Bucket selectors.
Eigen::VectorXd index_bucket(int N, int k);
Eigen::VectorXd parity_buckets(int N, bool even);
Eigen::VectorXd all_buckets(int N);

// k outside [0, N] returns 0 without sampling.
RiceEstimate rice_density_mc(const RadialModel& m, double r, const Eigen::VectorXd& u_dir, double u_thr, int k,
                             const RiceOptions& opt = {});
// Unconditional expected number of index-k critical points per unit volume,
// E[|det X''| 1{index = k}] p_grad(0), by sampling the Hessian law at a single point.
RiceEstimate critical_density_mc(const RadialModel& m, int k, const RiceOptions& opt = {});

RiceEstimate sign_ratio(const RadialModel& m, double r, double u_thr, const RiceOptions& opt = {});
RiceEstimate psi_ratio(const RadialModel& m, double r, double u_thr, const RiceOptions& opt = {});
RiceEstimate maxima_share(const RadialModel& m, double r, double u_thr, const RiceOptions& opt = {});

RiceEstimate sign_ratio(const RiceSums& s);
RiceEstimate psi_ratio(const RiceSums& s);
RiceEstimate maxima_share(const RiceSums& s);

// Non-negative square root of a PSD matrix (negative rounding eigenvalues clamped).
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& S);

enum class ProjectionFace { FirstFace, SecondFace, Edge };
std::string to_string(ProjectionFace f);

struct ProjectionDiag {
  double r = 0, u_threshold = 0;
  Eigen::VectorXd y_hat;
  ProjectionFace which = ProjectionFace::Edge;
  Eigen::VectorXd candidate_first, candidate_second, candidate_edge;  // edge empty when undefined
  Eigen::VectorXd hessian_eigs;  // ascending
};

// r = 0 uses the limit Sigma0, where both faces coincide and the edge is undefined.
ProjectionDiag projection_point(const RadialModel& m, double r, double u_thr);

}  // namespace critfield
