#include "critfield/qualification.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "critfield/covariance.hpp"
#include "critfield/errors.hpp"

namespace critfield {

bool QualReport::overall_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const QualCheck& c) { return c.pass; });
}

const QualCheck& QualReport::get(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw DomainError("no qualification check named " + name);
}

std::vector<std::string> QualReport::failed() const {
  std::vector<std::string> out;
  for (const auto& c : checks)
    if (!c.pass) out.push_back(c.name);
  return out;
}

std::vector<double> qualification_grid(double delta) {
  const double hi = delta * delta, lo = hi * 1e-6;
  std::vector<double> g(256);
  for (int i = 0; i < 256; ++i) g[i] = lo * std::pow(hi / lo, i / 255.0);
  return g;
}

QualReport check_qualified(const RadialModel& m) {
  QualReport rep;
  const int N = m.N;
  const double r0 = m.rho0(), r1 = m.rho1(), r2 = m.rho2(), r3 = m.rho3();
  rep.alpha = r2 * r2 / r1;
  rep.beta = r3;
  auto add = [&](std::string name, bool pass, double value, std::string detail = {}) {
    rep.checks.push_back({std::move(name), pass, value, std::move(detail)});
  };

  add("unit_variance", std::abs(r0 - 1.0) <= 1e-12, 1e-12 - std::abs(r0 - 1.0));
  add("rho1_negative", r1 < 0, -r1);
  add("rho2_positive", r2 > 0, r2);
  add("rho3_negative", r3 < 0, -r3);
  const double ab = rep.alpha - 5.0 * rep.beta / 3.0;
  add("alpha_beta", ab > 0, ab);
  const double sb = r2 / (r1 * r1) - static_cast<double>(N) / (N + 2);
  // A margin at rounding level is the boundary itself.
  add("spectral_bound", sb > 1e-12 * std::max(1.0, r2 / (r1 * r1)), sb);

  const auto grid = qualification_grid(m.delta);
  {
    double worst = 1e300, at = 0;
    for (double x : grid) {
      double margin = -r1 - std::abs(m.d(1, x));
      if (margin < worst) worst = margin, at = x;
    }
    std::ostringstream os;
    os << "worst at x=" << at;
    add("rho1_bounded", worst > 0, worst, os.str());
  }
  {
    double worst = 1e300, at = 0;
    for (double x : grid) {
      const double p1 = m.d(1, x), p2 = m.d(2, x);
      double margin = std::min(-p1, r1 * r1 - (p1 * p1 + 2 * p1 * p2 * x + 4 * p2 * p2 * x * x));
      if (margin < worst) worst = margin, at = x;
    }
    std::ostringstream os;
    os << "worst at x=" << at;
    add("gc2", worst > 0, worst, os.str());
  }
  {
    // R_1122(0) - R_1122(s e_1) must shrink at least linearly in s.
    std::vector<double> ratios;
    const double R0 = cov_partials(m, Eigen::VectorXd::Zero(N), {0, 0, 1, 1});
    for (double s = 0.1 * m.delta; s >= 1e-4 * m.delta; s /= 10) {
      Eigen::VectorXd t = Eigen::VectorXd::Zero(N);
      t[0] = s;
      ratios.push_back(std::abs(R0 - cov_partials(m, t, {0, 0, 1, 1})) / s);
    }
    const double growth = ratios.back() / std::max(ratios.front(), 1e-300);
    bool ok = std::all_of(ratios.begin(), ratios.end(), [](double v) { return std::isfinite(v); }) &&
              (ratios.front() == 0.0 || growth <= 2.0);
    std::ostringstream os;
    os << "increment/|t| from " << ratios.front() << " to " << ratios.back();
    add("fourth_increment", ok, ratios.back(), os.str());
  }
  {
    double worst = 1e300, at = 0;
    for (double f : {0.25, 0.5, 1.0}) {
      const double r = f * m.delta;
      Eigen::VectorXd t = Eigen::VectorXd::Zero(N);
      t[N - 1] = r;
      Eigen::MatrixXd C = joint_covariance(m, t);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C, Eigen::EigenvaluesOnly);
      double rel = es.eigenvalues()[0] / C.trace();
      if (rel < worst) worst = rel, at = r;
    }
    Eigen::Matrix2d D;
    D << third_derivative_variance(m), 12.0 * r2, 12.0 * r2, -2.0 * r1;
    const double d3 = D.determinant() / (D.trace() * D.trace());
    std::ostringstream os;
    os << "min relative eigenvalue " << worst << " at r=" << at << "; (X_111, X_1) determinant " << d3;
    add("nondegenerate", worst > 1e-12 && d3 > 1e-12, std::min(worst, d3), os.str());
  }
  return rep;
}

double rescaling_quartic(const RadialModel& m, double C) {
  const int N = m.N;
  const double r1 = m.rho1(), r2 = m.rho2();
  const double k1 = (32.0 + 8.0 * (N - 2)) * r2 / 3.0;
  const double k2 = 8.0 * r1 / 3.0;
  const double k3 = 4.0 * (N - 1) * r1 / 3.0;
  const double k4 = 2.0 * (1.0 - r1 * r1 / (3.0 * r2));
  const double C2 = C * C;
  const double a = (k1 - 8.0 * r2) * C2 + k4, b = k1 * C2 - k4;
  return a * a - b * b - 4.0 * k2 * k3 * C2;
}

namespace {

// f(C) below zero by more than rounding in its terms.
bool admissible(const RadialModel& m, double C) {
  const double r1 = m.rho1(), r2 = m.rho2(), C2 = C * C;
  const double k1 = (32.0 + 8.0 * (m.N - 2)) * r2 / 3.0;
  const double k4 = 2.0 * (1.0 - r1 * r1 / (3.0 * r2));
  const double scale = std::pow(k1 * C2 + std::abs(k4), 2) + std::abs(r1 * r1 * C2) * 32.0 * m.N;
  return rescaling_quartic(m, C) < -1e-8 * scale;
}

}  // namespace

double find_rescaling(const RadialModel& m) {
  double C = 1.0;
  for (int i = 0; i < 200 && !admissible(m, C); ++i) C *= 2.0;
  if (!admissible(m, C)) throw DomainError("find_rescaling: no admissible C found");
  return C;
}

}  // namespace critfield
