#pragma once

#include <string>
#include <vector>

#include "critfield/radial_model.hpp"

namespace critfield {

struct QualCheck {
  std::string name;
  bool pass = false;
  double value = 0;  // the computed scalar or worst margin; positive means satisfied
  std::string detail;
};

struct QualReport {
  std::vector<QualCheck> checks;
  double alpha = 0, beta = 0;
  bool overall_pass() const;
  const QualCheck& get(const std::string& name) const;
  std::vector<std::string> failed() const;
};

// Names: unit_variance, rho1_negative, rho2_positive, rho3_negative, alpha_beta,
// spectral_bound, rho1_bounded, gc2, fourth_increment, nondegenerate.
QualReport check_qualified(const RadialModel& m);

// 256 log-spaced points in (0, delta^2].
std::vector<double> qualification_grid(double delta);

// Quartic f(C) whose negativity gives lambda_s,0 < 4 rho~''(0) for rho~(x) = rho(Cx).
double rescaling_quartic(const RadialModel& m, double C);
double find_rescaling(const RadialModel& m);

}  // namespace critfield
