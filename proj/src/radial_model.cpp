#include "critfield/radial_model.hpp"

#include <cmath>
#include <sstream>

#include "critfield/errors.hpp"

namespace critfield {

double RadialModel::d(int k, double x) const {
  if (k < 0 || k > 3) throw DomainError("RadialModel: derivative order must be 0..3");
  return std::pow(scale, k) * fn[k](scale * x);
}

double RadialModel::correlation_length() const { return 1.0 / std::sqrt(-2.0 * rho1()); }

std::string RadialModel::describe() const {
  std::ostringstream os;
  os << family;
  char sep = ':';
  for (const auto& [k, v] : params) {
    os << sep << k << '=' << v;
    sep = ',';
  }
  return os.str();
}

RadialModel gaussian_model(int N, double a) {
  if (N < 2) throw DomainError("model: N must be at least 2");
  if (!(a > 0)) throw DomainError("gaussian model: a must be positive");
  RadialModel m;
  m.N = N;
  m.family = "gaussian";
  m.params = {{"a", a}};
  m.fn = {[a](double x) { return std::exp(-a * x); },
          [a](double x) { return -a * std::exp(-a * x); },
          [a](double x) { return a * a * std::exp(-a * x); },
          [a](double x) { return -a * a * a * std::exp(-a * x); }};
  return m;
}

RadialModel cauchy_model(int N, double ell, double nu) {
  if (N < 2) throw DomainError("model: N must be at least 2");
  if (!(ell > 0) || !(nu > 0)) throw DomainError("cauchy model: ell and nu must be positive");
  RadialModel m;
  m.N = N;
  m.family = "cauchy";
  m.params = {{"ell", ell}, {"nu", nu}};
  auto w = [ell](double x) { return 1.0 + x / ell; };
  m.fn = {[=](double x) { return std::pow(w(x), -nu); },
          [=](double x) { return -nu / ell * std::pow(w(x), -nu - 1); },
          [=](double x) { return nu * (nu + 1) / (ell * ell) * std::pow(w(x), -nu - 2); },
          [=](double x) {
            return -nu * (nu + 1) * (nu + 2) / (ell * ell * ell) * std::pow(w(x), -nu - 3);
          }};
  return m;
}

RadialModel custom_model(int N, ScalarFn rho, ScalarFn d1, ScalarFn d2, ScalarFn d3) {
  if (N < 2) throw DomainError("model: N must be at least 2");
  RadialModel m;
  m.N = N;
  m.fn = {std::move(rho), std::move(d1), std::move(d2), std::move(d3)};
  return m;
}

RadialModel rescale(const RadialModel& m, double C) {
  if (!(C > 0)) throw DomainError("rescale: C must be positive");
  RadialModel out = m;
  out.scale = m.scale * C;
  return out;
}

RadialModel parse_model(const std::string& spec, int N) {
  auto colon = spec.find(':');
  std::string family = spec.substr(0, colon);
  std::map<std::string, double> kv;
  if (colon != std::string::npos) {
    std::stringstream ss(spec.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      auto eq = item.find('=');
      if (eq == std::string::npos) throw DomainError("model: expected key=value in '" + item + "'");
      try {
        kv[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
      } catch (const std::exception&) {
        throw DomainError("model: bad number in '" + item + "'");
      }
    }
  }
  auto take = [&](const std::string& k, double def) {
    auto it = kv.find(k);
    if (it == kv.end()) return def;
    double v = it->second;
    kv.erase(it);
    return v;
  };
  RadialModel m;
  if (family == "gaussian") {
    m = gaussian_model(N, take("a", 1.0));
  } else if (family == "cauchy") {
    double ell = take("ell", 1.0);
    m = cauchy_model(N, ell, take("nu", 1.0));
  } else {
    throw DomainError("model: unknown family '" + family + "'");
  }
  if (kv.count("delta")) m.delta = take("delta", 1.0);
  if (!kv.empty()) throw DomainError("model: unknown parameter '" + kv.begin()->first + "'");
  return m;
}

}  // namespace critfield
