#include "cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "critfield/covariance.hpp"
#include "critfield/eigen_structure.hpp"
#include "critfield/errors.hpp"
#include "critfield/field_lab.hpp"
#include "critfield/qualification.hpp"
#include "critfield/rice_mc.hpp"
#include "critfield/symvec.hpp"

namespace critfield::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::set<std::string> kCommands{"check", "sigma", "spectrum", "hpoly", "ratio",
                                      "psi",   "share", "simulate", "report"};

struct ModelCfg {
  std::string family = "gaussian";
  std::map<std::string, double> params{{"a", 1.0}};
  int N = 2;
  double scale = 1.0;
};

struct RunConfig {
  std::string command;
  ModelCfg model;
  std::vector<double> r, u;
  std::size_t n = 2000000;
  std::uint64_t seed = 0;
  unsigned shards = 0;
  int M = 128;
  double h = 0.125;
  int realizations = 50;
  double eps = 0.5;
  std::string out;
  std::string format = "json";
  bool verify = false;
  std::vector<std::string> inputs;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string model_spec(const ModelCfg& m) {
  std::string s = m.family;
  char sep = ':';
  for (const auto& [k, v] : m.params) {
    s += sep + k + "=" + num(v);
    sep = ',';
  }
  return s;
}

RadialModel build_model(const ModelCfg& c) {
  RadialModel m = parse_model(model_spec(c), c.N);
  if (!(c.scale > 0)) throw DomainError("model: scale must be positive");
  return c.scale == 1.0 ? m : rescale(m, c.scale);
}

ModelCfg model_from_spec(const std::string& spec, int N) {
  const RadialModel m = parse_model(spec, N);
  ModelCfg c;
  c.family = m.family;
  c.params = m.params;
  c.N = N;
  return c;
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
}

std::vector<double> number_list(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a nonempty list of numbers");
  std::vector<double> v;
  for (const auto& e : j) {
    if (!e.is_number()) throw ConfigError(where + ": expected numbers");
    v.push_back(e.get<double>());
  }
  return v;
}

template <class T>
T field(const json& j, const std::string& key, T def, const std::string& where) {
  if (!j.contains(key)) return def;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

// A saved artifact is accepted as a config: its embedded config is used.
void load_config(const std::string& path, RunConfig& c) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (j.is_object() && j.contains("config") && j.contains("results")) j = j["config"];
  check_keys(j, {"schema", "command", "model", "sweep", "mc", "sim", "output", "verify"}, "config");
  if (j.contains("schema") && j["schema"] != 1) throw ConfigError("config: unsupported schema");
  if (!j.contains("model")) throw ConfigError("config: missing model");
  c.command = field<std::string>(j, "command", c.command, "config");
  c.verify = field<bool>(j, "verify", c.verify, "config");

  const json& m = j["model"];
  if (m.is_string()) {
    c.model = model_from_spec(m.get<std::string>(), c.model.N);
  } else {
    check_keys(m, {"family", "params", "N", "scale"}, "model");
    if (!m.contains("family")) throw ConfigError("model: missing family");
    ModelCfg mc;
    mc.family = field<std::string>(m, "family", "", "model");
    mc.params.clear();
    if (m.contains("params")) {
      check_keys(m["params"], {"a", "ell", "nu"}, "model.params");
      for (const auto& [k, v] : m["params"].items()) {
        if (!v.is_number()) throw ConfigError("model.params." + k + ": expected a number");
        mc.params[k] = v.get<double>();
      }
    }
    mc.N = field<int>(m, "N", 2, "model");
    mc.scale = field<double>(m, "scale", 1.0, "model");
    c.model = mc;
  }
  if (j.contains("sweep")) {
    check_keys(j["sweep"], {"r", "u"}, "sweep");
    if (j["sweep"].contains("r")) c.r = number_list(j["sweep"]["r"], "sweep.r");
    if (j["sweep"].contains("u")) c.u = number_list(j["sweep"]["u"], "sweep.u");
  }
  if (j.contains("mc")) {
    check_keys(j["mc"], {"n", "seed", "shards"}, "mc");
    c.n = field<std::size_t>(j["mc"], "n", c.n, "mc");
    c.seed = field<std::uint64_t>(j["mc"], "seed", c.seed, "mc");
    c.shards = field<unsigned>(j["mc"], "shards", c.shards, "mc");
  }
  if (j.contains("sim")) {
    check_keys(j["sim"], {"M", "h", "realizations", "eps"}, "sim");
    c.M = field<int>(j["sim"], "M", c.M, "sim");
    c.h = field<double>(j["sim"], "h", c.h, "sim");
    c.realizations = field<int>(j["sim"], "realizations", c.realizations, "sim");
    c.eps = field<double>(j["sim"], "eps", c.eps, "sim");
  }
  if (j.contains("output")) {
    check_keys(j["output"], {"path", "format"}, "output");
    c.out = field<std::string>(j["output"], "path", c.out, "output");
    c.format = field<std::string>(j["output"], "format", c.format, "output");
  }
}

void fill_defaults(RunConfig& c) {
  const std::string& k = c.command;
  if (c.r.empty()) {
    if (k == "sigma") c.r = {0.5};
    else if (k == "ratio") c.r = {0.2, 0.1, 0.05, 0.02};
    else if (k == "psi" || k == "share") c.r = {0.02};
  }
  if (c.u.empty()) {
    if (k == "ratio") c.u = {1.0};
    else if (k == "psi" || k == "share") c.u = {1, 2, 3, 4};
    else if (k == "simulate") c.u = {2.5};
  }
}

void validate(const RunConfig& c) {
  if (!kCommands.count(c.command)) throw ConfigError("unknown command '" + c.command + "'");
  if (c.format != "json" && c.format != "csv") throw ConfigError("format must be json or csv");
  if (c.n == 0) throw ConfigError("mc.n must be positive");
  if (c.realizations <= 0) throw ConfigError("sim.realizations must be positive");
  for (double r : c.r)
    if (!(r > 0)) throw ConfigError("sweep.r entries must be positive");
}

json resolved(const RunConfig& c) {
  json params = json::object();
  for (const auto& [k, v] : c.model.params) params[k] = v;
  json j;
  j["schema"] = 1;
  j["command"] = c.command;
  j["model"] = {{"family", c.model.family}, {"params", params}, {"N", c.model.N}, {"scale", c.model.scale}};
  j["sweep"] = json::object();
  if (!c.r.empty()) j["sweep"]["r"] = c.r;
  if (!c.u.empty()) j["sweep"]["u"] = c.u;
  j["mc"] = {{"n", c.n}, {"seed", c.seed}, {"shards", c.shards}};
  j["sim"] = {{"M", c.M}, {"h", c.h}, {"realizations", c.realizations}, {"eps", c.eps}};
  j["output"] = {{"path", c.out}, {"format", c.format}};
  j["verify"] = c.verify;
  return j;
}

// Named substream of the root seed.
std::uint64_t substream(std::uint64_t root, const std::string& name, std::uint64_t k) {
  std::vector<std::uint32_t> w{static_cast<std::uint32_t>(root), static_cast<std::uint32_t>(root >> 32),
                               static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  for (unsigned char ch : name) w.push_back(ch);
  std::seed_seq seq(w.begin(), w.end());
  std::uint32_t o[2];
  seq.generate(o, o + 2);
  return (static_cast<std::uint64_t>(o[0]) << 32) | o[1];
}

json matrix(const Eigen::MatrixXd& M) {
  json a = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    a.push_back(row);
  }
  return a;
}

json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

struct Outcome {
  json results = json::object();
  std::vector<json> records;
  int code = Ok;
  std::string message;
};

Outcome cmd_check(const RunConfig& c, const RadialModel& m) {
  const QualReport q = check_qualified(m);
  Outcome o;
  o.results["alpha"] = q.alpha;
  o.results["beta"] = q.beta;
  o.results["overall_pass"] = q.overall_pass();
  o.results["checks"] = json::array();
  for (const auto& k : q.checks) {
    o.results["checks"].push_back({{"name", k.name}, {"pass", k.pass}, {"value", k.value}, {"detail", k.detail}});
    o.records.push_back({{"op", "check"}, {"name", k.name}, {"pass", k.pass}, {"value", k.value}});
  }
  if (!q.overall_pass()) {
    o.code = Numerical;
    std::string f;
    for (const auto& n : q.failed()) f += (f.empty() ? "" : ", ") + n;
    o.message = "qualification failed: " + f;
  }
  (void)c;
  return o;
}

Outcome cmd_sigma(const RunConfig& c, const RadialModel& m) {
  Outcome o;
  const Eigen::VectorXd u = axis_direction(m.N);
  const SigmaExpansion se = sigma_expansion(m, u);
  o.results["N"] = m.N;
  o.results["L"] = cov_dim(m.N);
  o.results["u"] = vec(u);
  o.results["S0"] = matrix(se.S0);
  o.results["S2"] = matrix(se.S2);
  o.results["points"] = json::array();
  for (double r : c.r) {
    const auto t0 = std::chrono::steady_clock::now();
    const CondCov cc = conditional_covariance(m, r, u);
    json p{{"N", m.N}, {"L", cc.L}, {"r", r}, {"u", vec(u)}, {"sigma", matrix(cc.sigma)}};
    json rec{{"op", "sigma"}, {"r", r}, {"det", cc.sigma.determinant()}};
    if (c.verify) {
      const CondCov oc = conditional_covariance_oracle(m, r, u);
      Eigen::Index i = 0, j = 0;
      const double diff = (cc.sigma - oc.sigma).cwiseAbs().maxCoeff(&i, &j);
      p["max_abs_diff"] = diff;
      p["at"] = {i, j};
      rec["max_abs_diff"] = diff;
      rec["i"] = i;
      rec["j"] = j;
      if (!(diff < 1e-8)) {
        o.code = Numerical;
        o.message = "sigma --verify: max-abs difference " + num(diff) + " at (" + std::to_string(i) + ", " +
                    std::to_string(j) + ") for r=" + num(r);
      }
    }
    rec["wall_ms"] = ms_since(t0);
    o.results["points"].push_back(p);
    o.records.push_back(rec);
  }
  return o;
}

Outcome cmd_spectrum(const RunConfig&, const RadialModel& m) {
  Outcome o;
  const Sigma0Spectrum sp = spectrum_sigma0(m);
  o.results["lambda_plus"] = sp.lambda_plus;
  o.results["lambda_minus"] = sp.lambda_minus;
  o.results["catalogue"] = json::array();
  for (const auto& e : sp.catalogue) {
    o.results["catalogue"].push_back({{"label", e.label}, {"value", e.value}, {"multiplicity", e.multiplicity}});
    o.records.push_back({{"op", "spectrum"}, {"label", e.label}, {"value", e.value}, {"multiplicity", e.multiplicity}});
  }
  o.results["numeric"] = vec(sp.numeric);
  o.results["max_mismatch"] = sp.max_mismatch;
  const SpectralExpansion ex = eigenpath(m, axis_direction(m.N));
  o.results["expansion"] = {{"rank0", ex.rank0},     {"r_grid", ex.r_grid},     {"Lambda0", vec(ex.Lambda0)},
                            {"Lambda1", vec(ex.Lambda1)}, {"Lambda2", vec(ex.Lambda2)}, {"P0", matrix(ex.P0)}};
  if (!(sp.max_mismatch < 1e-9)) {
    o.code = Numerical;
    o.message = "spectrum: catalogue mismatch " + num(sp.max_mismatch);
  }
  return o;
}

Outcome cmd_hpoly(const RunConfig& c, const RadialModel& m) {
  Outcome o;
  const LimitPolynomial lp = limit_polynomial(m, axis_direction(m.N));
  o.results["coefficients"] = json::array();
  for (const auto& [mono, v] : lp.coefficients) {
    o.results["coefficients"].push_back({{"monomial", mono}, {"value", v}});
    std::string s;
    for (int k : mono) s += (s.empty() ? "" : " ") + std::to_string(k);
    o.records.push_back({{"op", "hpoly"}, {"monomial", s}, {"value", v}});
  }
  const int samples = 10000;
  std::mt19937_64 g(substream(c.seed, "hpoly", 0));
  std::normal_distribution<double> nd;
  double worst = 0;
  Eigen::VectorXd y(lp.L);
  for (int k = 0; k < samples; ++k) {
    for (auto& e : y) e = nd(g);
    const double h = lp(y);
    worst = std::max(worst, std::abs(h + lp(flip_null(y, m.N))) / (1 + std::abs(h)));
  }
  o.results["antisymmetry_residual"] = worst;
  o.results["samples"] = samples;
  o.records.push_back({{"op", "hpoly_antisymmetry"}, {"value", worst}, {"n", samples}});
  if (!(worst < 1e-8)) {
    o.code = Numerical;
    o.message = "hpoly: antisymmetry residual " + num(worst);
  }
  return o;
}

Outcome cmd_rice(const RunConfig& c, const RadialModel& m) {
  Outcome o;
  o.results["points"] = json::array();
  std::uint64_t k = 0;
  for (double r : c.r)
    for (double u : c.u) {
      RiceOptions opt;
      opt.n = c.n;
      opt.seed = substream(c.seed, c.command, k++);
      opt.threads = c.shards;
      const auto t0 = std::chrono::steady_clock::now();
      const RiceSums s = rice_sums(m, r, axis_direction(m.N), u, opt);
      const RiceEstimate e = c.command == "ratio" ? sign_ratio(s) : c.command == "psi" ? psi_ratio(s) : maxima_share(s);
      json rec{{"op", e.tag}, {"r", r},       {"u", u},   {"value", e.value}, {"stderr", e.std_error},
               {"n", s.n},    {"seed", e.seed}, {"wall_ms", ms_since(t0)}};
      o.records.push_back(rec);
      rec["degenerate"] = s.degenerate;
      rec["sampler"] = s.sampler == Sampler::Tail ? "tail" : "plain";
      o.results["points"].push_back(rec);
    }
  return o;
}

void write_field(const FieldRealization& f, const fs::path& dir) {
  std::ofstream bin(dir / "field_0.bin", std::ios::binary);
  bin.write(reinterpret_cast<const char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  json side{{"extent", f.extent()}, {"h", f.h},         {"M", f.M},
            {"seed", f.seed},       {"model", f.model}, {"layout", "float64, values[i + M*j] at (i*h, j*h)"}};
  std::ofstream(dir / "field_0.json") << side.dump(2) << "\n";
  std::ofstream cp(dir / "critical_points_0.csv");
  cp << "x,y,value,grad_norm,h11,h12,h22,index\n";
  for (const auto& p : find_critical_points(f).points)
    cp << num(p.x) << ',' << num(p.y) << ',' << num(p.value) << ',' << num(p.grad_norm) << ','
       << num(p.hessian(0, 0)) << ',' << num(p.hessian(0, 1)) << ',' << num(p.hessian(1, 1)) << ',' << p.index
       << "\n";
}

Outcome cmd_simulate(const RunConfig& c, const RadialModel& m) {
  Outcome o;
  o.results["points"] = json::array();
  std::string pairs_csv = "u,index_a,index_b,count\n";
  std::uint64_t k = 0;
  for (double u : c.u) {
    SimulationConfig sc;
    sc.grid = {c.M, c.h};
    sc.realizations = c.realizations;
    sc.seed = substream(c.seed, "simulate", k++);
    sc.u_thr = u;
    sc.eps_corr = c.eps;
    sc.threads = c.shards;
    const auto t0 = std::chrono::steady_clock::now();
    const SimulationSummary s = simulate(m, sc);
    const double wall = ms_since(t0);
    std::size_t above[3] = {0, 0, 0}, nonzero = 0;
    for (const auto& a : s.counts_above)
      for (int i = 0; i < 3; ++i) above[i] += a[i];
    for (int e : s.euler) nonzero += e != 0;
    json by = json::array();
    for (const auto& [ab, n] : s.pairs.by_index) {
      by.push_back({{"a", ab.first}, {"b", ab.second}, {"count", n}});
      pairs_csv += num(u) + "," + std::to_string(ab.first) + "," + std::to_string(ab.second) + "," +
                   std::to_string(n) + "\n";
    }
    json rec{{"op", "simulate"},
             {"u", u},
             {"realizations", s.realizations},
             {"euler_nonzero", nonzero},
             {"minima_above", above[0]},
             {"saddles_above", above[1]},
             {"maxima_above", above[2]},
             {"pairs", s.pairs.pairs},
             {"opposite_det_fraction", s.pairs.opposite_det_fraction()},
             {"max_saddle_fraction", s.pairs.max_saddle_fraction()},
             {"seed", sc.seed},
             {"wall_ms", wall}};
    o.records.push_back(rec);
    rec["eps"] = s.eps;
    rec["newton_failures"] = s.newton_failures;
    rec["euler"] = s.euler;
    rec["pairs_by_index"] = by;
    o.results["points"].push_back(rec);
    if (nonzero) {
      o.code = Numerical;
      o.message = "simulate: Euler count nonzero on " + std::to_string(nonzero) + " realizations";
    }
    if (!c.out.empty() && k == 1) write_field(sample_field(m, sc.grid, realization_seed(sc.seed, 0)), c.out);
  }
  if (!c.out.empty()) std::ofstream(fs::path(c.out) / "pairs.csv") << pairs_csv;
  return o;
}

Outcome cmd_report(const RunConfig& c) {
  std::vector<fs::path> files(c.inputs.begin(), c.inputs.end());
  if (files.empty() && !c.out.empty() && fs::is_directory(c.out))
    for (const auto& e : fs::directory_iterator(c.out))
      if (e.path().extension() == ".json" && e.path().stem() != "report" && e.path().stem().string().rfind("field_", 0))
        files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ConfigError("report: no artifacts given");
  Outcome o;
  o.results["sources"] = json::array();
  for (const auto& f : files) {
    std::ifstream in(f);
    json a;
    try {
      a = json::parse(in);
    } catch (const json::exception&) {
      throw ConfigError("report: cannot parse " + f.string());
    }
    if (!a.is_object() || a.value("schema", 0) != 1 || !a.contains("records"))
      throw ConfigError("report: " + f.string() + " is not a schema-1 artifact");
    o.results["sources"].push_back(f.string());
    for (json rec : a["records"]) {
      json row{{"command", a["command"]}, {"source", f.filename().string()}};
      row.update(rec);
      o.records.push_back(row);
    }
  }
  o.results["records"] = o.records;
  return o;
}

std::string csv_field(const json& v) {
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  }
  if (v.is_number_float()) return num(v.get<double>());
  if (v.is_null()) return "";
  return v.dump();
}

std::string to_csv(const std::vector<json>& rows) {
  std::vector<std::string> cols;
  for (const auto& r : rows)
    for (const auto& [k, v] : r.items())
      if (std::find(cols.begin(), cols.end(), k) == cols.end()) cols.push_back(k);
  std::ostringstream os;
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << "\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << (r.contains(cols[i]) ? csv_field(r[cols[i]]) : "");
    os << "\n";
  }
  return os.str();
}

}  // namespace

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Closely paired critical points of isotropic Gaussian fields", "critfield"};
  RunConfig flags;
  std::string config_path, model, format;
  int N = 2;
  app.add_option("command", flags.command, "check|sigma|spectrum|hpoly|ratio|psi|share|simulate|report")->required();
  app.add_option("inputs", flags.inputs, "artifacts for report");
  app.add_option("--config", config_path, "JSON config or saved artifact");
  app.add_option("--model", model, "e.g. gaussian:a=1, cauchy:ell=1,nu=2");
  app.add_option("--N", N, "dimension");
  app.add_option("--r", flags.r, "pair distances")->delimiter(',');
  app.add_option("--u", flags.u, "thresholds")->delimiter(',');
  app.add_option("--n", flags.n, "Monte Carlo samples per point");
  app.add_option("--seed", flags.seed, "root seed");
  app.add_option("--shards", flags.shards, "worker threads (0 = all cores)");
  app.add_option("--M", flags.M, "grid points per axis");
  app.add_option("--spacing", flags.h, "grid spacing");
  app.add_option("--realizations", flags.realizations, "field realizations");
  app.add_option("--eps", flags.eps, "pair radius in correlation lengths");
  app.add_option("--out", flags.out, "output directory");
  app.add_option("--format", format, "json|csv");
  app.add_flag("--verify", flags.verify, "compare against the oracle (sigma)");

  std::vector<const char*> args;
  for (const auto& a : argv) args.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(args.size()), args.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return Ok;
  } catch (const CLI::ParseError& e) {
    err << "critfield: " << e.what() << "\n" << app.help();
    return Validation;
  }

  RunConfig c;
  Outcome o;
  try {
    if (!config_path.empty()) load_config(config_path, c);
    if (app.count("--N")) c.model.N = N;
    if (!model.empty()) c.model = model_from_spec(model, c.model.N);
    c.command = flags.command;
    c.inputs = flags.inputs;
    if (app.count("--r")) c.r = flags.r;
    if (app.count("--u")) c.u = flags.u;
    if (app.count("--n")) c.n = flags.n;
    if (app.count("--seed")) c.seed = flags.seed;
    if (app.count("--shards")) c.shards = flags.shards;
    if (app.count("--M")) c.M = flags.M;
    if (app.count("--spacing")) c.h = flags.h;
    if (app.count("--realizations")) c.realizations = flags.realizations;
    if (app.count("--eps")) c.eps = flags.eps;
    if (app.count("--out")) c.out = flags.out;
    if (app.count("--format")) c.format = format;
    if (app.count("--verify")) c.verify = true;
    fill_defaults(c);
    validate(c);
    if (!c.out.empty()) fs::create_directories(c.out);

    if (c.command == "report") {
      o = cmd_report(c);
    } else {
      const RadialModel m = build_model(c.model);
      if (c.command == "check") o = cmd_check(c, m);
      else if (c.command == "sigma") o = cmd_sigma(c, m);
      else if (c.command == "spectrum") o = cmd_spectrum(c, m);
      else if (c.command == "hpoly") o = cmd_hpoly(c, m);
      else if (c.command == "simulate") o = cmd_simulate(c, m);
      else o = cmd_rice(c, m);
    }
  } catch (const ConfigError& e) {
    err << "critfield: " << e.what() << "\n";
    return Validation;
  } catch (const DomainError& e) {
    err << "critfield: " << e.what() << "\n";
    return Validation;
  } catch (const PathError& e) {
    err << "critfield: " << e.what() << " (r=" << e.r << ")\n";
    return Numerical;
  } catch (const std::runtime_error& e) {
    err << "critfield: " << e.what() << "\n";
    return Numerical;
  }

  json artifact;
  artifact["schema"] = 1;
  artifact["command"] = c.command;
  artifact["config"] = resolved(c);
  artifact["seed"] = c.seed;
  artifact["status"] = o.code == Ok ? "ok" : "failed";
  if (!o.message.empty()) artifact["message"] = o.message;
  artifact["results"] = o.results;
  artifact["records"] = o.records;

  const std::string text = c.format == "csv" ? to_csv(o.records) : artifact.dump(2) + "\n";
  if (c.out.empty()) {
    out << text;
  } else {
    std::ofstream(fs::path(c.out) / (c.command + ".json")) << artifact.dump(2) << "\n";
    if (c.format == "csv") std::ofstream(fs::path(c.out) / (c.command + ".csv")) << text;
    out << (fs::path(c.out) / (c.command + "." + c.format)).string() << "\n";
  }
  if (!o.message.empty()) err << "critfield: " << o.message << "\n";
  return o.code;
}

}  // namespace critfield::cli
