#include "lgdm/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lgdm/reference.hpp"

namespace lgdm::cli {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// logging

enum class LogLevel { kQuiet = 0, kInfo = 1, kDebug = 2 };

LogLevel log_level() {
  const char* env = std::getenv("LGDM_LOG");
  if (!env) return LogLevel::kInfo;
  const std::string v(env);
  if (v == "quiet" || v == "0" || v == "error") return LogLevel::kQuiet;
  if (v == "debug" || v == "2") return LogLevel::kDebug;
  return LogLevel::kInfo;
}

void log(std::ostream& err, LogLevel level, const std::string& msg) {
  if (static_cast<int>(level) <= static_cast<int>(log_level())) {
    err << "[lgdm] " << msg << '\n';
  }
}

// ---------------------------------------------------------------------------
// config parsing

[[noreturn]] void bad(const std::string& field, const std::string& what) {
  throw ConfigurationError("config field '" + field + "': " + what);
}

void only_keys(const json& obj, const std::string& where,
               const std::set<std::string>& allowed) {
  if (!obj.is_object()) bad(where, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) {
      bad(where.empty() ? key : where + "." + key, "unknown key");
    }
  }
}

const json& need(const json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) bad(path, "missing required field");
  return *it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) bad(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) bad(path, "must be finite");
  return v;
}

Vector vector_of(const json& j, const std::string& path) {
  if (!j.is_array()) bad(path, "expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = number(j[i], path + "[" + std::to_string(i) + "]");
  }
  return v;
}

so3::Vec3 vec3_of(const json& j, const std::string& path) {
  const Vector v = vector_of(j, path);
  if (v.size() != 3) bad(path, "expected 3 components");
  return so3::Vec3(v);
}

/// A number (times the identity of size dim) or an array of rows.
Matrix matrix_of(const json& j, const std::string& path, int dim) {
  if (j.is_number()) return number(j, path) * Matrix::Identity(dim, dim);
  if (!j.is_array() || j.empty()) bad(path, "expected a number or an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Matrix m(rows, rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::string rp = path + "[" + std::to_string(r) + "]";
    const Vector row = vector_of(j[static_cast<std::size_t>(r)], rp);
    if (row.size() != rows) bad(rp, "matrix must be square");
    m.row(r) = row.transpose();
  }
  if (m.rows() != dim) bad(path, "size does not match the state dimension");
  return m;
}

SystemKind system_of(const json& j) {
  if (!j.is_string()) bad("system", "expected a string");
  const std::string s = j.get<std::string>();
  if (s == "pair_midpoint") return SystemKind::kPairMidpoint;
  if (s == "pair_stormer_verlet") return SystemKind::kPairStormerVerlet;
  if (s == "rigid_body_so3") return SystemKind::kRigidBody;
  if (s == "heavy_top") return SystemKind::kHeavyTop;
  bad("system", "unknown system '" + s + "'");
}

Potential potential_of(const json& j, int dim) {
  const std::string path = "parameters.potential";
  only_keys(j, path, {"type", "stiffness", "slope"});
  const json& type = need(j, "type", path + ".type");
  if (!type.is_string()) bad(path + ".type", "expected a string");
  const std::string t = type.get<std::string>();
  if (t == "harmonic") {
    if (j.contains("slope")) bad(path + ".slope", "not used by a harmonic potential");
    return harmonic_potential(
        matrix_of(need(j, "stiffness", path + ".stiffness"), path + ".stiffness", dim));
  }
  if (t == "linear") {
    if (j.contains("stiffness")) bad(path + ".stiffness", "not used by a linear potential");
    const Vector slope = vector_of(need(j, "slope", path + ".slope"), path + ".slope");
    if (slope.size() != dim) bad(path + ".slope", "size does not match the state dimension");
    return linear_potential(slope);
  }
  if (t == "zero") {
    if (j.contains("stiffness") || j.contains("slope")) {
      bad(path, "a zero potential takes no parameters");
    }
    return zero_potential(dim);
  }
  bad(path + ".type", "unknown potential '" + t + "'");
}

}  // namespace

std::string to_string(SystemKind kind) {
  switch (kind) {
    case SystemKind::kPairMidpoint: return "pair_midpoint";
    case SystemKind::kPairStormerVerlet: return "pair_stormer_verlet";
    case SystemKind::kRigidBody: return "rigid_body_so3";
    case SystemKind::kHeavyTop: return "heavy_top";
  }
  return "unknown";
}

RunConfig parse_config(const std::string& text, const fs::path& base_dir) {
  json root;
  try {
    root = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigurationError(std::string("config is not valid JSON: ") + e.what());
  }
  only_keys(root, "", {"schema_version", "system", "h", "steps", "initial",
                       "parameters", "newton", "output"});
  const json& ver = need(root, "schema_version", "schema_version");
  if (!ver.is_number_integer() || ver.get<int>() != kSchemaVersion) {
    bad("schema_version", "unsupported (expected " + std::to_string(kSchemaVersion) + ")");
  }

  RunConfig cfg;
  cfg.system = system_of(need(root, "system", "system"));
  cfg.h = number(need(root, "h", "h"), "h");
  if (!(cfg.h > 0.0)) bad("h", "must be positive");
  const json& steps = need(root, "steps", "steps");
  if (!steps.is_number_integer() || steps.get<long long>() < 1 ||
      steps.get<long long>() > 1'000'000'000LL) {
    bad("steps", "must be an integer >= 1");
  }
  cfg.steps = static_cast<int>(steps.get<long long>());

  const json& out = need(root, "output", "output");
  if (!out.is_string() || out.get<std::string>().empty()) {
    bad("output", "expected a non-empty path string");
  }
  cfg.output = fs::path(out.get<std::string>());
  if (cfg.output.is_relative() && !base_dir.empty()) cfg.output = base_dir / cfg.output;

  if (root.contains("newton")) {
    const json& nw = root["newton"];
    only_keys(nw, "newton", {"tol", "max_iters"});
    if (nw.contains("tol")) {
      cfg.newton.tol = number(nw["tol"], "newton.tol");
      if (!(cfg.newton.tol > 0.0)) bad("newton.tol", "must be positive");
    }
    if (nw.contains("max_iters")) {
      if (!nw["max_iters"].is_number_integer() || nw["max_iters"].get<int>() < 1) {
        bad("newton.max_iters", "must be an integer >= 1");
      }
      cfg.newton.max_iters = nw["max_iters"].get<int>();
    }
  }

  const json& init = need(root, "initial", "initial");
  const json empty = json::object();
  const json& params = root.contains("parameters") ? root["parameters"] : empty;

  switch (cfg.system) {
    case SystemKind::kPairMidpoint:
    case SystemKind::kPairStormerVerlet: {
      only_keys(init, "initial", {"x0", "u0"});
      cfg.x0 = vector_of(need(init, "x0", "initial.x0"), "initial.x0");
      cfg.u0 = vector_of(need(init, "u0", "initial.u0"), "initial.u0");
      if (cfg.x0.size() < 1) bad("initial.x0", "must be non-empty");
      if (cfg.u0.size() != cfg.x0.size()) bad("initial.u0", "length must match initial.x0");
      const int n = static_cast<int>(cfg.x0.size());
      only_keys(params, "parameters", {"mass", "potential"});
      cfg.mass = matrix_of(need(params, "mass", "parameters.mass"), "parameters.mass", n);
      cfg.potential = potential_of(need(params, "potential", "parameters.potential"), n);
      validate_mass_and_potential(cfg.mass, cfg.potential);
      break;
    }
    case SystemKind::kRigidBody: {
      only_keys(init, "initial", {"eta0", "anchor"});
      cfg.eta0 = vec3_of(need(init, "eta0", "initial.eta0"), "initial.eta0");
      only_keys(params, "parameters", {"inertia"});
      cfg.inertia = vec3_of(need(params, "inertia", "parameters.inertia"),
                            "parameters.inertia");
      if (!(cfg.inertia.minCoeff() > 0.0)) bad("parameters.inertia", "must be positive");
      break;
    }
    case SystemKind::kHeavyTop: {
      only_keys(init, "initial", {"eta0", "gamma0", "anchor"});
      cfg.eta0 = vec3_of(need(init, "eta0", "initial.eta0"), "initial.eta0");
      cfg.gamma0 = vec3_of(need(init, "gamma0", "initial.gamma0"), "initial.gamma0");
      if (std::abs(cfg.gamma0.norm() - 1.0) > 1e-9) {
        bad("initial.gamma0", "must be a unit vector");
      }
      only_keys(params, "parameters", {"inertia", "mass", "gravity", "distance", "e"});
      auto& ht = cfg.heavy_top;
      ht.inertia = vec3_of(need(params, "inertia", "parameters.inertia"),
                           "parameters.inertia");
      if (!(ht.inertia.minCoeff() > 0.0)) bad("parameters.inertia", "must be positive");
      ht.mass = number(need(params, "mass", "parameters.mass"), "parameters.mass");
      ht.gravity = number(need(params, "gravity", "parameters.gravity"), "parameters.gravity");
      ht.distance = number(need(params, "distance", "parameters.distance"),
                           "parameters.distance");
      ht.body_axis = vec3_of(need(params, "e", "parameters.e"), "parameters.e");
      if (std::abs(ht.body_axis.norm() - 1.0) > 1e-12) bad("parameters.e", "must be a unit vector");
      cfg.inertia = ht.inertia;
      break;
    }
  }
  if (init.contains("anchor")) {
    const Matrix a = matrix_of(init["anchor"], "initial.anchor", 3);
    if ((a.transpose() * a - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() > 1e-9 ||
        a.determinant() < 0.0) {
      bad("initial.anchor", "must be a rotation matrix");
    }
    cfg.anchor = a;
  }
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  if (in.bad()) throw IoError("error reading config file " + path.string());
  return parse_config(text.str(), path.parent_path());
}

std::shared_ptr<const DiscreteLagrangianSystem> build_system(const RunConfig& cfg) {
  switch (cfg.system) {
    case SystemKind::kPairMidpoint:
      return make_midpoint_system(cfg.mass, cfg.potential, cfg.h);
    case SystemKind::kPairStormerVerlet:
      return make_stormer_verlet_system(cfg.mass, cfg.potential, cfg.h);
    case SystemKind::kRigidBody:
      return make_rigid_body_system(cfg.inertia, cfg.h);
    case SystemKind::kHeavyTop:
      return make_heavy_top_system(cfg.heavy_top, cfg.h);
  }
  throw ConfigurationError("unknown system");
}

// ---------------------------------------------------------------------------
// CSV output

namespace {

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, int n, int m) : path_(path) {
    out_.open(path, std::ios::out | std::ios::trunc);
    if (!out_) throw IoError("cannot open output file " + path.string());
    out_ << std::setprecision(17);
    out_ << "step,time";
    for (int i = 1; i <= n; ++i) out_ << ",x" << i;
    for (int i = 1; i <= m; ++i) out_ << ",u" << i;
    for (int i = 1; i <= m; ++i) out_ << ",mu" << i;
    out_ << ",energy,residual_norm,newton_iters,reanchored\n";
    flush();
  }

  void row(int step, double time, const Vector& x, const Vector& u,
           const Vector& mu, double energy, const StepDiagnostics& d) {
    out_ << step << ',' << time;
    for (Eigen::Index i = 0; i < x.size(); ++i) out_ << ',' << x(i);
    for (Eigen::Index i = 0; i < u.size(); ++i) out_ << ',' << u(i);
    for (Eigen::Index i = 0; i < mu.size(); ++i) out_ << ',' << mu(i);
    out_ << ',' << energy << ',' << d.residual_norm << ',' << d.newton_iters << ','
         << (d.reanchored ? 1 : 0) << '\n';
    flush();
  }

 private:
  void flush() {
    out_.flush();
    if (!out_) throw IoError("error writing output file " + path_.string());
  }

  fs::path path_;
  std::ofstream out_;
};

double energy_of(const RunConfig& cfg, const DiscreteLagrangianSystem& sys,
                 const Vector& x, const Vector& u) {
  const Vector mu = legendre_minus(sys, x, u).mu;
  switch (cfg.system) {
    case SystemKind::kPairMidpoint:
    case SystemKind::kPairStormerVerlet:
      return pair_energy(cfg.mass, cfg.potential, cfg.h, x, mu);
    case SystemKind::kRigidBody:
      return rigid_body_energy(cfg.inertia, mu);
    case SystemKind::kHeavyTop:
      return heavy_top_energy(cfg.heavy_top, x, mu);
  }
  return 0.0;
}

int report_failure(const std::optional<TrajectoryFailure>& f, std::ostream& err) {
  if (!f) return kExitOk;
  std::ostringstream msg;
  msg << "step " << f->step << " failed (" << f->kind << "): " << f->message;
  log(err, LogLevel::kQuiet, msg.str());
  return kExitSolver;
}

}  // namespace

int cmd_simulate(const fs::path& config_path, std::ostream& err) {
  RunConfig cfg;
  std::shared_ptr<const DiscreteLagrangianSystem> sys;
  try {
    cfg = load_config(config_path);
    sys = build_system(cfg);
  } catch (const IoError& e) {
    log(err, LogLevel::kQuiet, e.what());
    return kExitIo;
  } catch (const Error& e) {
    log(err, LogLevel::kQuiet, e.what());
    return kExitConfig;
  }

  const auto& chart = sys->chart();
  log(err, LogLevel::kInfo,
      "simulating " + to_string(cfg.system) + " for " + std::to_string(cfg.steps) +
          " steps -> " + cfg.output.string());
  try {
    CsvWriter csv(cfg.output, chart.base_dim(), chart.fiber_dim());
    auto emit = [&](int k, const Vector& x, const Vector& u, const StepDiagnostics& d) {
      const Vector mu = legendre_plus(*sys, x, u).mu;
      csv.row(k, k * cfg.h, x, u, mu, energy_of(cfg, *sys, x, u), d);
      if (log_level() == LogLevel::kDebug) {
        std::ostringstream msg;
        msg << "step " << k << " residual " << d.residual_norm << " iters "
            << d.newton_iters;
        log(err, LogLevel::kDebug, msg.str());
      }
    };

    const bool pair = cfg.system == SystemKind::kPairMidpoint ||
                      cfg.system == SystemKind::kPairStormerVerlet;
    if (pair) {
      if (!chart.in_domain(cfg.x0, cfg.u0)) {
        log(err, LogLevel::kQuiet, "initial state is outside the chart");
        return kExitConfig;
      }
      const Trajectory t = simulate(*sys, cfg.x0, cfg.u0, cfg.steps, cfg.newton,
                                    [&](int k, const TrajectoryEntry& e) {
                                      emit(k, e.point.x, e.point.u, e.diagnostics);
                                    });
      return report_failure(t.failure, err);
    }
    const Vector base = cfg.system == SystemKind::kHeavyTop ? Vector(cfg.gamma0) : Vector(0);
    if (!chart.in_domain(base, cfg.eta0)) {
      log(err, LogLevel::kQuiet, "initial increment is outside the Cayley chart; reduce h");
      return kExitConfig;
    }
    const AnchoredTrajectory t = reanchored_simulate(
        *sys, cfg.anchor, base, cfg.eta0, cfg.steps, cfg.newton,
        [&](int k, const AnchoredEntry& e) {
          emit(k, e.state.base, e.state.eta, e.diagnostics);
        });
    return report_failure(t.failure, err);
  } catch (const IoError& e) {
    log(err, LogLevel::kQuiet, e.what());
    return kExitIo;
  }
}

int cmd_reference(const fs::path& config_path, const std::string& method,
                  const std::optional<fs::path>& output, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const IoError& e) {
    log(err, LogLevel::kQuiet, e.what());
    return kExitIo;
  } catch (const Error& e) {
    log(err, LogLevel::kQuiet, e.what());
    return kExitConfig;
  }
  const bool midpoint = cfg.system == SystemKind::kPairMidpoint;
  if (!midpoint && cfg.system != SystemKind::kPairStormerVerlet) {
    log(err, LogLevel::kQuiet, "reference runs exist only for pair systems");
    return kExitConfig;
  }
  const std::string m = method.empty() ? (midpoint ? "midpoint" : "leapfrog") : method;
  if (m != "midpoint" && m != "leapfrog" && m != "rk2") {
    log(err, LogLevel::kQuiet, "unknown reference method '" + m + "'");
    return kExitConfig;
  }

  // Canonical momentum of the initial pair (x0, u0) for the configured
  // discretization: p0 = M u0 + (h/2) grad V at the midpoint or at x0.
  const double h = cfg.h;
  const Vector at = midpoint ? Vector(cfg.x0 + 0.5 * h * cfg.u0) : cfg.x0;
  reference::PhaseState s{cfg.x0, cfg.mass * cfg.u0 + 0.5 * h * cfg.potential.gradient(at)};

  auto advance = [&](const reference::PhaseState& st) {
    if (m == "midpoint") return reference::implicit_midpoint_step(cfg.mass, cfg.potential, h, st);
    if (m == "leapfrog") return reference::leapfrog_step(cfg.mass, cfg.potential, h, st);
    return reference::rk2_step(cfg.mass, cfg.potential, h, st);
  };

  try {
    const int n = static_cast<int>(cfg.x0.size());
    CsvWriter csv(output.value_or(cfg.output), n, n);
    // Row k holds q_k, the difference quotient (q_{k+1} - q_k)/h and
    // h p_{k+1}, matching the x, u, mu columns of a simulate run.
    reference::PhaseState cur = advance(s);
    for (int k = 1; k <= cfg.steps; ++k) {
      const reference::PhaseState next = advance(cur);
      const Vector u = (next.q - cur.q) / h;
      csv.row(k, k * h, cur.q, u, h * next.p,
              reference::hamiltonian(cfg.mass, cfg.potential, cur), StepDiagnostics{});
      cur = next;
    }
  } catch (const IoError& e) {
    log(err, LogLevel::kQuiet, e.what());
    return kExitIo;
  }
  return kExitOk;
}

int cmd_check(const std::string& chart_name, int samples, double tol,
              std::uint64_t seed, std::ostream& out, std::ostream& err) {
  if (samples < 1) {
    log(err, LogLevel::kQuiet, "--samples must be >= 1");
    return kExitConfig;
  }
  if (!(tol >= 0.0)) {
    log(err, LogLevel::kQuiet, "--tol must be non-negative");
    return kExitConfig;
  }
  ChartPtr chart;
  AxiomSampler sampler;
  if (chart_name == "pair") {
    // dyadic data and h = 1/8 keep every structure function exact
    chart = make_pair_groupoid(3, 0.125);
    sampler = dyadic_sampler(3, 3, 4.0, 4.0);
  } else if (chart_name == "so3") {
    const double h = 0.1;
    chart = make_so3_group_chart(h);
    sampler = so3_sampler(1.0 / h);
  } else if (chart_name == "action") {
    const double h = 0.1;
    auto action = make_action_groupoid(make_so3_group_chart(h), sphere_row_action(), seed);
    sampler = action_sampler(*action, 1.0 / h);
    chart = action;
  } else {
    log(err, LogLevel::kQuiet, "unknown chart '" + chart_name + "' (pair, so3, action)");
    return kExitConfig;
  }

  AxiomReport report;
  try {
    report = check_axioms(*chart, sampler, samples, tol, seed);
  } catch (const SamplingError& e) {
    log(err, LogLevel::kQuiet, e.what());
    return kExitSolver;
  }
  out << "chart " << chart_name << ": " << report.samples << " samples, "
      << report.rejected << " rejected, seed " << seed << '\n';
  for (const auto& a : report.axioms) {
    out << "  " << std::left << std::setw(34) << a.name << std::right
        << std::scientific << std::setprecision(3) << a.max_violation << "  tol "
        << a.tolerance << "  " << (a.passed ? "PASS" : "FAIL") << '\n';
  }
  out << std::defaultfloat;
  out << "result: " << (report.passed() ? "PASS" : "FAIL") << '\n';
  return report.passed() ? kExitOk : 1;
}

int run(int argc, char** argv) {
  CLI::App app{"Variational integrators on Lie groupoids"};
  app.require_subcommand(1);

  std::string sim_config;
  auto* sim = app.add_subcommand("simulate", "Run a simulation from a JSON config");
  sim->add_option("config", sim_config, "Config file")->required();

  std::string ref_config, ref_method, ref_output;
  auto* ref = app.add_subcommand("reference", "Classical baseline for a pair-system config");
  ref->add_option("config", ref_config, "Config file")->required();
  ref->add_option("--method", ref_method, "midpoint, leapfrog or rk2");
  ref->add_option("--output", ref_output, "Override the output path");

  std::string chart;
  int samples = 1000;
  double tol = 1e-10;
  std::uint64_t seed = 0;
  auto* chk = app.add_subcommand("check", "Sample and report the groupoid axioms of a chart");
  chk->add_option("--chart", chart, "pair, so3 or action")->required();
  chk->add_option("--samples", samples, "Number of samples")->capture_default_str();
  chk->add_option("--tol", tol, "Tolerance")->capture_default_str();
  chk->add_option("--seed", seed, "Random seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*sim) return cmd_simulate(sim_config, std::cerr);
  if (*ref) {
    std::optional<fs::path> out;
    if (!ref_output.empty()) out = fs::path(ref_output);
    return cmd_reference(ref_config, ref_method, out, std::cerr);
  }
  return cmd_check(chart, samples, tol, seed, std::cout, std::cerr);
}

}  // namespace lgdm::cli
