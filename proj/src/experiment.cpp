#include "svint/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "svint/version.hpp"

namespace fs = std::filesystem;

namespace svint {

namespace {

const std::vector<std::string> kStudies = {"simulate", "convergence",
                                           "temperature", "invariants"};
const std::vector<std::string> kIntegrators = {
    "svi", "svi-lie", "svi-constrained", "svi-rigid", "eem", "iem", "reference"};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  return out;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const double x = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse '" + value +
                      "' as a number");
  }
}

long long parse_int(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const long long x = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse '" + value +
                      "' as an integer");
  }
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const unsigned long long x = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse '" + value +
                      "' as an unsigned integer");
  }
}

} // namespace

StepperConfig ExperimentConfig::stepper() const {
  StepperConfig c;
  c.h = h;
  return c;
}

void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value) {
  if (key == "study") {
    if (std::find(kStudies.begin(), kStudies.end(), value) == kStudies.end())
      throw ConfigError("config key 'study': unknown study '" + value + "'");
    cfg.study = value;
  } else if (key == "model") {
    cfg.model = value;
  } else if (key.rfind("model.", 0) == 0) {
    const std::string param = key.substr(6);
    if (param.empty()) throw ConfigError("config key 'model.': empty parameter");
    cfg.model_params[param] = parse_double(key, value);
  } else if (key == "integrators") {
    std::vector<std::string> toks = split(value, ',');
    toks.erase(std::remove(toks.begin(), toks.end(), ""), toks.end());
    if (toks.empty())
      throw ConfigError("config key 'integrators': empty list");
    for (const auto& t : toks)
      if (std::find(kIntegrators.begin(), kIntegrators.end(), t) ==
          kIntegrators.end())
        throw UnknownIntegrator("unknown integrator '" + t + "'");
    cfg.integrators = toks;
  } else if (key == "h") {
    cfg.h = parse_double(key, value);
    if (!(cfg.h > 0.0)) throw ConfigError("config key 'h': must be positive");
  } else if (key == "t0") {
    cfg.t0 = parse_double(key, value);
  } else if (key == "t1") {
    cfg.t1 = parse_double(key, value);
  } else if (key == "paths") {
    cfg.paths = int(parse_int(key, value));
    if (cfg.paths < 1) throw ConfigError("config key 'paths': must be >= 1");
  } else if (key == "seed") {
    cfg.seed = parse_uint(key, value);
  } else if (key == "out") {
    cfg.out = value;
  } else if (key == "threads") {
    cfg.threads = int(parse_int(key, value));
    if (cfg.threads < 1) throw ConfigError("config key 'threads': must be >= 1");
  } else if (key == "levels") {
    const auto dots = value.find("..");
    if (dots == std::string::npos)
      throw ConfigError("config key 'levels': expected 'lo..hi', got '" + value +
                        "'");
    cfg.level_lo = int(parse_int(key, trim(value.substr(0, dots))));
    cfg.level_hi = int(parse_int(key, trim(value.substr(dots + 2))));
  } else if (key == "ref_level") {
    cfg.ref_level = int(parse_int(key, value));
  } else if (key == "fd_step") {
    cfg.fd_step = parse_double(key, value);
    if (!(cfg.fd_step > 0.0))
      throw ConfigError("config key 'fd_step': must be positive");
  } else if (key == "samples") {
    cfg.samples = int(parse_int(key, value));
    if (cfg.samples < 1) throw ConfigError("config key 'samples': must be >= 1");
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected 'key = value', got '" + t + "'");
    apply_override(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_config_text(buf.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "study = " << cfg.study << "\n";
  os << "model = " << cfg.model << "\n";
  for (const auto& [k, v] : cfg.model_params)
    os << "model." << k << " = " << fmt(v) << "\n";
  os << "integrators = ";
  for (size_t i = 0; i < cfg.integrators.size(); ++i)
    os << (i ? "," : "") << cfg.integrators[i];
  os << "\n";
  os << "h = " << fmt(cfg.h) << "\n";
  os << "t0 = " << fmt(cfg.t0) << "\n";
  os << "t1 = " << fmt(cfg.t1) << "\n";
  os << "paths = " << cfg.paths << "\n";
  os << "seed = " << cfg.seed << "\n";
  os << "levels = " << cfg.level_lo << ".." << cfg.level_hi << "\n";
  os << "ref_level = " << cfg.ref_level << "\n";
  os << "fd_step = " << fmt(cfg.fd_step) << "\n";
  os << "samples = " << cfg.samples << "\n";
  os << "out = " << cfg.out << "\n";
  os << "threads = " << cfg.threads << "\n";
  return os.str();
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::istringstream is(serialize_config(cfg));
  std::string line;
  std::uint64_t hash = 14695981039346656037ull;
  while (std::getline(is, line)) {
    if (line.rfind("out = ", 0) == 0 || line.rfind("threads = ", 0) == 0) continue;
    for (char c : line) {
      hash ^= std::uint64_t(static_cast<unsigned char>(c));
      hash *= 1099511628211ull;
    }
    hash ^= std::uint64_t('\n');
    hash *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << hash;
  return os.str();
}

void validate_config(const ExperimentConfig& cfg) {
  bool known = false;
  for (const auto& m : list_models())
    if (m.name == cfg.model) known = true;
  if (!known) throw UnknownModel("unknown model '" + cfg.model + "'");
  if (!(cfg.t1 > cfg.t0))
    throw ConfigError("config key 't1': horizon must satisfy t1 > t0");
  if (cfg.integrators.empty())
    throw ConfigError("config key 'integrators': empty list");
  if (cfg.study != "convergence") {
    const double span = cfg.t1 - cfg.t0;
    const double steps = span / cfg.h;
    if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps) ||
        std::round(steps) < 1)
      throw ConfigError(
          "config key 'h': does not divide the horizon [t0, t1] into an "
          "integer number of steps");
  } else {
    if (cfg.level_lo < 0 || cfg.level_lo > cfg.level_hi || cfg.level_hi > 24)
      throw ConfigError("config key 'levels': need 0 <= lo <= hi <= 24");
    if (cfg.ref_level < cfg.level_hi + 4)
      throw ConfigError(
          "config key 'ref_level': must exceed the finest level by at least 4");
  }
}

// ---- output helpers ----------------------------------------------------------

namespace {

struct Outputs {
  fs::path dir;
  std::string hash;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> results;

  std::ofstream open(const std::string& name) const {
    std::ofstream f(dir / name);
    if (!f) throw ConfigError("cannot write output file '" + (dir / name).string() + "'");
    f << std::setprecision(17);
    f << "# seed = " << seed << "\n";
    f << "# config_hash = " << hash << "\n";
    f << "# version = " << SVINT_VERSION << "\n";
    return f;
  }

  void add_result(const std::string& key, const std::string& value) {
    results.emplace_back(key, value);
  }
  void add_result(const std::string& key, double value) {
    results.emplace_back(key, fmt(value));
  }
};

PhaseState default_mech_state(const MechSystem& sys) {
  if (sys.constraint) {
    const auto it = sys.params.find("length");
    const double l = it == sys.params.end() ? 1.0 : it->second;
    VecX q(2);
    q << l * std::sin(0.3), -l * std::cos(0.3);
    return sys.state_from_qv(q, VecX::Zero(2));
  }
  return sys.state_from_qv(VecX::Constant(sys.dim, 1.0), VecX::Zero(sys.dim));
}

RigidState default_rigid_state(const RigidBodySystem& sys) {
  RigidState st;
  for (int i = 0; i < sys.count(); ++i) {
    const Vec3 x(1.2 * double(i), 0.0, 0.0);
    const Vec3 omega = (i % 2 == 0) ? Vec3(0.3, 0.1, -0.2) : Vec3(-0.1, 0.25, -0.3);
    st.push_back(sys.body_state(i, x, Vec3::Zero(), Rotation{Mat3::Identity()},
                                omega));
  }
  return st;
}

LieState default_lie_state(const LieSystem& sys) {
  return sys.state(Rotation{Mat3::Identity()}, Vec3(0.3, 0.1, -0.2));
}

void write_mech_rows(std::ofstream& f, double t0, const Trajectory& traj,
                     const std::vector<VecX>* lambdas) {
  const int n = int(traj.states.front().q.size());
  f << "t";
  for (int i = 0; i < n; ++i) f << ",q" << i;
  for (int i = 0; i < n; ++i) f << ",v" << i;
  for (int i = 0; i < n; ++i) f << ",p" << i;
  if (lambdas && !lambdas->empty())
    for (Eigen::Index i = 0; i < lambdas->front().size(); ++i) f << ",lambda" << i;
  f << "\n";
  for (size_t k = 0; k < traj.states.size(); ++k) {
    const PhaseState& s = traj.states[k];
    f << t0 + traj.times[k];
    for (int i = 0; i < n; ++i) f << "," << s.q[i];
    for (int i = 0; i < n; ++i) f << "," << s.v[i];
    for (int i = 0; i < n; ++i) f << "," << s.p[i];
    if (lambdas && !lambdas->empty()) {
      // lambda j belongs to the step from state j to j+1
      const Eigen::Index nl = lambdas->front().size();
      if (k == 0)
        for (Eigen::Index i = 0; i < nl; ++i) f << "," << 0.0;
      else
        for (Eigen::Index i = 0; i < nl; ++i) f << "," << (*lambdas)[k - 1][i];
    }
    f << "\n";
  }
}

void write_rigid_rows(std::ofstream& f, double t0, const RigidTrajectory& traj) {
  const int nb = int(traj.states.front().size());
  f << "t";
  for (int b = 0; b < nb; ++b) {
    for (int i = 0; i < 3; ++i) f << ",b" << b << "_x" << i;
    for (int i = 0; i < 3; ++i) f << ",b" << b << "_v" << i;
    for (int i = 0; i < 3; ++i) f << ",b" << b << "_p" << i;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) f << ",b" << b << "_R" << r << c;
    for (int i = 0; i < 3; ++i) f << ",b" << b << "_pi" << i;
  }
  f << "\n";
  for (size_t k = 0; k < traj.states.size(); ++k) {
    f << t0 + traj.times[k];
    for (int b = 0; b < nb; ++b) {
      const RigidBodyState& s = traj.states[k][size_t(b)];
      for (int i = 0; i < 3; ++i) f << "," << s.x[i];
      for (int i = 0; i < 3; ++i) f << "," << s.v[i];
      for (int i = 0; i < 3; ++i) f << "," << s.p[i];
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) f << "," << s.R.m(r, c);
      for (int i = 0; i < 3; ++i) f << "," << s.pi[i];
    }
    f << "\n";
  }
}

void write_lie_rows(std::ofstream& f, double t0, const LieTrajectory& traj) {
  f << "t";
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) f << ",R" << r << c;
  for (int i = 0; i < 3; ++i) f << ",xi" << i;
  for (int i = 0; i < 3; ++i) f << ",mu" << i;
  f << "\n";
  for (size_t k = 0; k < traj.states.size(); ++k) {
    const LieState& s = traj.states[k];
    f << t0 + traj.times[k];
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) f << "," << s.g.m(r, c);
    for (int i = 0; i < 3; ++i) f << "," << s.xi[i];
    for (int i = 0; i < 3; ++i) f << "," << s.mu[i];
    f << "\n";
  }
}

bool is_power_of_two(std::int64_t n) { return n > 0 && (n & (n - 1)) == 0; }

int log2_int(std::int64_t n) {
  int l = 0;
  while ((std::int64_t(1) << l) < n) ++l;
  return l;
}

// ---- studies ----------------------------------------------------------------

void run_simulate(const ExperimentConfig& cfg, Outputs& out) {
  const std::int64_t steps = std::llround((cfg.t1 - cfg.t0) / cfg.h);
  const StepperConfig scfg = cfg.stepper();
  const bool rigid = is_rigid_model(cfg.model);
  out.add_result("steps", double(steps));

  for (const std::string& token : cfg.integrators) {
    const std::string file = cfg.integrators.size() == 1
                                 ? "trajectory.csv"
                                 : "trajectory_" + token + ".csv";
    std::ofstream f = out.open(file);

    if (token == "svi" || token == "eem" || token == "iem") {
      if (rigid)
        throw ConfigError("integrator '" + token +
                          "' runs on vector-space models; model '" + cfg.model +
                          "' is a rigid-body model");
      const MechSystem sys = build_mech_model(cfg.model, cfg.model_params);
      if (sys.constraint)
        throw ConfigError("model '" + cfg.model +
                          "' is constrained; use integrator svi-constrained");
      const CounterIncrements inc(cfg.seed, cfg.h, int(sys.noise.size()));
      const Trajectory traj =
          run_trajectory(sys, method_from_string(token), default_mech_state(sys),
                         steps, inc, scfg);
      write_mech_rows(f, cfg.t0, traj, nullptr);
    } else if (token == "svi-constrained") {
      if (rigid)
        throw ConfigError("integrator 'svi-constrained' needs a constrained "
                          "vector-space model");
      const MechSystem sys = build_mech_model(cfg.model, cfg.model_params);
      if (!sys.constraint)
        throw ConfigError("model '" + cfg.model + "' has no constraint");
      const CounterIncrements inc(cfg.seed, cfg.h, int(sys.noise.size()));
      const ConstrainedTrajectory traj = run_constrained_trajectory(
          sys, default_mech_state(sys), steps, inc, scfg);
      Trajectory plain{traj.times, traj.states};
      write_mech_rows(f, cfg.t0, plain, &traj.lambdas);
    } else if (token == "svi-rigid") {
      if (!rigid)
        throw ConfigError("integrator 'svi-rigid' needs a rigid-body model; "
                          "model '" + cfg.model + "' is not one");
      const RigidBodySystem sys = build_rigid_model(cfg.model, cfg.model_params);
      const CounterIncrements inc(cfg.seed, cfg.h, int(sys.noise.size()));
      const RigidTrajectory traj = run_rigid_trajectory(
          sys, default_rigid_state(sys), steps, inc, scfg);
      write_rigid_rows(f, cfg.t0, traj);
    } else if (token == "svi-lie") {
      const LieSystem sys = build_lie_model(cfg.model, cfg.model_params);
      const CounterIncrements inc(cfg.seed, cfg.h, int(sys.noise.size()));
      const LieTrajectory traj =
          run_lie_trajectory(sys, default_lie_state(sys), steps, inc, scfg);
      write_lie_rows(f, cfg.t0, traj);
    } else if (token == "reference") {
      if (!is_power_of_two(steps))
        throw ConfigError(
            "config key 'h': the reference integrator needs a power-of-two "
            "number of steps");
      const int level = log2_int(steps);
      const int ref_level = level + 8;
      const std::int64_t stride = std::int64_t(1) << (ref_level - level);
      if (rigid) {
        const RigidBodySystem sys = build_rigid_model(cfg.model, cfg.model_params);
        const BrownianPath path = BrownianPath::sample(
            cfg.seed, cfg.t0, cfg.t1, level,
            std::max<int>(1, int(sys.noise.size())));
        const RigidTrajectory fine =
            reference_solve_rigid(sys, default_rigid_state(sys), path, ref_level);
        RigidTrajectory sub;
        for (std::int64_t k = 0; k < std::int64_t(fine.states.size());
             k += stride) {
          sub.times.push_back(fine.times[size_t(k)]);
          sub.states.push_back(fine.states[size_t(k)]);
        }
        write_rigid_rows(f, cfg.t0, sub);
      } else {
        const MechSystem sys = build_mech_model(cfg.model, cfg.model_params);
        const BrownianPath path = BrownianPath::sample(
            cfg.seed, cfg.t0, cfg.t1, level,
            std::max<int>(1, int(sys.noise.size())));
        const Trajectory fine =
            reference_solve(sys, default_mech_state(sys), path, ref_level);
        Trajectory sub;
        for (std::int64_t k = 0; k < std::int64_t(fine.states.size());
             k += stride) {
          sub.times.push_back(fine.times[size_t(k)]);
          sub.states.push_back(fine.states[size_t(k)]);
        }
        write_mech_rows(f, cfg.t0, sub, nullptr);
      }
    }
    out.add_result(token + "_rows", double(steps + 1));
  }
}

void run_convergence(const ExperimentConfig& cfg, Outputs& out) {
  if (is_rigid_model(cfg.model))
    throw ConfigError("convergence study covers vector-space models");
  const std::string token = cfg.integrators.front();
  if (token != "svi" && token != "eem" && token != "iem")
    throw ConfigError("convergence study compares svi, eem, or iem; got '" +
                      token + "'");
  const MechSystem sys = build_mech_model(cfg.model, cfg.model_params);
  const ConvergenceReport report = estimate_strong_order(
      sys, method_from_string(token), default_mech_state(sys), cfg.t0, cfg.t1,
      cfg.level_lo, cfg.level_hi, cfg.ref_level, cfg.paths, cfg.seed,
      cfg.stepper(), cfg.threads);

  std::ofstream f = out.open("convergence.csv");
  f << "h,ms_error\n";
  for (size_t i = 0; i < report.step_sizes.size(); ++i)
    f << report.step_sizes[i] << "," << report.ms_errors[i] << "\n";

  out.add_result("integrator", token);
  out.add_result("paths", double(report.paths));
  out.add_result("exact", report.exact ? "1" : "0");
  if (!report.exact) {
    out.add_result("fitted_slope", report.fitted_slope);
    out.add_result("intercept", report.intercept);
  }
}

void run_temperature(const ExperimentConfig& cfg, Outputs& out) {
  if (is_rigid_model(cfg.model))
    throw ConfigError("temperature study covers vector-space models");
  std::vector<Method> methods;
  for (const auto& token : cfg.integrators) {
    if (token != "svi" && token != "eem" && token != "iem")
      throw ConfigError("temperature study compares svi, eem, or iem; got '" +
                        token + "'");
    methods.push_back(method_from_string(token));
  }
  const MechSystem sys = build_mech_model(cfg.model, cfg.model_params);
  const std::vector<TemperatureSeries> series =
      temperature_study(sys, methods, cfg.t0, cfg.t1, cfg.h, cfg.paths, cfg.seed,
                        cfg.stepper(), cfg.threads);

  std::ofstream f = out.open("temperature.csv");
  f << "t,method,mean_kinetic\n";
  for (const auto& s : series)
    for (size_t k = 0; k < s.times.size(); ++k)
      f << s.times[k] << "," << s.method << "," << s.mean_kinetic[k] << "\n";

  out.add_result("target", series.front().target);
  for (const auto& s : series) {
    out.add_result("stat_" + s.method, s.stat);
    out.add_result("trend_" + s.method, s.trend);
  }
}

struct InvariantRow {
  std::string check;
  std::string statistic;
  double value;
  double tolerance;
  bool pass;
};

void run_invariants(const ExperimentConfig& cfg, Outputs& out) {
  const std::int64_t steps = std::llround((cfg.t1 - cfg.t0) / cfg.h);
  const StepperConfig scfg = cfg.stepper();
  std::vector<InvariantRow> rows;

  if (is_rigid_model(cfg.model)) {
    const RigidBodySystem sys = build_rigid_model(cfg.model, cfg.model_params);
    const CounterIncrements inc(cfg.seed, cfg.h, int(sys.noise.size()));
    const RigidTrajectory traj =
        run_rigid_trajectory(sys, default_rigid_state(sys), steps, inc, scfg);

    double ortho = 0.0, rot_gap = 0.0, lin_gap = 0.0, pmax = 0.0;
    for (const auto& st : traj.states)
      for (size_t b = 0; b < st.size(); ++b) {
        ortho = std::max(ortho, st[b].R.orthogonality_defect());
        const Vec3 pi_of_omega = sys.spatial_momentum(int(b), st[b].R, st[b].omega);
        rot_gap = std::max(rot_gap, (st[b].pi - pi_of_omega).norm());
        lin_gap = std::max(
            lin_gap, (st[b].p - sys.bodies[b].mass * st[b].v).norm());
        pmax = std::max(pmax, st[b].p.norm());
      }
    rows.push_back({"orthogonality_defect", "max", ortho, 1e-8, ortho <= 1e-8});
    rows.push_back({"rotational_legendre_gap", "max", rot_gap, 1e-10,
                    rot_gap <= 1e-10});
    const double lin_tol = 1e-12 * (1.0 + pmax);
    rows.push_back({"translational_legendre_gap", "max", lin_gap, lin_tol,
                    lin_gap <= lin_tol});
    if (sys.translation_invariant) {
      const double drift = check_momentum(sys, traj);
      const double tol = 1e-12 * (1.0 + pmax);
      rows.push_back({"momentum_drift", "max", drift, tol, drift <= tol});
    }
  } else {
    const MechSystem sys = build_mech_model(cfg.model, cfg.model_params);
    if (sys.constraint) {
      const CounterIncrements inc(cfg.seed, cfg.h, int(sys.noise.size()));
      const ConstrainedTrajectory traj = run_constrained_trajectory(
          sys, default_mech_state(sys), steps, inc, scfg);
      double gap = 0.0;
      for (const auto& s : traj.states)
        gap = std::max(gap,
                       sys.constraint->g(s.q).lpNorm<Eigen::Infinity>());
      rows.push_back({"constraint_gap", "max", gap, scfg.constraint_tol,
                      gap <= scfg.constraint_tol});
    } else {
      for (const auto& token : cfg.integrators) {
        if (token != "svi" && token != "eem" && token != "iem") continue;
        const SymplecticityReport rep =
            check_symplectic(sys, method_from_string(token), cfg.samples,
                             cfg.fd_step, cfg.seed, scfg);
        rows.push_back({"symplectic_defect_" + token, "max", rep.max_defect,
                        1e-6, rep.max_defect <= 1e-6});
      }
      const CounterIncrements inc(cfg.seed, cfg.h, int(sys.noise.size()));
      const Trajectory traj = run_trajectory(sys, Method::Svi,
                                             default_mech_state(sys), steps, inc,
                                             scfg);
      double pmax = 0.0, lgap = 0.0;
      for (const auto& s : traj.states) {
        pmax = std::max(pmax, s.p.norm());
        lgap = std::max(lgap, (s.p - sys.momentum(s.v)).norm());
      }
      const double ltol = 1e-12 * (1.0 + pmax);
      rows.push_back({"legendre_gap", "max", lgap, ltol, lgap <= ltol});
      if (!sys.symmetries.empty()) {
        const double drift = check_momentum(sys, traj);
        const double tol =
            1e-12 * (1.0 + traj.states.front().p.norm()) * double(steps);
        rows.push_back({"momentum_drift", "max", drift, tol, drift <= tol});
      }
      if (sys.noise.empty()) {
        const std::vector<double> H = energy_series(sys, traj);
        std::vector<double> t(traj.times.begin(), traj.times.end());
        const double slope = linear_trend(t, H).slope;
        rows.push_back({"energy_trend", "slope", slope, 1e-6,
                        std::abs(slope) <= 1e-6});
      }
    }
  }

  std::ofstream f = out.open("invariants.csv");
  f << "check,statistic,value,tolerance,pass\n";
  int passed = 0;
  for (const auto& r : rows) {
    f << r.check << "," << r.statistic << "," << r.value << "," << r.tolerance
      << "," << (r.pass ? 1 : 0) << "\n";
    if (r.pass) ++passed;
  }
  out.add_result("checks_passed",
                 std::to_string(passed) + "/" + std::to_string(rows.size()));
}

} // namespace

void run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  fs::create_directories(cfg.out);
  fs::remove(fs::path(cfg.out) / "FAILED");

  Outputs out;
  out.dir = cfg.out;
  out.hash = config_hash(cfg);
  out.seed = cfg.seed;

  if (cfg.study == "simulate")
    run_simulate(cfg, out);
  else if (cfg.study == "convergence")
    run_convergence(cfg, out);
  else if (cfg.study == "temperature")
    run_temperature(cfg, out);
  else if (cfg.study == "invariants")
    run_invariants(cfg, out);
  else
    throw ConfigError("unknown study '" + cfg.study + "'");

  std::ofstream summary(fs::path(cfg.out) / "summary.txt");
  if (!summary) throw ConfigError("cannot write summary file");
  summary << "# version = " << SVINT_VERSION << "\n";
  summary << "# config_hash = " << out.hash << "\n";
  summary << serialize_config(cfg);
  for (const auto& [k, v] : out.results)
    summary << "# result: " << k << " = " << v << "\n";
}

} // namespace svint
