#include "svint/systems.hpp"

#include <cmath>

namespace svint {

namespace {

// vee of the antisymmetric part of an arbitrary matrix
Vec3 skew_vee(const Mat3& a) {
  return Vec3(0.5 * (a(2, 1) - a(1, 2)),
              0.5 * (a(0, 2) - a(2, 0)),
              0.5 * (a(1, 0) - a(0, 1)));
}

double get_param(const std::map<std::string, double>& p, const std::string& k,
                 double dflt) {
  auto it = p.find(k);
  return it == p.end() ? dflt : it->second;
}

} // namespace

void MechSystem::finalize() {
  if (mass.rows() != dim || mass.cols() != dim)
    throw ConfigError(name + ": mass matrix has wrong shape");
  if ((mass - mass.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * (1.0 + mass.cwiseAbs().maxCoeff()))
    throw ConfigError(name + ": mass matrix is not symmetric");
  llt_.compute(mass);
  if (llt_.info() != Eigen::Success)
    throw ConfigError(name + ": mass matrix is not positive definite");
}

PhaseState MechSystem::state_from_qv(const VecX& q, const VecX& v) const {
  return PhaseState{q, v, momentum(v)};
}

PhaseState MechSystem::state_from_qp(const VecX& q, const VecX& p) const {
  return PhaseState{q, velocity(p), p};
}

RigidBodyState RigidBodySystem::body_state(int i, const Vec3& x, const Vec3& v,
                                           const Rotation& R, const Vec3& omega) const {
  RigidBodyState s;
  s.x = x;
  s.v = v;
  s.p = bodies[size_t(i)].mass * v;
  s.R = R;
  s.omega = omega;
  s.pi = spatial_momentum(i, R, omega);
  return s;
}

// ---- catalog ----------------------------------------------------------------

MechSystem make_oscillator(double mass, double stiffness, double sigma) {
  MechSystem s;
  s.name = "oscillator";
  s.role = "harmonic oscillator with a configuration-proportional noise potential";
  s.dim = 1;
  s.mass = MatX::Constant(1, 1, mass);
  const double k = stiffness;
  s.potential = [k](const VecX& q) { return 0.5 * k * q[0] * q[0]; };
  s.grad_potential = [k](const VecX& q) {
    VecX g(1);
    g[0] = k * q[0];
    return g;
  };
  if (sigma != 0.0) {
    NoisePotential np;
    np.value = [sigma](const VecX& q) { return sigma * q[0]; };
    np.grad = [sigma](const VecX&) { return VecX::Constant(1, sigma); };
    s.noise.push_back(np);
  }
  s.quadratic_stiffness = MatX::Constant(1, 1, k);
  s.params = {{"mass", mass}, {"stiffness", stiffness}, {"sigma", sigma}};
  s.finalize();
  return s;
}

MechSystem make_coupled_oscillator(double sigma, double quartic) {
  MechSystem s;
  s.name = "coupled_oscillator";
  s.role = "two coupled degrees of freedom with a quartic coupling and a "
           "nonlinear noise potential";
  s.dim = 2;
  s.mass = MatX::Identity(2, 2);
  const double lam = quartic;
  s.potential = [lam](const VecX& q) {
    const double d = q[1] - q[0];
    return 0.5 * (q[0] * q[0] + q[1] * q[1] + d * d) + 0.25 * lam * d * d * d * d;
  };
  s.grad_potential = [lam](const VecX& q) {
    const double d = q[1] - q[0];
    const double c = d + lam * d * d * d;
    VecX g(2);
    g[0] = q[0] - c;
    g[1] = q[1] + c;
    return g;
  };
  if (sigma != 0.0) {
    NoisePotential np;
    np.value = [sigma](const VecX& q) { return sigma * std::sin(q[0]); };
    np.grad = [sigma](const VecX& q) {
      VecX g(2);
      g[0] = sigma * std::cos(q[0]);
      g[1] = 0.0;
      return g;
    };
    s.noise.push_back(np);
  }
  s.params = {{"sigma", sigma}, {"quartic", quartic}};
  s.finalize();
  return s;
}

MechSystem make_two_body(double m1, double m2, double stiffness, double sigma) {
  MechSystem s;
  s.name = "two_body";
  s.role = "two particles on a line with an interaction potential and noise "
           "depending only on the separation (translation invariant)";
  s.dim = 2;
  s.mass = MatX::Zero(2, 2);
  s.mass(0, 0) = m1;
  s.mass(1, 1) = m2;
  const double k = stiffness;
  s.potential = [k](const VecX& q) {
    const double d = q[1] - q[0];
    return 0.5 * k * d * d;
  };
  s.grad_potential = [k](const VecX& q) {
    const double f = k * (q[1] - q[0]);
    VecX g(2);
    g[0] = -f;
    g[1] = f;
    return g;
  };
  if (sigma != 0.0) {
    NoisePotential np;
    np.value = [sigma](const VecX& q) {
      const double d = q[1] - q[0];
      return 0.5 * sigma * d * d;
    };
    np.grad = [sigma](const VecX& q) {
      const double f = sigma * (q[1] - q[0]);
      VecX g(2);
      g[0] = -f;
      g[1] = f;
      return g;
    };
    s.noise.push_back(np);
  }
  s.symmetries.push_back(TranslationSymmetry{VecX::Ones(2)});
  s.params = {{"m1", m1}, {"m2", m2}, {"stiffness", stiffness}, {"sigma", sigma}};
  s.finalize();
  return s;
}

MechSystem make_constrained_pendulum(double length, double mass, double gravity,
                                     double sigma) {
  MechSystem s;
  s.name = "constrained_pendulum";
  s.role = "planar particle constrained to a circle under gravity, noise "
           "potential proportional to the horizontal coordinate";
  s.dim = 2;
  s.mass = mass * MatX::Identity(2, 2);
  const double mg = mass * gravity;
  s.potential = [mg](const VecX& q) { return mg * q[1]; };
  s.grad_potential = [mg](const VecX&) {
    VecX g(2);
    g[0] = 0.0;
    g[1] = mg;
    return g;
  };
  if (sigma != 0.0) {
    NoisePotential np;
    np.value = [sigma](const VecX& q) { return sigma * q[0]; };
    np.grad = [sigma](const VecX&) {
      VecX g(2);
      g[0] = sigma;
      g[1] = 0.0;
      return g;
    };
    s.noise.push_back(np);
  }
  Constraint c;
  c.dim = 1;
  const double l2 = length * length;
  c.g = [l2](const VecX& q) { return VecX::Constant(1, q.squaredNorm() - l2); };
  c.jacobian = [](const VecX& q) {
    MatX j(1, 2);
    j(0, 0) = 2.0 * q[0];
    j(0, 1) = 2.0 * q[1];
    return j;
  };
  s.constraint = c;
  s.params = {{"length", length}, {"mass", mass}, {"gravity", gravity},
              {"sigma", sigma}};
  s.finalize();
  return s;
}

MechSystem make_ballistic_analog(double kBT, double drag) {
  if (!(kBT > 0.0))
    throw InvalidTemperature("ballistic_analog: kBT must be positive");
  MechSystem s;
  s.name = "ballistic_analog";
  s.role = "degenerate-noise Langevin benchmark: a light bob coupled to a "
           "heavy block, noise and drag on the bob momentum only, "
           "sigma^2 = 2 drag kBT";
  s.dim = 2;
  const double m2 = 9.0;
  s.mass = MatX::Zero(2, 2);
  s.mass(0, 0) = 1.0;
  s.mass(1, 1) = m2;
  // U = 1/2 q1^2 + 1/2 (q2 - q1)^2
  s.potential = [](const VecX& q) {
    const double d = q[1] - q[0];
    return 0.5 * (q[0] * q[0] + d * d);
  };
  s.grad_potential = [](const VecX& q) {
    const double d = q[1] - q[0];
    VecX g(2);
    g[0] = q[0] - d;
    g[1] = d;
    return g;
  };
  const double sigma = std::sqrt(2.0 * drag * kBT);
  NoisePotential np;
  np.value = [sigma](const VecX& q) { return sigma * q[0]; };
  np.grad = [sigma](const VecX&) {
    VecX g(2);
    g[0] = sigma;
    g[1] = 0.0;
    return g;
  };
  s.noise.push_back(np);
  const double c = drag;
  s.force = [c](const VecX&, const VecX& v) {
    VecX f(2);
    f[0] = -c * v[0];
    f[1] = 0.0;
    return f;
  };
  MatX K(2, 2);
  K << 2.0, -1.0, -1.0, 1.0;
  s.quadratic_stiffness = K;
  s.params = {{"kBT", kBT}, {"drag", drag}, {"sigma", sigma}};
  s.finalize();
  return s;
}

MechSystem make_lattice(int sites, double stiffness, double sigma) {
  if (sites < 2) throw ConfigError("lattice: need at least 2 sites");
  MechSystem s;
  s.name = "lattice";
  s.role = "periodic harmonic chain with one separation-dependent noise "
           "potential per bond (translation invariant)";
  s.dim = sites;
  s.mass = MatX::Identity(sites, sites);
  const int n = sites;
  const double k = stiffness;
  s.potential = [n, k](const VecX& q) {
    double u = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = q[(i + 1) % n] - q[i];
      u += 0.5 * k * d * d;
    }
    return u;
  };
  s.grad_potential = [n, k](const VecX& q) {
    VecX g = VecX::Zero(n);
    for (int i = 0; i < n; ++i) {
      const double f = k * (q[(i + 1) % n] - q[i]);
      g[i] -= f;
      g[(i + 1) % n] += f;
    }
    return g;
  };
  if (sigma != 0.0) {
    for (int j = 0; j < n; ++j) {
      NoisePotential np;
      np.value = [n, j, sigma](const VecX& q) {
        return sigma * (q[(j + 1) % n] - q[j]);
      };
      np.grad = [n, j, sigma](const VecX&) {
        VecX g = VecX::Zero(n);
        g[j] = -sigma;
        g[(j + 1) % n] += sigma;
        return g;
      };
      s.noise.push_back(np);
    }
  }
  s.symmetries.push_back(TranslationSymmetry{VecX::Ones(sites)});
  s.params = {{"sites", double(sites)}, {"stiffness", stiffness}, {"sigma", sigma}};
  s.finalize();
  return s;
}

RigidBodySystem make_free_body(const Vec3& inertia) {
  RigidBodySystem s;
  s.name = "free_body";
  s.role = "single torque-free rigid body";
  s.bodies.push_back(RigidBody{1.0, inertia});
  s.potential = [](const RigidState&) { return 0.0; };
  s.potential_x = [](int, const RigidState&) { return Vec3::Zero().eval(); };
  s.potential_R = [](int, const RigidState&) { return Vec3::Zero().eval(); };
  s.translation_invariant = true;
  s.params = {{"i1", inertia[0]}, {"i2", inertia[1]}, {"i3", inertia[2]}};
  return s;
}

RigidBodySystem make_rigid_pair(double kappa_x, double kappa_r, double sigma_x,
                                double sigma_r) {
  RigidBodySystem s;
  s.name = "rigid_pair";
  s.role = "two rigid bodies with separation and relative-orientation coupling; "
           "translation-invariant potential and noise";
  s.bodies.push_back(RigidBody{1.0, Vec3(1.0, 2.0, 3.0)});
  s.bodies.push_back(RigidBody{1.5, Vec3(1.6, 0.8, 1.6)});
  const double kx = kappa_x, kr = kappa_r;
  s.potential = [kx, kr](const RigidState& st) {
    const Vec3 d = st[0].x - st[1].x;
    return 0.5 * kx * d.squaredNorm() - kr * (st[0].R.m.transpose() * st[1].R.m).trace();
  };
  s.potential_x = [kx](int i, const RigidState& st) {
    const Vec3 f = kx * (st[0].x - st[1].x);
    return (i == 0 ? f : Vec3(-f)).eval();
  };
  s.potential_R = [kr](int i, const RigidState& st) {
    const Vec3 t = -2.0 * kr * skew_vee(st[1].R.m * st[0].R.m.transpose());
    return (i == 0 ? t : Vec3(-t)).eval();
  };
  if (sigma_x != 0.0) {
    RigidNoisePotential np;
    const double sx = sigma_x;
    np.value = [sx](const RigidState& st) {
      return 0.5 * sx * (st[0].x - st[1].x).squaredNorm();
    };
    np.grad_x = [sx](int i, const RigidState& st) {
      const Vec3 f = sx * (st[0].x - st[1].x);
      return (i == 0 ? f : Vec3(-f)).eval();
    };
    np.grad_R = [](int, const RigidState&) { return Vec3::Zero().eval(); };
    s.noise.push_back(np);
  }
  if (sigma_r != 0.0) {
    RigidNoisePotential np;
    const double sr = sigma_r;
    np.value = [sr](const RigidState& st) {
      return sr * (st[0].R.m.transpose() * st[1].R.m).trace();
    };
    np.grad_x = [](int, const RigidState&) { return Vec3::Zero().eval(); };
    np.grad_R = [sr](int i, const RigidState& st) {
      const Vec3 t = 2.0 * sr * skew_vee(st[1].R.m * st[0].R.m.transpose());
      return (i == 0 ? t : Vec3(-t)).eval();
    };
    s.noise.push_back(np);
  }
  s.translation_invariant = true;
  s.params = {{"kappa_x", kappa_x}, {"kappa_r", kappa_r},
              {"sigma_x", sigma_x}, {"sigma_r", sigma_r}};
  return s;
}

RigidBodySystem make_heavy_body(double weight, double sigma) {
  RigidBodySystem s;
  s.name = "heavy_body";
  s.role = "single rigid body under a constant-direction torque potential with "
           "one orientation-dependent noise channel";
  s.bodies.push_back(RigidBody{1.0, Vec3(1.2, 1.0, 0.6)});
  const Vec3 chi(0.0, 0.0, 1.0);
  const Vec3 e3(0.0, 0.0, 1.0);
  const Vec3 e1(1.0, 0.0, 0.0);
  const double w = weight;
  s.potential = [w, chi, e3](const RigidState& st) {
    return w * e3.dot(st[0].R.m * chi);
  };
  s.potential_x = [](int, const RigidState&) { return Vec3::Zero().eval(); };
  s.potential_R = [w, chi, e3](int, const RigidState& st) {
    return ((st[0].R.m * chi).cross(e3) * w).eval();
  };
  if (sigma != 0.0) {
    RigidNoisePotential np;
    np.value = [sigma, chi, e1](const RigidState& st) {
      return sigma * e1.dot(st[0].R.m * chi);
    };
    np.grad_x = [](int, const RigidState&) { return Vec3::Zero().eval(); };
    np.grad_R = [sigma, chi, e1](int, const RigidState& st) {
      return ((st[0].R.m * chi).cross(e1) * sigma).eval();
    };
    s.noise.push_back(np);
  }
  s.translation_invariant = true;
  s.params = {{"weight", weight}, {"sigma", sigma}};
  return s;
}

LieSystem make_free_body_lie(const Vec3& inertia) {
  LieSystem s;
  s.name = "free_body_lie";
  s.role = "single torque-free rigid body in body-frame coordinates";
  s.inertia = inertia;
  s.potential = [](const Rotation&) { return 0.0; };
  s.potential_g = [](const Rotation&) { return Vec3::Zero().eval(); };
  s.params = {{"i1", inertia[0]}, {"i2", inertia[1]}, {"i3", inertia[2]}};
  return s;
}

LieSystem make_heavy_body_lie(double weight, double sigma) {
  LieSystem s;
  s.name = "heavy_body_lie";
  s.role = "rigid body under a constant-direction torque potential, body-frame "
           "coordinates";
  s.inertia = Vec3(1.2, 1.0, 0.6);
  const Vec3 chi(0.0, 0.0, 1.0);
  const Vec3 e3(0.0, 0.0, 1.0);
  const Vec3 e1(1.0, 0.0, 0.0);
  const double w = weight;
  s.potential = [w, chi, e3](const Rotation& g) { return w * e3.dot(g.m * chi); };
  s.potential_g = [w, chi, e3](const Rotation& g) {
    return (w * chi.cross(Vec3(g.m.transpose() * e3))).eval();
  };
  if (sigma != 0.0) {
    LieNoisePotential np;
    np.value = [sigma, chi, e1](const Rotation& g) {
      return sigma * e1.dot(g.m * chi);
    };
    np.grad = [sigma, chi, e1](const Rotation& g) {
      return (sigma * chi.cross(Vec3(g.m.transpose() * e1))).eval();
    };
    s.noise.push_back(np);
  }
  s.params = {{"weight", weight}, {"sigma", sigma}};
  return s;
}

// ---- registry ---------------------------------------------------------------

namespace {

struct RegistryEntry {
  ModelInfo info;
  std::function<MechSystem(const std::map<std::string, double>&)> mech;
  std::function<RigidBodySystem(const std::map<std::string, double>&)> rigid;
};

std::vector<RegistryEntry> registry() {
  std::vector<RegistryEntry> r;
  r.push_back({{"oscillator", "mech",
                "harmonic oscillator with a configuration-proportional noise potential",
                {{"mass", 1.0}, {"stiffness", 1.0}, {"sigma", 0.0}}},
               [](const auto& p) {
                 return make_oscillator(get_param(p, "mass", 1.0),
                                        get_param(p, "stiffness", 1.0),
                                        get_param(p, "sigma", 0.0));
               },
               nullptr});
  r.push_back({{"coupled_oscillator", "mech",
                "two coupled degrees of freedom with quartic coupling and nonlinear noise",
                {{"sigma", 0.5}, {"quartic", 0.25}}},
               [](const auto& p) {
                 return make_coupled_oscillator(get_param(p, "sigma", 0.5),
                                                get_param(p, "quartic", 0.25));
               },
               nullptr});
  r.push_back({{"two_body", "mech",
                "translation-invariant pair of particles, separation-dependent noise",
                {{"m1", 1.0}, {"m2", 1.0}, {"stiffness", 1.0}, {"sigma", 0.3}}},
               [](const auto& p) {
                 return make_two_body(get_param(p, "m1", 1.0), get_param(p, "m2", 1.0),
                                      get_param(p, "stiffness", 1.0),
                                      get_param(p, "sigma", 0.3));
               },
               nullptr});
  r.push_back({{"constrained_pendulum", "mech",
                "planar pendulum as a constrained particle under gravity",
                {{"length", 1.0}, {"mass", 1.0}, {"gravity", 9.81}, {"sigma", 0.0}}},
               [](const auto& p) {
                 return make_constrained_pendulum(
                     get_param(p, "length", 1.0), get_param(p, "mass", 1.0),
                     get_param(p, "gravity", 9.81), get_param(p, "sigma", 0.0));
               },
               nullptr});
  r.push_back({{"ballistic_analog", "mech",
                "degenerate-noise Langevin benchmark with fluctuation-dissipation "
                "coupling sigma^2 = 2 drag kBT",
                {{"kBT", 1.0}, {"drag", 0.15}}},
               [](const auto& p) {
                 return make_ballistic_analog(get_param(p, "kBT", 1.0),
                                              get_param(p, "drag", 0.15));
               },
               nullptr});
  r.push_back({{"lattice", "mech",
                "periodic harmonic chain with per-bond noise potentials",
                {{"sites", 8.0}, {"stiffness", 1.0}, {"sigma", 0.2}}},
               [](const auto& p) {
                 const double sd = get_param(p, "sites", 8.0);
                 const int sites = int(sd);
                 if (double(sites) != sd)
                   throw ConfigError("lattice: sites must be an integer");
                 return make_lattice(sites, get_param(p, "stiffness", 1.0),
                                     get_param(p, "sigma", 0.2));
               },
               nullptr});
  r.push_back({{"free_body", "rigid", "single torque-free rigid body",
                {{"i1", 1.0}, {"i2", 2.0}, {"i3", 3.0}}},
               nullptr,
               [](const auto& p) {
                 return make_free_body(Vec3(get_param(p, "i1", 1.0),
                                            get_param(p, "i2", 2.0),
                                            get_param(p, "i3", 3.0)));
               }});
  r.push_back({{"rigid_pair", "rigid",
                "two coupled rigid bodies, translation-invariant potential and noise",
                {{"kappa_x", 1.0}, {"kappa_r", 1.0}, {"sigma_x", 0.2}, {"sigma_r", 0.2}}},
               nullptr,
               [](const auto& p) {
                 return make_rigid_pair(
                     get_param(p, "kappa_x", 1.0), get_param(p, "kappa_r", 1.0),
                     get_param(p, "sigma_x", 0.2), get_param(p, "sigma_r", 0.2));
               }});
  r.push_back({{"heavy_body", "rigid",
                "single rigid body under a constant-direction torque potential",
                {{"weight", 1.0}, {"sigma", 0.3}}},
               nullptr,
               [](const auto& p) {
                 return make_heavy_body(get_param(p, "weight", 1.0),
                                        get_param(p, "sigma", 0.3));
               }});
  return r;
}

const RegistryEntry& find_entry(const std::string& name) {
  static const std::vector<RegistryEntry> reg = registry();
  for (const auto& e : reg)
    if (e.info.name == name) return e;
  throw UnknownModel("unknown model '" + name + "'");
}

void validate_params(const ModelInfo& info,
                     const std::map<std::string, double>& params) {
  for (const auto& [k, v] : params)
    if (!info.defaults.count(k))
      throw ConfigError("unknown parameter 'model." + k + "' for model '" +
                        info.name + "'");
}

} // namespace

std::vector<ModelInfo> list_models() {
  std::vector<ModelInfo> out;
  for (const auto& e : registry()) out.push_back(e.info);
  return out;
}

bool is_rigid_model(const std::string& name) {
  return find_entry(name).info.kind == "rigid";
}

MechSystem build_mech_model(const std::string& name,
                            const std::map<std::string, double>& params) {
  const auto& e = find_entry(name);
  if (!e.mech) throw ConfigError("model '" + name + "' is not a vector-space model");
  validate_params(e.info, params);
  return e.mech(params);
}

RigidBodySystem build_rigid_model(const std::string& name,
                                  const std::map<std::string, double>& params) {
  const auto& e = find_entry(name);
  if (!e.rigid) throw ConfigError("model '" + name + "' is not a rigid-body model");
  validate_params(e.info, params);
  return e.rigid(params);
}

LieSystem build_lie_model(const std::string& name,
                          const std::map<std::string, double>& params) {
  const auto& e = find_entry(name);
  validate_params(e.info, params);
  if (name == "free_body")
    return make_free_body_lie(Vec3(get_param(params, "i1", 1.0),
                                   get_param(params, "i2", 2.0),
                                   get_param(params, "i3", 3.0)));
  if (name == "heavy_body")
    return make_heavy_body_lie(get_param(params, "weight", 1.0),
                               get_param(params, "sigma", 0.3));
  throw ConfigError("model '" + name + "' has no body-frame variant");
}

} // namespace svint
