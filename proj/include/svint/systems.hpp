#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "svint/geometry.hpp"

namespace svint {

// ---- vector-space mechanical systems ---------------------------------------

struct PhaseState {
  VecX q, v, p;
};

// Scalar noise potential gamma_i(q); its gradient multiplies the i-th Brownian
// increment in the momentum update.
struct NoisePotential {
  std::function<double(const VecX&)> value;
  std::function<VecX(const VecX&)> grad;
};

// Holonomic constraint g(q) = 0 with its Jacobian dg/dq (dim x n).
struct Constraint {
  int dim = 0;
  std::function<VecX(const VecX&)> g;
  std::function<MatX(const VecX&)> jacobian;
};

// Infinitesimal generator of a translation symmetry: xi_Q(q) = direction,
// momentum map J = <p, direction>.
struct TranslationSymmetry {
  VecX direction;
};

struct MechSystem {
  std::string name, role;
  int dim = 0;
  MatX mass;
  std::function<double(const VecX&)> potential;
  std::function<VecX(const VecX&)> grad_potential;
  std::vector<NoisePotential> noise;
  // External force F(q, v) entering the momentum update through the
  // Lagrange-d'Alembert term; dissipation lives here, never in the noise.
  std::function<VecX(const VecX&, const VecX&)> force;
  std::optional<Constraint> constraint;
  std::vector<TranslationSymmetry> symmetries;
  // Stiffness matrix of quadratic potentials; enables exact Gibbs sampling.
  std::optional<MatX> quadratic_stiffness;
  std::map<std::string, double> params;

  // Validates the mass matrix (SPD) and caches its factorization.
  void finalize();

  VecX velocity(const VecX& p) const { return llt_.solve(p); }
  MatX velocity_map(const MatX& cols) const { return llt_.solve(cols); }
  VecX momentum(const VecX& v) const { return mass * v; }
  double kinetic(const VecX& p) const { return 0.5 * p.dot(velocity(p)); }
  double hamiltonian(const VecX& q, const VecX& p) const {
    return kinetic(p) + potential(q);
  }
  PhaseState state_from_qv(const VecX& q, const VecX& v) const;
  PhaseState state_from_qp(const VecX& q, const VecX& p) const;

 private:
  Eigen::LLT<MatX> llt_;
};

// ---- rigid multi-body systems ----------------------------------------------

struct RigidBody {
  double mass = 1.0;
  Vec3 inertia = Vec3::Ones();  // body-frame principal moments
};

struct RigidBodyState {
  Vec3 x = Vec3::Zero(), v = Vec3::Zero(), p = Vec3::Zero();
  Rotation R;
  Vec3 omega = Vec3::Zero();  // spatial angular velocity
  Vec3 pi = Vec3::Zero();     // spatial angular momentum, pi = R I R^T omega
};

using RigidState = std::vector<RigidBodyState>;

// Scalar noise potential on the multi-body configuration space. grad_R is the
// spatially trivialized derivative: d/dt gamma(tau(t y) R_i)|_0 = <grad_R(i), y>.
struct RigidNoisePotential {
  std::function<double(const RigidState&)> value;
  std::function<Vec3(int, const RigidState&)> grad_x;
  std::function<Vec3(int, const RigidState&)> grad_R;
};

struct RigidBodySystem {
  std::string name, role;
  std::vector<RigidBody> bodies;
  std::function<double(const RigidState&)> potential;
  std::function<Vec3(int, const RigidState&)> potential_x;  // U_{x_i}
  std::function<Vec3(int, const RigidState&)> potential_R;  // U_{R_i}, spatial
  std::vector<RigidNoisePotential> noise;
  double drag_lin = 0.0, drag_rot = 0.0;  // linear drag on p_i and pi_i
  bool translation_invariant = false;
  std::map<std::string, double> params;

  int count() const { return int(bodies.size()); }
  Mat3 spatial_inertia(int i, const Rotation& R) const {
    return R.m * bodies[size_t(i)].inertia.asDiagonal() * R.m.transpose();
  }
  Vec3 spatial_momentum(int i, const Rotation& R, const Vec3& omega) const {
    return spatial_inertia(i, R) * omega;
  }
  Vec3 omega_from_pi(int i, const Rotation& R, const Vec3& pi) const {
    return R.m * (R.m.transpose() * pi).cwiseQuotient(bodies[size_t(i)].inertia);
  }
  RigidBodyState body_state(int i, const Vec3& x, const Vec3& v, const Rotation& R,
                            const Vec3& omega) const;
};

// ---- single body in body-frame (left-trivialized) coordinates --------------

struct LieState {
  Rotation g;
  Vec3 xi = Vec3::Zero();  // body angular velocity
  Vec3 mu = Vec3::Zero();  // body momentum, mu = I xi
};

struct LieNoisePotential {
  std::function<double(const Rotation&)> value;
  std::function<Vec3(const Rotation&)> grad;  // left-trivialized
};

struct LieSystem {
  std::string name, role;
  Vec3 inertia = Vec3::Ones();
  std::function<double(const Rotation&)> potential;
  std::function<Vec3(const Rotation&)> potential_g;  // left-trivialized dU
  std::vector<LieNoisePotential> noise;
  std::map<std::string, double> params;

  Vec3 momentum(const Vec3& xi) const { return inertia.cwiseProduct(xi); }
  LieState state(const Rotation& g, const Vec3& xi) const {
    return LieState{g, xi, momentum(xi)};
  }
};

// ---- catalog ----------------------------------------------------------------

MechSystem make_oscillator(double mass = 1.0, double stiffness = 1.0,
                           double sigma = 0.0);
MechSystem make_coupled_oscillator(double sigma = 0.5, double quartic = 0.25);
MechSystem make_two_body(double m1 = 1.0, double m2 = 1.0, double stiffness = 1.0,
                         double sigma = 0.3);
MechSystem make_constrained_pendulum(double length = 1.0, double mass = 1.0,
                                     double gravity = 9.81, double sigma = 0.0);
// Degenerate-noise Langevin benchmark: noise and drag act on the first
// momentum only, sigma^2 = 2 * drag * kBT. Throws InvalidTemperature.
MechSystem make_ballistic_analog(double kBT = 1.0, double drag = 0.15);
MechSystem make_lattice(int sites = 8, double stiffness = 1.0, double sigma = 0.2);

RigidBodySystem make_free_body(const Vec3& inertia = Vec3(1.0, 2.0, 3.0));
RigidBodySystem make_rigid_pair(double kappa_x = 1.0, double kappa_r = 1.0,
                                double sigma_x = 0.2, double sigma_r = 0.2);
// Single body under a constant-direction torque potential, with one
// orientation-dependent noise channel.
RigidBodySystem make_heavy_body(double weight = 1.0, double sigma = 0.3);

LieSystem make_free_body_lie(const Vec3& inertia = Vec3(1.0, 2.0, 3.0));
LieSystem make_heavy_body_lie(double weight = 1.0, double sigma = 0.3);

// ---- registry for the CLI ---------------------------------------------------

struct ModelInfo {
  std::string name;
  std::string kind;  // "mech" or "rigid"
  std::string role;
  std::map<std::string, double> defaults;
};

std::vector<ModelInfo> list_models();
bool is_rigid_model(const std::string& name);
// Build by name with parameter overrides. Unknown names throw UnknownModel,
// unknown parameter keys throw ConfigError.
MechSystem build_mech_model(const std::string& name,
                            const std::map<std::string, double>& params = {});
RigidBodySystem build_rigid_model(const std::string& name,
                                  const std::map<std::string, double>& params = {});
// Body-frame variant for single-body models (free_body, heavy_body).
LieSystem build_lie_model(const std::string& name,
                          const std::map<std::string, double>& params = {});

} // namespace svint
