#include "svint/integrators.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/LU>

namespace svint {

namespace {

constexpr double kBlowupNorm = 1e8;

void check_state_norm(double norm, std::int64_t step) {
  if (!(norm <= kBlowupNorm)) {
    std::ostringstream os;
    os << "state norm " << norm << " exceeded " << kBlowupNorm << " at step "
       << step;
    throw Blowup(os.str());
  }
}

// Newton with a central-difference Jacobian and a backtracking line search;
// residual measured in the infinity norm.
template <typename F>
VecX newton_solve(const F& residual, VecX x, double tol, int max_iter,
                  const char* what) {
  VecX r = residual(x);
  const int n = int(x.size());
  for (int iter = 0; iter < max_iter; ++iter) {
    double rn = r.template lpNorm<Eigen::Infinity>();
    if (rn <= tol) return x;
    MatX jac(n, n);
    for (int j = 0; j < n; ++j) {
      const double dx = 1e-7 * (1.0 + std::abs(x[j]));
      VecX xp = x, xm = x;
      xp[j] += dx;
      xm[j] -= dx;
      jac.col(j) = (residual(xp) - residual(xm)) / (2.0 * dx);
    }
    const VecX step = jac.fullPivLu().solve(-r);
    double scale = 1.0;
    for (int back = 0; back < 8; ++back) {
      const VecX xt = x + scale * step;
      const VecX rt = residual(xt);
      const double rtn = rt.template lpNorm<Eigen::Infinity>();
      if (rtn < rn || rtn <= tol || back == 7) {
        x = xt;
        r = rt;
        break;
      }
      scale *= 0.5;
    }
  }
  if (r.template lpNorm<Eigen::Infinity>() <= tol) return x;
  std::ostringstream os;
  os << what << ": Newton residual " << r.template lpNorm<Eigen::Infinity>()
     << " above tolerance " << tol << " after " << max_iter << " iterations";
  throw NewtonDivergence(os.str());
}

VecX noise_pull(const MechSystem& sys, const VecX& q, const VecX& B) {
  VecX acc = VecX::Zero(sys.dim);
  for (size_t i = 0; i < sys.noise.size(); ++i)
    acc += sys.noise[i].grad(q) * B[Eigen::Index(i)];
  return acc;
}

void require_channels(const MechSystem& sys, const VecX& B) {
  if (B.size() != Eigen::Index(sys.noise.size()))
    throw ConfigError(sys.name + ": expected " +
                      std::to_string(sys.noise.size()) +
                      " noise increments, got " + std::to_string(B.size()));
}

} // namespace

Method method_from_string(const std::string& name) {
  if (name == "svi") return Method::Svi;
  if (name == "eem") return Method::Eem;
  if (name == "iem") return Method::Iem;
  throw UnknownIntegrator("unknown integrator '" + name + "'");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::Svi: return "svi";
    case Method::Eem: return "eem";
    case Method::Iem: return "iem";
  }
  return "?";
}

VecX IncrementSource::step_increments(std::int64_t step, int n_channels) const {
  if (n_channels == 0) return VecX();
  if (channels() == 0) return VecX::Zero(n_channels);
  if (channels() < n_channels)
    throw ConfigError("increment source provides " + std::to_string(channels()) +
                      " channels, system needs " + std::to_string(n_channels));
  VecX b(n_channels);
  for (int c = 0; c < n_channels; ++c) b[c] = increment(step, c);
  return b;
}

CounterIncrements::CounterIncrements(std::uint64_t seed, double h, int channels)
    : seed_(seed), sqrt_h_(std::sqrt(h)), channels_(channels) {
  if (!(h > 0.0)) throw ConfigError("CounterIncrements: h must be positive");
}

double CounterIncrements::increment(std::int64_t step, int channel) const {
  return sqrt_h_ * std_normal(mix_key(seed_, 0xC0FFEE,
                                      std::uint64_t(step), std::uint64_t(channel)));
}

double PathIncrements::increment(std::int64_t step, int channel) const {
  return path_->increment(Eigen::Index(step), channel);
}

// ---- vector-space steps -----------------------------------------------------

PhaseState svi_step_rn(const MechSystem& sys, const PhaseState& s, const VecX& B,
                       const StepperConfig& cfg) {
  require_channels(sys, B);
  VecX p1 = s.p - cfg.h * sys.grad_potential(s.q);
  if (sys.force) p1 += cfg.h * sys.force(s.q, s.v);
  for (size_t i = 0; i < sys.noise.size(); ++i)
    p1 += sys.noise[i].grad(s.q) * B[Eigen::Index(i)];
  const VecX v1 = sys.velocity(p1);
  const VecX q1 = s.q + cfg.h * v1;
  return PhaseState{q1, v1, p1};
}

PhaseState det_ve_step_rn(const MechSystem& sys, const PhaseState& s,
                          const StepperConfig& cfg) {
  VecX p1 = s.p - cfg.h * sys.grad_potential(s.q);
  if (sys.force) p1 += cfg.h * sys.force(s.q, s.v);
  const VecX v1 = sys.velocity(p1);
  const VecX q1 = s.q + cfg.h * v1;
  return PhaseState{q1, v1, p1};
}

PhaseState em_explicit_step(const MechSystem& sys, const PhaseState& s,
                            const VecX& B, const StepperConfig& cfg) {
  require_channels(sys, B);
  const VecX q1 = s.q + cfg.h * s.v;
  VecX p1 = s.p - cfg.h * sys.grad_potential(s.q);
  if (sys.force) p1 += cfg.h * sys.force(s.q, s.v);
  p1 += noise_pull(sys, s.q, B);
  return sys.state_from_qp(q1, p1);
}

PhaseState em_implicit_step(const MechSystem& sys, const PhaseState& s,
                            const VecX& B, const StepperConfig& cfg) {
  require_channels(sys, B);
  const int n = sys.dim;
  const VecX noise = noise_pull(sys, s.q, B);
  const auto residual = [&](const VecX& z) {
    const VecX q1 = z.head(n);
    const VecX p1 = z.tail(n);
    const VecX v1 = sys.velocity(p1);
    VecX drift_p = -sys.grad_potential(q1);
    if (sys.force) drift_p += sys.force(q1, v1);
    VecX r(2 * n);
    r.head(n) = q1 - s.q - cfg.h * v1;
    r.tail(n) = p1 - s.p - cfg.h * drift_p - noise;
    return r;
  };
  const PhaseState guess = em_explicit_step(sys, s, B, cfg);
  VecX z0(2 * n);
  z0.head(n) = guess.q;
  z0.tail(n) = guess.p;
  const VecX z = newton_solve(residual, z0, cfg.newton_tol, cfg.newton_max_iter,
                              "em_implicit_step");
  return sys.state_from_qp(z.head(n), z.tail(n));
}

// ---- constrained step -------------------------------------------------------

namespace {

ConstrainedStep constrained_step_impl(const MechSystem& sys, const PhaseState& s,
                                      const VecX* B, const StepperConfig& cfg) {
  if (!sys.constraint)
    throw ConfigError(sys.name + ": constrained step on an unconstrained system");
  const Constraint& con = *sys.constraint;
  const int nc = con.dim;
  VecX p_base = s.p - cfg.h * sys.grad_potential(s.q);
  if (sys.force) p_base += cfg.h * sys.force(s.q, s.v);
  if (B) p_base += noise_pull(sys, s.q, *B);
  const MatX gk = con.jacobian(s.q); // nc x n

  const auto position = [&](const VecX& lambda) {
    const VecX p1 = p_base + cfg.h * gk.transpose() * lambda;
    return VecX(s.q + cfg.h * sys.velocity(p1));
  };

  VecX lambda = VecX::Zero(nc);
  VecX r = con.g(position(lambda));
  bool solved = false;
  for (int iter = 0; iter < cfg.newton_max_iter; ++iter) {
    if (r.lpNorm<Eigen::Infinity>() <= cfg.constraint_tol) {
      solved = true;
      break;
    }
    const VecX q1 = position(lambda);
    const MatX jac =
        cfg.h * cfg.h * con.jacobian(q1) * sys.velocity_map(gk.transpose());
    Eigen::FullPivLU<MatX> lu(jac);
    // rcond() is only meaningful at full rank, so test the rank first.
    if (lu.rank() < nc)
      throw RankDeficientConstraint(
          sys.name + ": multiplier system has rank " +
          std::to_string(lu.rank()) + ", expected " + std::to_string(nc));
    if (lu.rcond() < 1e-12)
      throw RankDeficientConstraint(
          sys.name + ": multiplier system is rank deficient (rcond " +
          std::to_string(lu.rcond()) + ")");
    const VecX step = lu.solve(-r);
    const double rn = r.lpNorm<Eigen::Infinity>();
    double scale = 1.0;
    for (int back = 0; back < 8; ++back) {
      const VecX lt = lambda + scale * step;
      const VecX rt = con.g(position(lt));
      if (rt.lpNorm<Eigen::Infinity>() < rn ||
          rt.lpNorm<Eigen::Infinity>() <= cfg.constraint_tol || back == 7) {
        lambda = lt;
        r = rt;
        break;
      }
      scale *= 0.5;
    }
  }
  if (!solved && r.lpNorm<Eigen::Infinity>() > cfg.constraint_tol) {
    std::ostringstream os;
    os << sys.name << ": constraint residual " << r.lpNorm<Eigen::Infinity>()
       << " above tolerance " << cfg.constraint_tol << " after "
       << cfg.newton_max_iter << " iterations";
    throw NewtonDivergence(os.str());
  }
  const VecX p1 = p_base + cfg.h * gk.transpose() * lambda;
  const VecX v1 = sys.velocity(p1);
  const VecX q1 = s.q + cfg.h * v1;
  return ConstrainedStep{PhaseState{q1, v1, p1}, lambda};
}

} // namespace

ConstrainedStep svi_step_constrained(const MechSystem& sys, const PhaseState& s,
                                     const VecX& B, const StepperConfig& cfg) {
  require_channels(sys, B);
  return constrained_step_impl(sys, s, &B, cfg);
}

ConstrainedStep det_ve_step_constrained(const MechSystem& sys, const PhaseState& s,
                                        const StepperConfig& cfg) {
  return constrained_step_impl(sys, s, nullptr, cfg);
}

// ---- Lie group step ---------------------------------------------------------

namespace {

LieState lie_step_impl(const LieSystem& sys, const LieState& s, const VecX* B,
                       const StepperConfig& cfg) {
  const double h = cfg.h;
  const Retraction retr = cfg.retraction;
  const Vec3 mu_k = sys.momentum(s.xi);
  Vec3 rhs = dtau_inv_dual(retr, Vec3(-h * s.xi), mu_k);
  rhs -= h * sys.potential_g(s.g);
  if (B)
    for (size_t i = 0; i < sys.noise.size(); ++i)
      rhs += sys.noise[i].grad(s.g) * (*B)[Eigen::Index(i)];

  const auto residual = [&](const VecX& xi) {
    const Vec3 x(xi[0], xi[1], xi[2]);
    const Vec3 lhs = dtau_inv_dual(retr, Vec3(h * x), sys.momentum(x));
    VecX r(3);
    r << lhs[0] - rhs[0], lhs[1] - rhs[1], lhs[2] - rhs[2];
    return r;
  };
  VecX xi0(3);
  xi0 << s.xi[0], s.xi[1], s.xi[2];
  const VecX sol = newton_solve(residual, xi0, cfg.newton_tol,
                                cfg.newton_max_iter, "svi_step_lie");
  const Vec3 xi1(sol[0], sol[1], sol[2]);
  LieState out;
  out.g = Rotation{s.g.m * tau(retr, Vec3(h * xi1)).m};
  out.xi = xi1;
  out.mu = sys.momentum(xi1);
  return out;
}

} // namespace

LieState svi_step_lie(const LieSystem& sys, const LieState& s, const VecX& B,
                      const StepperConfig& cfg) {
  if (B.size() != Eigen::Index(sys.noise.size()))
    throw ConfigError(sys.name + ": expected " +
                      std::to_string(sys.noise.size()) +
                      " noise increments, got " + std::to_string(B.size()));
  return lie_step_impl(sys, s, &B, cfg);
}

LieState det_ve_step_lie(const LieSystem& sys, const LieState& s,
                         const StepperConfig& cfg) {
  return lie_step_impl(sys, s, nullptr, cfg);
}

// ---- rigid-body step --------------------------------------------------------

namespace {

RigidState rigid_step_impl(const RigidBodySystem& sys, const RigidState& s,
                           const VecX* B, const StepperConfig& cfg) {
  const double h = cfg.h;
  const Retraction retr = cfg.retraction;
  const int nb = sys.count();
  const size_t nch = sys.noise.size();

  // All gradients at the old state before any body moves.
  std::vector<Vec3> ux(nb), ur(nb);
  std::vector<Vec3> nx(nb, Vec3::Zero()), nr(nb, Vec3::Zero());
  for (int i = 0; i < nb; ++i) {
    ux[size_t(i)] = sys.potential_x(i, s);
    ur[size_t(i)] = sys.potential_R(i, s);
    if (B)
      for (size_t c = 0; c < nch; ++c) {
        nx[size_t(i)] += sys.noise[c].grad_x(i, s) * (*B)[Eigen::Index(c)];
        nr[size_t(i)] += sys.noise[c].grad_R(i, s) * (*B)[Eigen::Index(c)];
      }
  }

  RigidState out(s.size());
  for (int i = 0; i < nb; ++i) {
    const RigidBodyState& b = s[size_t(i)];
    const RigidBody& body = sys.bodies[size_t(i)];
    RigidBodyState& o = out[size_t(i)];

    Vec3 p1 = b.p - h * ux[size_t(i)] - h * sys.drag_lin * b.v + nx[size_t(i)];
    o.p = p1;
    o.v = p1 / body.mass;
    o.x = b.x + h * o.v;

    const Vec3 rot_rhs = dtau_inv_dual(retr, Vec3(h * b.omega), b.pi) -
                         h * ur[size_t(i)] - h * sys.drag_rot * b.omega +
                         nr[size_t(i)];
    const auto residual = [&](const VecX& w) {
      const Vec3 omega(w[0], w[1], w[2]);
      const Rotation R1{tau(retr, Vec3(h * omega)).m * b.R.m};
      const Vec3 pi1 = sys.spatial_momentum(i, R1, omega);
      const Vec3 lhs = dtau_inv_dual(retr, Vec3(h * omega), pi1);
      VecX r(3);
      r << lhs[0] - rot_rhs[0], lhs[1] - rot_rhs[1], lhs[2] - rot_rhs[2];
      return r;
    };
    VecX w0(3);
    w0 << b.omega[0], b.omega[1], b.omega[2];
    const VecX sol = newton_solve(residual, w0, cfg.newton_tol,
                                  cfg.newton_max_iter, "svi_step_rigid_bodies");
    o.omega = Vec3(sol[0], sol[1], sol[2]);
    o.R = Rotation{tau(retr, Vec3(h * o.omega)).m * b.R.m};
    o.pi = sys.spatial_momentum(i, o.R, o.omega);
  }
  return out;
}

} // namespace

RigidState svi_step_rigid_bodies(const RigidBodySystem& sys, const RigidState& s,
                                 const VecX& B, const StepperConfig& cfg) {
  if (B.size() != Eigen::Index(sys.noise.size()))
    throw ConfigError(sys.name + ": expected " +
                      std::to_string(sys.noise.size()) +
                      " noise increments, got " + std::to_string(B.size()));
  return rigid_step_impl(sys, s, &B, cfg);
}

RigidState det_ve_step_rigid_bodies(const RigidBodySystem& sys, const RigidState& s,
                                    const StepperConfig& cfg) {
  return rigid_step_impl(sys, s, nullptr, cfg);
}

// ---- trajectory runners -----------------------------------------------------

Trajectory run_trajectory(const MechSystem& sys, Method method,
                          const PhaseState& initial, std::int64_t steps,
                          const IncrementSource& noise, const StepperConfig& cfg,
                          AuditLog* audit) {
  Trajectory traj;
  traj.times.reserve(size_t(steps + 1));
  traj.states.reserve(size_t(steps + 1));
  traj.times.push_back(0.0);
  traj.states.push_back(initial);
  PhaseState s = initial;
  const int nch = int(sys.noise.size());
  for (std::int64_t k = 0; k < steps; ++k) {
    const VecX B = noise.step_increments(k, nch);
    if (audit) audit->increments.push_back(B);
    switch (method) {
      case Method::Svi: s = svi_step_rn(sys, s, B, cfg); break;
      case Method::Eem: s = em_explicit_step(sys, s, B, cfg); break;
      case Method::Iem: s = em_implicit_step(sys, s, B, cfg); break;
    }
    check_state_norm(s.q.norm() + s.p.norm(), k + 1);
    traj.times.push_back(double(k + 1) * cfg.h);
    traj.states.push_back(s);
  }
  return traj;
}

ConstrainedTrajectory run_constrained_trajectory(const MechSystem& sys,
                                                 const PhaseState& initial,
                                                 std::int64_t steps,
                                                 const IncrementSource& noise,
                                                 const StepperConfig& cfg) {
  ConstrainedTrajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(initial);
  PhaseState s = initial;
  const int nch = int(sys.noise.size());
  for (std::int64_t k = 0; k < steps; ++k) {
    const VecX B = noise.step_increments(k, nch);
    const ConstrainedStep cs = svi_step_constrained(sys, s, B, cfg);
    s = cs.state;
    check_state_norm(s.q.norm() + s.p.norm(), k + 1);
    traj.times.push_back(double(k + 1) * cfg.h);
    traj.states.push_back(s);
    traj.lambdas.push_back(cs.lambda);
  }
  return traj;
}

LieTrajectory run_lie_trajectory(const LieSystem& sys, const LieState& initial,
                                 std::int64_t steps, const IncrementSource& noise,
                                 const StepperConfig& cfg) {
  LieTrajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(initial);
  LieState s = initial;
  const int nch = int(sys.noise.size());
  for (std::int64_t k = 0; k < steps; ++k) {
    const VecX B = noise.step_increments(k, nch);
    s = svi_step_lie(sys, s, B, cfg);
    check_state_norm(s.xi.norm() + s.mu.norm(), k + 1);
    traj.times.push_back(double(k + 1) * cfg.h);
    traj.states.push_back(s);
  }
  return traj;
}

RigidTrajectory run_rigid_trajectory(const RigidBodySystem& sys,
                                     const RigidState& initial, std::int64_t steps,
                                     const IncrementSource& noise,
                                     const StepperConfig& cfg, AuditLog* audit) {
  RigidTrajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(initial);
  RigidState s = initial;
  const int nch = int(sys.noise.size());
  for (std::int64_t k = 0; k < steps; ++k) {
    const VecX B = noise.step_increments(k, nch);
    if (audit) audit->increments.push_back(B);
    s = svi_step_rigid_bodies(sys, s, B, cfg);
    double norm = 0.0;
    for (const auto& b : s) norm += b.x.norm() + b.p.norm() + b.pi.norm();
    check_state_norm(norm, k + 1);
    traj.times.push_back(double(k + 1) * cfg.h);
    traj.states.push_back(s);
  }
  return traj;
}

// ---- fine-step reference ----------------------------------------------------

Trajectory reference_solve(const MechSystem& sys, const PhaseState& initial,
                           const BrownianPath& path, int levels_ref) {
  if (sys.constraint)
    throw ConfigError(sys.name +
                      ": reference solver does not support constrained systems");
  if (levels_ref < path.levels)
    throw ConfigError("reference level below the path's resolution");
  BrownianPath fine = path;
  while (fine.levels < levels_ref) fine = fine.refined();
  const double h = fine.step_size();
  const std::int64_t n = fine.steps();
  const int nch = int(sys.noise.size());
  if (nch > fine.channels)
    throw ConfigError("path provides fewer channels than the system needs");

  const auto drift_p = [&](const VecX& q, const VecX& p) {
    VecX f = -sys.grad_potential(q);
    if (sys.force) f += sys.force(q, sys.velocity(p));
    return f;
  };

  Trajectory traj;
  traj.times.reserve(size_t(n + 1));
  traj.states.reserve(size_t(n + 1));
  traj.times.push_back(0.0);
  traj.states.push_back(initial);
  VecX q = initial.q, p = initial.p;
  for (std::int64_t k = 0; k < n; ++k) {
    VecX noise = VecX::Zero(sys.dim);
    for (int c = 0; c < nch; ++c)
      noise += sys.noise[size_t(c)].grad(q) * fine.increment(Eigen::Index(k), c);
    const VecX dq0 = sys.velocity(p);
    const VecX dp0 = drift_p(q, p);
    const VecX qt = q + h * dq0;
    const VecX pt = p + h * dp0 + noise;
    const VecX dq1 = sys.velocity(pt);
    const VecX dp1 = drift_p(qt, pt);
    q += 0.5 * h * (dq0 + dq1);
    p += 0.5 * h * (dp0 + dp1) + noise;
    check_state_norm(q.norm() + p.norm(), k + 1);
    traj.times.push_back(double(k + 1) * h);
    traj.states.push_back(sys.state_from_qp(q, p));
  }
  return traj;
}

RigidTrajectory reference_solve_rigid(const RigidBodySystem& sys,
                                      const RigidState& initial,
                                      const BrownianPath& path, int levels_ref) {
  if (levels_ref < path.levels)
    throw ConfigError("reference level below the path's resolution");
  BrownianPath fine = path;
  while (fine.levels < levels_ref) fine = fine.refined();
  const double h = fine.step_size();
  const std::int64_t n = fine.steps();
  const int nch = int(sys.noise.size());
  if (nch > fine.channels)
    throw ConfigError("path provides fewer channels than the system needs");
  const int nb = sys.count();

  struct Deriv {
    std::vector<Vec3> dp, dpi, omega;
  };
  const auto derivs = [&](const RigidState& st) {
    Deriv d;
    d.dp.resize(size_t(nb));
    d.dpi.resize(size_t(nb));
    d.omega.resize(size_t(nb));
    for (int i = 0; i < nb; ++i) {
      d.dp[size_t(i)] = -sys.potential_x(i, st) - sys.drag_lin * st[size_t(i)].v;
      d.dpi[size_t(i)] =
          -sys.potential_R(i, st) - sys.drag_rot * st[size_t(i)].omega;
      d.omega[size_t(i)] = st[size_t(i)].omega;
    }
    return d;
  };
  const auto fill = [&](RigidState& st) {
    for (int i = 0; i < nb; ++i) {
      RigidBodyState& b = st[size_t(i)];
      b.v = b.p / sys.bodies[size_t(i)].mass;
      b.omega = sys.omega_from_pi(i, b.R, b.pi);
    }
  };

  RigidTrajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(initial);
  RigidState s = initial;
  for (std::int64_t k = 0; k < n; ++k) {
    std::vector<Vec3> noise_p(size_t(nb), Vec3::Zero());
    std::vector<Vec3> noise_pi(size_t(nb), Vec3::Zero());
    for (int c = 0; c < nch; ++c) {
      const double B = fine.increment(Eigen::Index(k), c);
      for (int i = 0; i < nb; ++i) {
        noise_p[size_t(i)] += sys.noise[size_t(c)].grad_x(i, s) * B;
        noise_pi[size_t(i)] += sys.noise[size_t(c)].grad_R(i, s) * B;
      }
    }
    const Deriv d0 = derivs(s);
    RigidState pred = s;
    for (int i = 0; i < nb; ++i) {
      RigidBodyState& b = pred[size_t(i)];
      const RigidBodyState& a = s[size_t(i)];
      b.x = a.x + h * a.v;
      b.p = a.p + h * d0.dp[size_t(i)] + noise_p[size_t(i)];
      b.R = Rotation{tau(Retraction::Exponential, Vec3(h * a.omega)).m * a.R.m};
      b.pi = a.pi + h * d0.dpi[size_t(i)] + noise_pi[size_t(i)];
    }
    fill(pred);
    const Deriv d1 = derivs(pred);
    RigidState next = s;
    for (int i = 0; i < nb; ++i) {
      RigidBodyState& b = next[size_t(i)];
      const RigidBodyState& a = s[size_t(i)];
      b.p = a.p + 0.5 * h * (d0.dp[size_t(i)] + d1.dp[size_t(i)]) + noise_p[size_t(i)];
      b.x = a.x + 0.5 * h * (a.v + pred[size_t(i)].v);
      const Vec3 wmid = 0.5 * (d0.omega[size_t(i)] + d1.omega[size_t(i)]);
      b.R = Rotation{tau(Retraction::Exponential, Vec3(h * wmid)).m * a.R.m};
      b.pi = a.pi + 0.5 * h * (d0.dpi[size_t(i)] + d1.dpi[size_t(i)]) +
             noise_pi[size_t(i)];
    }
    fill(next);
    s = next;
    double norm = 0.0;
    for (const auto& b : s) norm += b.x.norm() + b.p.norm() + b.pi.norm();
    check_state_norm(norm, k + 1);
    traj.times.push_back(double(k + 1) * h);
    traj.states.push_back(s);
  }
  return traj;
}

} // namespace svint
