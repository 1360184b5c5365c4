#include "svint/analysis.hpp"

#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include <Eigen/Cholesky>

namespace svint {

namespace {

void parallel_for(std::int64_t n, int threads,
                  const std::function<void(std::int64_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const int nw = int(std::min<std::int64_t>(threads, n));
  std::mutex mu;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(size_t(nw));
  for (int w = 0; w < nw; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (std::int64_t i = w; i < n; i += nw) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

PhaseState one_step(const MechSystem& sys, Method method, const PhaseState& s,
                    const VecX& B, const StepperConfig& cfg) {
  switch (method) {
    case Method::Svi: return svi_step_rn(sys, s, B, cfg);
    case Method::Eem: return em_explicit_step(sys, s, B, cfg);
    case Method::Iem: return em_implicit_step(sys, s, B, cfg);
  }
  throw ConfigError("unreachable method");
}

} // namespace

LinearFit linear_trend(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() != y.size() || t.size() < 2)
    throw ConfigError("linear_trend: need two matching series");
  const double n = double(t.size());
  double st = 0.0, sy = 0.0;
  for (size_t i = 0; i < t.size(); ++i) {
    st += t[i];
    sy += y[i];
  }
  const double mt = st / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < t.size(); ++i) {
    sxx += (t[i] - mt) * (t[i] - mt);
    sxy += (t[i] - mt) * (y[i] - my);
  }
  if (sxx == 0.0) throw ConfigError("linear_trend: degenerate abscissa");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mt;
  return fit;
}

SymplecticityReport check_symplectic(const MechSystem& sys, Method method,
                                     int n_samples, double fd_step,
                                     std::uint64_t seed, const StepperConfig& cfg) {
  if (sys.constraint)
    throw ConfigError(sys.name +
                      ": symplecticity check covers unconstrained systems only");
  const int n = sys.dim;
  const int nch = int(sys.noise.size());
  MatX J = MatX::Zero(2 * n, 2 * n);
  J.topRightCorner(n, n) = MatX::Identity(n, n);
  J.bottomLeftCorner(n, n) = -MatX::Identity(n, n);

  SymplecticityReport report;
  report.samples = n_samples;
  report.fd_step = fd_step;
  const double sqrt_h = std::sqrt(cfg.h);
  for (int sample = 0; sample < n_samples; ++sample) {
    NormalStream rng(seed, std::uint64_t(sample));
    VecX q(n), p(n);
    for (int i = 0; i < n; ++i) q[i] = rng.next();
    VecX v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.next();
    p = sys.momentum(v);
    VecX B(nch);
    for (int c = 0; c < nch; ++c) B[c] = sqrt_h * rng.next();

    const auto map = [&](const VecX& z) {
      const PhaseState in = sys.state_from_qp(z.head(n), z.tail(n));
      const PhaseState out = one_step(sys, method, in, B, cfg);
      VecX w(2 * n);
      w.head(n) = out.q;
      w.tail(n) = out.p;
      return w;
    };
    VecX z(2 * n);
    z.head(n) = q;
    z.tail(n) = p;
    MatX DF(2 * n, 2 * n);
    for (int j = 0; j < 2 * n; ++j) {
      VecX zp = z, zm = z;
      zp[j] += fd_step;
      zm[j] -= fd_step;
      DF.col(j) = (map(zp) - map(zm)) / (2.0 * fd_step);
    }
    const double defect = (DF.transpose() * J * DF - J).norm();
    report.max_defect = std::max(report.max_defect, defect);
  }
  return report;
}

double check_momentum(const MechSystem& sys, const TranslationSymmetry& generator,
                      const Trajectory& traj) {
  bool declared = false;
  for (const auto& sym : sys.symmetries) {
    if (sym.direction.size() != generator.direction.size()) continue;
    const double denom = sym.direction.norm() * generator.direction.norm();
    if (denom == 0.0) continue;
    if (std::abs(std::abs(sym.direction.dot(generator.direction)) / denom - 1.0) <
        1e-12) {
      declared = true;
      break;
    }
  }
  if (!declared)
    throw SymmetryNotDeclared(sys.name +
                              ": translation direction not declared invariant");
  if (traj.states.empty()) return 0.0;
  const double j0 = traj.states.front().p.dot(generator.direction);
  double drift = 0.0;
  for (const auto& s : traj.states)
    drift = std::max(drift, std::abs(s.p.dot(generator.direction) - j0));
  return drift;
}

double check_momentum(const MechSystem& sys, const Trajectory& traj) {
  if (sys.symmetries.empty())
    throw SymmetryNotDeclared(sys.name + ": no symmetry declared");
  return check_momentum(sys, sys.symmetries.front(), traj);
}

double check_momentum(const RigidBodySystem& sys, const RigidTrajectory& traj) {
  if (!sys.translation_invariant)
    throw SymmetryNotDeclared(sys.name + ": not declared translation invariant");
  if (traj.states.empty()) return 0.0;
  const auto total = [](const RigidState& st) {
    Vec3 p = Vec3::Zero();
    for (const auto& b : st) p += b.p;
    return p;
  };
  const Vec3 j0 = total(traj.states.front());
  double drift = 0.0;
  for (const auto& st : traj.states)
    drift = std::max(drift, (total(st) - j0).norm());
  return drift;
}

ConvergenceReport estimate_strong_order(const MechSystem& sys, Method method,
                                        const PhaseState& initial, double t0,
                                        double t1, int level_lo, int level_hi,
                                        int ref_level, int paths,
                                        std::uint64_t seed,
                                        const StepperConfig& cfg, int threads) {
  if (level_lo > level_hi)
    throw ConfigError("estimate_strong_order: empty level range");
  if (ref_level < level_hi + 4)
    throw ConfigError("estimate_strong_order: reference level must exceed the "
                      "finest tested level by at least 4");
  if (paths < 1) throw ConfigError("estimate_strong_order: need at least one path");
  if (sys.constraint)
    throw ConfigError(sys.name + ": strong-order study needs an unconstrained system");

  const int nlev = level_hi - level_lo + 1;
  const int nch = std::max<int>(1, int(sys.noise.size()));
  const int n = sys.dim;

  std::vector<std::vector<double>> sq_err(size_t(nlev),
                                          std::vector<double>(size_t(paths), 0.0));
  std::vector<double> ref_norm(size_t(paths), 0.0);

  parallel_for(paths, threads, [&](std::int64_t m) {
    const std::uint64_t path_seed = mix_key(seed, 0x9A77, std::uint64_t(m), 0);
    std::vector<BrownianPath> by_level;
    by_level.reserve(size_t(nlev));
    by_level.push_back(BrownianPath::sample(path_seed, t0, t1, level_lo, nch));
    for (int L = level_lo + 1; L <= level_hi; ++L)
      by_level.push_back(by_level.back().refined());

    const Trajectory ref =
        reference_solve(sys, initial, by_level.back(), ref_level);
    const PhaseState& end = ref.states.back();
    ref_norm[size_t(m)] = std::sqrt(end.q.squaredNorm() + end.p.squaredNorm());

    for (int li = 0; li < nlev; ++li) {
      const BrownianPath& path = by_level[size_t(li)];
      StepperConfig level_cfg = cfg;
      level_cfg.h = path.step_size();
      PathIncrements inc(path);
      try {
        const Trajectory traj = run_trajectory(sys, method, initial,
                                               path.steps(), inc, level_cfg);
        const PhaseState& e = traj.states.back();
        sq_err[size_t(li)][size_t(m)] =
            (e.q - end.q).squaredNorm() + (e.p - end.p).squaredNorm();
      } catch (const Blowup& b) {
        std::ostringstream os;
        os << b.what() << " (level " << (level_lo + li) << ", path seed "
           << path_seed << ")";
        throw Blowup(os.str());
      }
    }
  });

  ConvergenceReport report;
  report.paths = paths;
  double scale = 0.0;
  for (int li = 0; li < nlev; ++li) {
    double acc = 0.0;
    for (int m = 0; m < paths; ++m) acc += sq_err[size_t(li)][size_t(m)];
    report.levels.push_back(level_lo + li);
    report.step_sizes.push_back((t1 - t0) / double(std::int64_t(1) << (level_lo + li)));
    report.ms_errors.push_back(std::sqrt(acc / double(paths)));
  }
  for (int m = 0; m < paths; ++m) scale = std::max(scale, ref_norm[size_t(m)]);
  const double floor = 1e-13 * (1.0 + scale) * std::sqrt(double(2 * n));
  report.exact = true;
  for (double e : report.ms_errors)
    if (e > floor) report.exact = false;
  if (!report.exact) {
    std::vector<double> lx, ly;
    for (size_t i = 0; i < report.ms_errors.size(); ++i) {
      lx.push_back(std::log2(report.step_sizes[i]));
      ly.push_back(std::log2(report.ms_errors[i]));
    }
    const LinearFit fit = linear_trend(lx, ly);
    report.fitted_slope = fit.slope;
    report.intercept = fit.intercept;
  }
  return report;
}

std::vector<TemperatureSeries> temperature_study(const MechSystem& sys,
                                                 const std::vector<Method>& methods,
                                                 double t0, double t1, double h,
                                                 int paths, std::uint64_t seed,
                                                 const StepperConfig& cfg,
                                                 int threads,
                                                 TemperatureAudit* audit) {
  const auto kBT_it = sys.params.find("kBT");
  if (kBT_it == sys.params.end())
    throw InvalidTemperature(sys.name + ": system declares no temperature (kBT)");
  const double kBT = kBT_it->second;
  if (!(kBT > 0.0))
    throw InvalidTemperature(sys.name + ": kBT must be positive");
  if (!sys.quadratic_stiffness)
    throw ConfigError(sys.name +
                      ": temperature study needs a quadratic stiffness for the "
                      "equilibrium ensemble");
  if (!(h > 0.0) || !(t1 > t0))
    throw ConfigError("temperature_study: need h > 0 and t1 > t0");
  const double span = t1 - t0;
  const std::int64_t steps = std::llround(span / h);
  if (steps < 2 || std::abs(double(steps) * h - span) > 1e-9 * span)
    throw ConfigError("temperature_study: h must divide the horizon");

  const int n = sys.dim;
  const int nch = int(sys.noise.size());
  const double target = 0.5 * double(n) * kBT;
  const double sqrt_kBT = std::sqrt(kBT);

  Eigen::LLT<MatX> stiff_llt(*sys.quadratic_stiffness);
  if (stiff_llt.info() != Eigen::Success)
    throw ConfigError(sys.name + ": quadratic stiffness is not positive definite");
  const MatX Lk = stiff_llt.matrixL();
  Eigen::LLT<MatX> mass_llt(sys.mass);
  const MatX Lm = mass_llt.matrixL();

  const auto initial_state = [&](std::int64_t m) {
    NormalStream rng(seed, std::uint64_t(m));
    VecX xi1(n), xi2(n);
    for (int i = 0; i < n; ++i) xi1[i] = rng.next();
    for (int i = 0; i < n; ++i) xi2[i] = rng.next();
    const VecX q = sqrt_kBT * Lk.transpose().triangularView<Eigen::Upper>().solve(xi1);
    const VecX p = sqrt_kBT * (Lm * xi2);
    return sys.state_from_qp(q, p);
  };

  std::vector<TemperatureSeries> out;
  if (audit) audit->per_method.assign(methods.size(), AuditLog{});

  for (size_t mi = 0; mi < methods.size(); ++mi) {
    const Method method = methods[mi];
    std::vector<std::vector<double>> kinetic(
        size_t(paths), std::vector<double>(size_t(steps + 1), 0.0));
    StepperConfig step_cfg = cfg;
    step_cfg.h = h;
    parallel_for(paths, threads, [&](std::int64_t m) {
      const PhaseState s0 = initial_state(m);
      CounterIncrements inc(mix_key(seed, 0x7E3F, std::uint64_t(m), 1), h, nch);
      AuditLog log;
      const Trajectory traj =
          run_trajectory(sys, method, s0, steps, inc, step_cfg,
                         (audit && m == 0) ? &log : nullptr);
      for (std::int64_t k = 0; k <= steps; ++k)
        kinetic[size_t(m)][size_t(k)] = sys.kinetic(traj.states[size_t(k)].p);
      if (audit && m == 0) audit->per_method[mi] = std::move(log);
    });

    TemperatureSeries series;
    series.method = method_name(method);
    series.target = target;
    series.times.resize(size_t(steps + 1));
    series.mean_kinetic.assign(size_t(steps + 1), 0.0);
    for (std::int64_t k = 0; k <= steps; ++k) {
      series.times[size_t(k)] = t0 + double(k) * h;
      double acc = 0.0;
      for (int m = 0; m < paths; ++m) acc += kinetic[size_t(m)][size_t(k)];
      series.mean_kinetic[size_t(k)] = acc / double(paths);
    }
    const double mid = 0.5 * (t0 + t1);
    std::vector<double> wt, wy;
    for (size_t k = 0; k < series.times.size(); ++k) {
      if (series.times[k] >= mid - 1e-12) {
        wt.push_back(series.times[k]);
        wy.push_back(series.mean_kinetic[k]);
      }
    }
    double acc = 0.0;
    for (double y : wy) acc += y;
    series.stat = acc / double(wy.size());
    series.trend = linear_trend(wt, wy).slope;
    out.push_back(std::move(series));
  }
  return out;
}

std::vector<double> energy_series(const MechSystem& sys, const Trajectory& traj) {
  std::vector<double> h;
  h.reserve(traj.states.size());
  for (const auto& s : traj.states) h.push_back(sys.hamiltonian(s.q, s.p));
  return h;
}

double check_gradients(const MechSystem& sys, const VecX& q, double fd_step) {
  double worst = 0.0;
  const auto check = [&](const std::function<double(const VecX&)>& f,
                         const VecX& grad) {
    for (int j = 0; j < sys.dim; ++j) {
      VecX qp = q, qm = q;
      qp[j] += fd_step;
      qm[j] -= fd_step;
      const double fd = (f(qp) - f(qm)) / (2.0 * fd_step);
      worst = std::max(worst, std::abs(fd - grad[j]));
    }
  };
  check(sys.potential, sys.grad_potential(q));
  for (const auto& np : sys.noise) check(np.value, np.grad(q));
  return worst;
}

double check_rigid_gradients(const RigidBodySystem& sys, const RigidState& at,
                             double fd_step) {
  double worst = 0.0;
  const auto check_body = [&](const std::function<double(const RigidState&)>& f,
                              int i, const Vec3& gx, const Vec3& gR) {
    for (int j = 0; j < 3; ++j) {
      RigidState sp = at, sm = at;
      sp[size_t(i)].x[j] += fd_step;
      sm[size_t(i)].x[j] -= fd_step;
      const double fd = (f(sp) - f(sm)) / (2.0 * fd_step);
      worst = std::max(worst, std::abs(fd - gx[j]));
    }
    for (int j = 0; j < 3; ++j) {
      Vec3 axis = Vec3::Zero();
      axis[j] = fd_step;
      RigidState sp = at, sm = at;
      sp[size_t(i)].R = Rotation{tau(Retraction::Exponential, axis).m * at[size_t(i)].R.m};
      sm[size_t(i)].R =
          Rotation{tau(Retraction::Exponential, Vec3(-axis)).m * at[size_t(i)].R.m};
      const double fd = (f(sp) - f(sm)) / (2.0 * fd_step);
      worst = std::max(worst, std::abs(fd - gR[j]));
    }
  };
  for (int i = 0; i < sys.count(); ++i) {
    check_body(sys.potential, i, sys.potential_x(i, at), sys.potential_R(i, at));
    for (const auto& np : sys.noise)
      check_body(np.value, i, np.grad_x(i, at), np.grad_R(i, at));
  }
  return worst;
}

} // namespace svint
