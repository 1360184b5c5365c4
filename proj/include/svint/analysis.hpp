#pragma once

#include <vector>

#include "svint/integrators.hpp"

namespace svint {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

LinearFit linear_trend(const std::vector<double>& t, const std::vector<double>& y);

struct SymplecticityReport {
  int samples = 0;
  double max_defect = 0.0;
  double fd_step = 0.0;
};

// Frobenius norm of DF^T J DF - J for the one-step map with frozen noise
// increments, maximized over random (state, increment) pairs; Jacobian by
// central differences in all phase directions.
SymplecticityReport check_symplectic(const MechSystem& sys, Method method,
                                     int n_samples, double fd_step,
                                     std::uint64_t seed, const StepperConfig& cfg);

// Max drift of the conserved pairing <p, direction> along a trajectory. The
// generator must be declared on the system.
double check_momentum(const MechSystem& sys, const TranslationSymmetry& generator,
                      const Trajectory& traj);
double check_momentum(const MechSystem& sys, const Trajectory& traj);
double check_momentum(const RigidBodySystem& sys, const RigidTrajectory& traj);

struct ConvergenceReport {
  std::vector<int> levels;
  std::vector<double> step_sizes;
  std::vector<double> ms_errors; // sqrt(E ||X_h(T) - X_ref(T)||^2) per level
  double fitted_slope = 0.0;
  double intercept = 0.0;
  int paths = 0;
  bool exact = false;
};

// Strong-order estimate against a fine reference on shared Brownian paths:
// endpoint root-mean-square error per level, least-squares slope in
// log2-log2. When every level sits at the roundoff floor the fit is skipped
// and the report is flagged exact.
ConvergenceReport estimate_strong_order(const MechSystem& sys, Method method,
                                        const PhaseState& initial, double t0,
                                        double t1, int level_lo, int level_hi,
                                        int ref_level, int paths,
                                        std::uint64_t seed,
                                        const StepperConfig& cfg, int threads = 1);

struct TemperatureSeries {
  std::string method;
  std::vector<double> times;
  std::vector<double> mean_kinetic;
  double target = 0.0;
  double stat = 0.0;  // time average of mean_kinetic over the second half
  double trend = 0.0; // least-squares slope over the second half
};

struct TemperatureAudit {
  std::vector<AuditLog> per_method;
};

// Equilibrium kinetic-energy study: Gibbs ensemble at the system's declared
// temperature (params at "kBT"), every method consuming identical increments
// per ensemble member. Target is dof*kBT/2. If audit is non-null the
// increments consumed for the first ensemble member are recorded per method.
std::vector<TemperatureSeries> temperature_study(const MechSystem& sys,
                                                 const std::vector<Method>& methods,
                                                 double t0, double t1, double h,
                                                 int paths, std::uint64_t seed,
                                                 const StepperConfig& cfg,
                                                 int threads = 1,
                                                 TemperatureAudit* audit = nullptr);

std::vector<double> energy_series(const MechSystem& sys, const Trajectory& traj);

// Max absolute error of analytic gradients against central differences, over
// the potential and every noise channel.
double check_gradients(const MechSystem& sys, const VecX& q, double fd_step = 1e-6);
double check_rigid_gradients(const RigidBodySystem& sys, const RigidState& at,
                             double fd_step = 1e-6);

} // namespace svint
