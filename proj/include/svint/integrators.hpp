#pragma once

#include <optional>
#include <vector>

#include "svint/noise.hpp"
#include "svint/systems.hpp"

namespace svint {

struct StepperConfig {
  double h = 0.01;
  Retraction retraction = Retraction::Exponential;
  double newton_tol = 1e-12;
  int newton_max_iter = 25;
  double constraint_tol = 1e-10;
};

enum class Method { Svi, Eem, Iem };

Method method_from_string(const std::string& name);
std::string method_name(Method m);

// Per-step Brownian increments, one value per channel per step.
class IncrementSource {
 public:
  virtual ~IncrementSource() = default;
  virtual int channels() const = 0;
  virtual double increment(std::int64_t step, int channel) const = 0;
  VecX step_increments(std::int64_t step, int n_channels) const;
};

// Independent N(0, h) increments keyed by (seed, step, channel); supports
// arbitrary step counts.
class CounterIncrements final : public IncrementSource {
 public:
  CounterIncrements(std::uint64_t seed, double h, int channels);
  int channels() const override { return channels_; }
  double increment(std::int64_t step, int channel) const override;

 private:
  std::uint64_t seed_;
  double sqrt_h_;
  int channels_;
};

// Increments read from a sampled Brownian path (for coupled refinement
// studies). The path's step count bounds the usable range.
class PathIncrements final : public IncrementSource {
 public:
  explicit PathIncrements(const BrownianPath& path) : path_(&path) {}
  int channels() const override { return path_->channels; }
  double increment(std::int64_t step, int channel) const override;

 private:
  const BrownianPath* path_;
};

// Zero channels, for deterministic runs through the stochastic interface.
class NoIncrements final : public IncrementSource {
 public:
  int channels() const override { return 0; }
  double increment(std::int64_t, int) const override { return 0.0; }
};

// Increments consumed by a run, recorded for cross-method comparisons.
struct AuditLog {
  std::vector<VecX> increments;
};

// ---- single steps -----------------------------------------------------------

// Variational momentum update from gradients at the current configuration,
// then the position update with the new velocity.
PhaseState svi_step_rn(const MechSystem& sys, const PhaseState& s, const VecX& B,
                       const StepperConfig& cfg);

// Deterministic variational Euler, written independently of the stochastic
// stepper for cross-checks.
PhaseState det_ve_step_rn(const MechSystem& sys, const PhaseState& s,
                          const StepperConfig& cfg);

// Explicit Euler-Maruyama: drift at the old state.
PhaseState em_explicit_step(const MechSystem& sys, const PhaseState& s,
                            const VecX& B, const StepperConfig& cfg);

// Drift-implicit Euler-Maruyama: drift at the new state, noise at the old
// configuration.
PhaseState em_implicit_step(const MechSystem& sys, const PhaseState& s,
                            const VecX& B, const StepperConfig& cfg);

struct ConstrainedStep {
  PhaseState state;
  VecX lambda;
};

ConstrainedStep svi_step_constrained(const MechSystem& sys, const PhaseState& s,
                                     const VecX& B, const StepperConfig& cfg);
ConstrainedStep det_ve_step_constrained(const MechSystem& sys, const PhaseState& s,
                                        const StepperConfig& cfg);

LieState svi_step_lie(const LieSystem& sys, const LieState& s, const VecX& B,
                      const StepperConfig& cfg);
LieState det_ve_step_lie(const LieSystem& sys, const LieState& s,
                         const StepperConfig& cfg);

RigidState svi_step_rigid_bodies(const RigidBodySystem& sys, const RigidState& s,
                                 const VecX& B, const StepperConfig& cfg);
RigidState det_ve_step_rigid_bodies(const RigidBodySystem& sys, const RigidState& s,
                                    const StepperConfig& cfg);

// ---- trajectories -----------------------------------------------------------

struct Trajectory {
  std::vector<double> times;
  std::vector<PhaseState> states;
};

struct ConstrainedTrajectory {
  std::vector<double> times;
  std::vector<PhaseState> states;
  std::vector<VecX> lambdas;
};

struct LieTrajectory {
  std::vector<double> times;
  std::vector<LieState> states;
};

struct RigidTrajectory {
  std::vector<double> times;
  std::vector<RigidState> states;
};

Trajectory run_trajectory(const MechSystem& sys, Method method,
                          const PhaseState& initial, std::int64_t steps,
                          const IncrementSource& noise, const StepperConfig& cfg,
                          AuditLog* audit = nullptr);

ConstrainedTrajectory run_constrained_trajectory(const MechSystem& sys,
                                                 const PhaseState& initial,
                                                 std::int64_t steps,
                                                 const IncrementSource& noise,
                                                 const StepperConfig& cfg);

LieTrajectory run_lie_trajectory(const LieSystem& sys, const LieState& initial,
                                 std::int64_t steps, const IncrementSource& noise,
                                 const StepperConfig& cfg);

RigidTrajectory run_rigid_trajectory(const RigidBodySystem& sys,
                                     const RigidState& initial, std::int64_t steps,
                                     const IncrementSource& noise,
                                     const StepperConfig& cfg,
                                     AuditLog* audit = nullptr);

// High-accuracy pathwise baseline on the fine dyadic grid: the given path is
// refined to levels_ref and integrated with a trapezoidal-drift, left-point
// noise scheme. Rejects constrained systems.
Trajectory reference_solve(const MechSystem& sys, const PhaseState& initial,
                           const BrownianPath& path, int levels_ref);

RigidTrajectory reference_solve_rigid(const RigidBodySystem& sys,
                                      const RigidState& initial,
                                      const BrownianPath& path, int levels_ref);

} // namespace svint
