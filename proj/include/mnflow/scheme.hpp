#pragma once

#include <functional>
#include <string>
#include <utility>

#include "mnflow/field.hpp"
#include "mnflow/linstokes.hpp"
#include "mnflow/norms.hpp"

namespace mnflow {

struct SchemeConfig {
  double T_end = 2.0;
  double dt = 0.05;
  int max_picard = 8;
  double contraction_tol = 1e-3;
  std::string duhamel_rule = "trapezoid";
  double lambda1 = -1.0;  // <= 0 derives 2 max(1, |abscissa|)
  int checkpoint_every = 0;
  std::string checkpoint_dir;
};

// Fills the forcing pair (mass F, momentum G) at node idx / time t; called
// once per node in time order, so stateful closures may stream.
using SourceFn =
    std::function<void(std::size_t idx, double t, Scalar& F, Vec& G)>;

// Duhamel solve of  d/dt s = (A - lambda1) s + (F, G/rho*),  s(0) = s0,
// with the exact shifted propagator per step on the box (trapezoid rule in
// the integrand) and implicit trapezoid stepping on the shell.  dt_states
// hold the instantaneous right-hand side at each node.
TrajectoryRecord shifted_solve(const LinearOp& op, double lambda1,
                               const FieldState& s0, const SourceFn& source,
                               double T_end, double dt);

// Companion problem  d/dt s2 = A s2 + lambda1 s1(t),  s2(0) = 0; the sum
// s1 + s2 then solves the unshifted forced system.
TrajectoryRecord compensation_solve(const LinearOp& op, double lambda1,
                                    const TrajectoryRecord& shifted);

TrajectoryRecord sum_trajectories(const TrajectoryRecord& a,
                                  const TrajectoryRecord& b);
TrajectoryRecord diff_trajectories(const TrajectoryRecord& a,
                                   const TrajectoryRecord& b);

// Max over interior nodes of || centered-dt(states) - dt_states ||_{L2},
// relative to the dt_states scale; second-order small for a consistent
// trajectory.
double centered_residual(const TrajectoryRecord& traj, const DomainSpec& d);

struct PicardReport {
  int iterates = 0;
  std::vector<double> diff_energies;        // E_T of successive differences
  std::vector<double> contraction_factors;  // ratios of the above
  double initial_norm_total = 0.0;
  double final_residual = 0.0;  // centered residual against the full system
  EnergyReport final_energy;
  std::string verdict;  // converged | max-iterations | rejected-inadmissible
  bool converged = false;
};

// Fixed-point iteration on the transformed system: iterate 0 is the linear
// solution, each next iterate re-solves with forcing assembled from the
// previous one.  Initial data must satisfy the smallness gate
// initial_norm(s0).total <= epsilon^2.  An iterate whose own displacement
// violates the admissibility budget is rejected (reported, not thrown).
std::pair<TrajectoryRecord, PicardReport> picard_fixed_point(
    const LinearOp& op, const FieldState& s0, const SchemeConfig& cfg);

struct EulerReport {
  double lagrangian_residual = 0.0;
  double euler_mass_residual = 0.0;
  double euler_momentum_residual = 0.0;
  double euler_residual = 0.0;  // mass + momentum
  double chain_rule_residual = 0.0;
  double mass_drift = 0.0;  // relative drift of int (rho*+theta) dx
};

// Pull a Lagrangian trajectory back to the fixed frame and measure the
// original system's residuals there (centered time differences, spectral
// space derivatives), together with the transport chain-rule identity
// dt eta(y,t) = [dt theta + (v . grad) theta](x(y,t), t).
EulerReport euler_solution(const TrajectoryRecord& lag, const DomainSpec& d,
                           const ModelParams& params,
                           TrajectoryRecord* euler_out = nullptr);

}  // namespace mnflow
