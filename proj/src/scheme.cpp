#include "mnflow/scheme.hpp"

#include <cmath>
#include <cstdio>
#include <memory>

#include "mnflow/lagrangian.hpp"
#include "mnflow/nonlinear.hpp"
#include "mnflow/operators.hpp"
#include "mnflow/serialize.hpp"

namespace mnflow {

namespace {

std::size_t step_count(double T_end, double dt) {
  if (!(dt > 0.0) || !(T_end > 0.0))
    throw std::invalid_argument("scheme: T_end and dt must be positive");
  double k = T_end / dt;
  auto K = static_cast<std::size_t>(std::llround(k));
  if (K < 2 || std::abs(K * dt - T_end) > 1e-9 * T_end)
    throw std::invalid_argument("scheme: dt must divide T_end");
  return K;
}

// rhs state (F, G/rho*) as a field pair
FieldState make_source_state(const Scalar& F, const Vec& G, double rho,
                             Frame frame, double t) {
  FieldState s;
  s.theta = F;
  s.vel.resize(G.size());
  for (std::size_t c = 0; c < G.size(); ++c) {
    s.vel[c].resize(G[c].size());
    for (std::size_t p = 0; p < G[c].size(); ++p)
      s.vel[c][p] = G[c][p] / rho;
  }
  s.frame = frame;
  s.time = t;
  return s;
}

}  // namespace

TrajectoryRecord shifted_solve(const LinearOp& op, double lambda1,
                               const FieldState& s0, const SourceFn& source,
                               double T_end, double dt) {
  const DomainSpec& d = op.domain();
  const ModelParams& mp = op.params();
  s0.check_shape(d);
  const std::size_t K = step_count(T_end, dt);
  const std::size_t np = d.points();

  TrajectoryRecord out;
  out.times.resize(K + 1);
  out.states.reserve(K + 1);
  out.dt_states.reserve(K + 1);

  Scalar F(np, 0.0);
  Vec G(d.vel_comps(), Scalar(np, 0.0));
  auto pull_source = [&](std::size_t k, double t) {
    std::fill(F.begin(), F.end(), 0.0);
    for (auto& c : G) std::fill(c.begin(), c.end(), 0.0);
    if (source) source(k, t, F, G);
  };

  if (d.kind == DomainKind::PeriodicBox) {
    const auto& tf = transform_for(d);
    const std::size_t nm = tf.nmodes();
    Spec th = tf.forward(s0.theta);
    std::array<Spec, 3> v = {tf.forward(s0.vel[0]), tf.forward(s0.vel[1]),
                             tf.forward(s0.vel[2])};
    std::array<Spec, 4> rhat;  // F and G/rho in spectral space
    BoxPropagator prop(mp, d, dt, lambda1);

    auto load_source_hat = [&](std::size_t k, double t) {
      pull_source(k, t);
      rhat[0] = tf.forward(F);
      Scalar tmp(np);
      for (int c = 0; c < 3; ++c) {
        for (std::size_t p = 0; p < np; ++p) tmp[p] = G[c][p] / mp.rho_star;
        rhat[c + 1] = tf.forward(tmp);
      }
    };

    auto record_node = [&](std::size_t k, double t) {
      FieldState s = FieldState::zero(d, Frame::Lagrange, t);
      s.theta = tf.backward(th);
      for (int c = 0; c < 3; ++c) s.vel[c] = tf.backward(v[c]);
      FieldState ds = FieldState::zero(d, Frame::Lagrange, t);
      Spec dth(nm);
      std::array<Spec, 3> dv;
      for (auto& c : dv) c.resize(nm);
      for (std::size_t m = 0; m < nm; ++m) {
        std::array<double, 3> xi = {tf.xi(0, m), tf.xi(1, m), tf.xi(2, m)};
        std::array<Cplx, 3> vm = {v[0][m], v[1][m], v[2][m]};
        Cplx dthm;
        std::array<Cplx, 3> dvm;
        generator_mode(mp, xi, th[m], vm, dthm, dvm);
        dth[m] = dthm - lambda1 * th[m] + rhat[0][m];
        for (int c = 0; c < 3; ++c)
          dv[c][m] = dvm[c] - lambda1 * v[c][m] + rhat[c + 1][m];
      }
      ds.theta = tf.backward(dth);
      for (int c = 0; c < 3; ++c) ds.vel[c] = tf.backward(dv[c]);
      out.times[k] = t;
      out.states.push_back(std::move(s));
      out.dt_states.push_back(std::move(ds));
    };

    load_source_hat(0, 0.0);
    record_node(0, 0.0);
    for (std::size_t k = 1; k <= K; ++k) {
      const double t = k * dt;
      // s <- Phi (s + dt/2 r_{k-1}) + dt/2 r_k
      for (std::size_t m = 0; m < nm; ++m) {
        th[m] += 0.5 * dt * rhat[0][m];
        for (int c = 0; c < 3; ++c) v[c][m] += 0.5 * dt * rhat[c + 1][m];
      }
      prop.apply(th, v[0], v[1], v[2]);
      load_source_hat(k, t);
      for (std::size_t m = 0; m < nm; ++m) {
        th[m] += 0.5 * dt * rhat[0][m];
        for (int c = 0; c < 3; ++c) v[c][m] += 0.5 * dt * rhat[c + 1][m];
      }
      record_node(k, t);
    }
    return out;
  }

  // radial: implicit trapezoid with the shift folded into the step
  FieldState s = s0;
  s.time = 0.0;
  pull_source(0, 0.0);
  FieldState f_prev = make_source_state(F, G, mp.rho_star, s0.frame, 0.0);
  auto rhs_state = [&](const FieldState& st, const FieldState& fsrc) {
    FieldState ds = op.apply(st);
    for (std::size_t p = 0; p < np; ++p) {
      ds.theta[p] += -lambda1 * st.theta[p] + fsrc.theta[p];
      ds.vel[0][p] += -lambda1 * st.vel[0][p] + fsrc.vel[0][p];
    }
    return ds;
  };
  out.times[0] = 0.0;
  out.states.push_back(s);
  out.dt_states.push_back(rhs_state(s, f_prev));
  for (std::size_t k = 1; k <= K; ++k) {
    const double t = k * dt;
    pull_source(k, t);
    FieldState f_now = make_source_state(F, G, mp.rho_star, s0.frame, t);
    s = op.cn_step(lambda1, dt, s, &f_prev, &f_now);
    out.times[k] = t;
    out.states.push_back(s);
    out.dt_states.push_back(rhs_state(s, f_now));
    f_prev = std::move(f_now);
  }
  return out;
}

TrajectoryRecord compensation_solve(const LinearOp& op, double lambda1,
                                    const TrajectoryRecord& shifted) {
  const DomainSpec& d = op.domain();
  shifted.check_shape(d);
  if (shifted.size() < 2)
    throw std::invalid_argument("compensation_solve: trajectory too short");
  const double dt = shifted.times[1] - shifted.times[0];
  const double T = shifted.times.back();
  const double rho = op.params().rho_star;
  FieldState zero = FieldState::zero(d, shifted.states[0].frame, 0.0);
  // forcing lambda1 s1 enters the (F, G) slots, so G picks up rho*
  SourceFn src = [&](std::size_t k, double, Scalar& F, Vec& G) {
    const FieldState& s1 = shifted.states[k];
    for (std::size_t p = 0; p < F.size(); ++p)
      F[p] = lambda1 * s1.theta[p];
    for (std::size_t c = 0; c < G.size(); ++c)
      for (std::size_t p = 0; p < G[c].size(); ++p)
        G[c][p] = lambda1 * rho * s1.vel[c][p];
  };
  return shifted_solve(op, 0.0, zero, src, T, dt);
}

TrajectoryRecord sum_trajectories(const TrajectoryRecord& a,
                                  const TrajectoryRecord& b) {
  if (a.times != b.times)
    throw std::invalid_argument("sum_trajectories: time grids differ");
  TrajectoryRecord out = a;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t p = 0; p < out.states[i].theta.size(); ++p)
      out.states[i].theta[p] += b.states[i].theta[p];
    for (std::size_t c = 0; c < out.states[i].vel.size(); ++c)
      for (std::size_t p = 0; p < out.states[i].vel[c].size(); ++p)
        out.states[i].vel[c][p] += b.states[i].vel[c][p];
    if (!out.dt_states.empty() && !b.dt_states.empty()) {
      for (std::size_t p = 0; p < out.dt_states[i].theta.size(); ++p)
        out.dt_states[i].theta[p] += b.dt_states[i].theta[p];
      for (std::size_t c = 0; c < out.dt_states[i].vel.size(); ++c)
        for (std::size_t p = 0; p < out.dt_states[i].vel[c].size(); ++p)
          out.dt_states[i].vel[c][p] += b.dt_states[i].vel[c][p];
    }
  }
  return out;
}

TrajectoryRecord diff_trajectories(const TrajectoryRecord& a,
                                   const TrajectoryRecord& b) {
  if (a.times != b.times)
    throw std::invalid_argument("diff_trajectories: time grids differ");
  TrajectoryRecord out = a;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t p = 0; p < out.states[i].theta.size(); ++p)
      out.states[i].theta[p] -= b.states[i].theta[p];
    for (std::size_t c = 0; c < out.states[i].vel.size(); ++c)
      for (std::size_t p = 0; p < out.states[i].vel[c].size(); ++p)
        out.states[i].vel[c][p] -= b.states[i].vel[c][p];
    if (!out.dt_states.empty() && !b.dt_states.empty()) {
      for (std::size_t p = 0; p < out.dt_states[i].theta.size(); ++p)
        out.dt_states[i].theta[p] -= b.dt_states[i].theta[p];
      for (std::size_t c = 0; c < out.dt_states[i].vel.size(); ++c)
        for (std::size_t p = 0; p < out.dt_states[i].vel[c].size(); ++p)
          out.dt_states[i].vel[c][p] -= b.dt_states[i].vel[c][p];
    }
  }
  return out;
}

double centered_residual(const TrajectoryRecord& traj, const DomainSpec& d) {
  traj.check_shape(d);
  if (traj.size() < 3 || traj.dt_states.empty())
    throw std::invalid_argument("centered_residual: need dt_states, >=3 nodes");
  double scale = 0.0;
  for (const auto& ds : traj.dt_states)
    scale = std::max(scale, lq_norm_pair(ds, d, 2.0));
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < traj.size(); ++k) {
    const double two_dt = traj.times[k + 1] - traj.times[k - 1];
    FieldState r = traj.states[k + 1];
    for (std::size_t p = 0; p < r.theta.size(); ++p)
      r.theta[p] = (r.theta[p] - traj.states[k - 1].theta[p]) / two_dt -
                   traj.dt_states[k].theta[p];
    for (std::size_t c = 0; c < r.vel.size(); ++c)
      for (std::size_t p = 0; p < r.vel[c].size(); ++p)
        r.vel[c][p] =
            (r.vel[c][p] - traj.states[k - 1].vel[c][p]) / two_dt -
            traj.dt_states[k].vel[c][p];
    worst = std::max(worst, lq_norm_pair(r, d, 2.0));
  }
  return worst / std::max(scale, 1e-30);
}

namespace {

// One full fixed-point sweep: the shifted solve driven by the previous
// iterate's forcing (streamed), plus the compensation layer.
TrajectoryRecord solve_sweep(const LinearOp& op, double lambda1,
                             const FieldState& s0, const SchemeConfig& cfg,
                             const TrajectoryRecord* prev) {
  const DomainSpec& d = op.domain();
  const ModelParams& mp = op.params();
  std::unique_ptr<DisplacementAccumulator> acc;
  if (prev)
    acc = std::make_unique<DisplacementAccumulator>(d, mp, true);
  SourceFn src = nullptr;
  if (prev) {
    src = [&op, prev, &acc](std::size_t k, double, Scalar& F, Vec& G) {
      acc->push(prev->states[k]);
      auto nl = assemble_nonlinear(prev->states[k], prev->dt_states[k],
                                   acc->current(), op.params());
      F = std::move(nl.F);
      G = std::move(nl.G);
    };
  }
  auto t1 = shifted_solve(op, lambda1, s0, src, cfg.T_end, cfg.dt);
  auto t2 = compensation_solve(op, lambda1, t1);
  return sum_trajectories(t1, t2);
}

// Residual of the full transformed system on a trajectory, with the forcing
// rebuilt from the trajectory itself.
double self_residual(const LinearOp& op, const TrajectoryRecord& traj) {
  const DomainSpec& d = op.domain();
  const ModelParams& mp = op.params();
  DisplacementAccumulator acc(d, mp, true);
  TrajectoryRecord check = traj;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    acc.push(traj.states[k]);
    auto nl = assemble_nonlinear(traj.states[k], traj.dt_states[k],
                                 acc.current(), mp);
    FieldState rhs = op.apply(traj.states[k]);
    for (std::size_t p = 0; p < rhs.theta.size(); ++p)
      rhs.theta[p] += nl.F[p];
    for (int c = 0; c < 3; ++c)
      for (std::size_t p = 0; p < rhs.vel[c].size(); ++p)
        rhs.vel[c][p] += nl.G[c][p] / mp.rho_star;
    check.dt_states[k] = std::move(rhs);
  }
  return centered_residual(check, d);
}

}  // namespace

std::pair<TrajectoryRecord, PicardReport> picard_fixed_point(
    const LinearOp& op, const FieldState& s0, const SchemeConfig& cfg) {
  const DomainSpec& d = op.domain();
  const ModelParams& mp = op.params();
  s0.check_shape(d);
  if (d.kind != DomainKind::PeriodicBox)
    throw std::runtime_error("nonlinear terms require a periodic-box domain");

  PicardReport rep;
  InitialDataNorm I0 = initial_norm(s0, d, mp);
  rep.initial_norm_total = I0.total;
  if (I0.total > mp.epsilon * mp.epsilon)
    throw std::invalid_argument(
        "picard: initial data norm " + std::to_string(I0.total) +
        " exceeds the smallness gate epsilon^2 = " +
        std::to_string(mp.epsilon * mp.epsilon));

  const double lambda1 =
      cfg.lambda1 > 0.0 ? cfg.lambda1 : default_lambda1(op);

  TrajectoryRecord prev = solve_sweep(op, lambda1, s0, cfg, nullptr);
  rep.iterates = 0;
  rep.verdict = "max-iterations";

  for (int m = 1; m <= cfg.max_picard; ++m) {
    TrajectoryRecord next;
    try {
      next = solve_sweep(op, lambda1, s0, cfg, &prev);
      accumulate_displacement(next, d, mp);  // admissibility of the new sweep
    } catch (const AdmissibilityError& e) {
      rep.verdict = std::string("rejected-inadmissible: ") + e.what();
      rep.converged = false;
      break;
    }
    rep.iterates = m;
    TrajectoryRecord diff = diff_trajectories(next, prev);
    double dE = energy_ET(diff, d, mp, 1.0).total;
    rep.diff_energies.push_back(dE);
    if (rep.diff_energies.size() >= 2) {
      double prev_dE = rep.diff_energies[rep.diff_energies.size() - 2];
      rep.contraction_factors.push_back(prev_dE > 0.0 ? dE / prev_dE : 0.0);
    }
    prev = std::move(next);
    if (dE <= cfg.contraction_tol * rep.diff_energies.front()) {
      rep.verdict = "converged";
      rep.converged = true;
      break;
    }
  }

  rep.final_residual = self_residual(op, prev);
  rep.final_energy =
      energy_ET(prev, d, mp, 10.0 * std::sqrt(rep.initial_norm_total));

  if (cfg.checkpoint_every > 0 && !cfg.checkpoint_dir.empty()) {
    for (std::size_t k = 0; k < prev.size();
         k += static_cast<std::size_t>(cfg.checkpoint_every)) {
      char name[64];
      std::snprintf(name, sizeof(name), "/state_%05zu.bin", k);
      write_state_bin(cfg.checkpoint_dir + name, prev.states[k], d);
    }
  }
  return {std::move(prev), std::move(rep)};
}

EulerReport euler_solution(const TrajectoryRecord& lag, const DomainSpec& d,
                           const ModelParams& params,
                           TrajectoryRecord* euler_out) {
  lag.check_shape(d);
  if (d.kind != DomainKind::PeriodicBox)
    throw std::runtime_error("euler_solution: periodic-box domain required");
  if (lag.size() < 3 || lag.dt_states.empty())
    throw std::invalid_argument("euler_solution: need dt_states, >=3 nodes");

  const std::size_t K = lag.size();
  const std::size_t np = d.points();
  const double rho = params.rho_star;

  DisplacementAccumulator acc(d, params, false);
  std::vector<FieldState> eul(K);
  std::vector<Vec> disp(K);
  std::vector<double> mass(K);
  for (std::size_t k = 0; k < K; ++k) {
    acc.push(lag.states[k]);
    const DisplacementField& f = acc.current();
    eul[k] = pullback_to_euler(lag.states[k], f);
    disp[k] = f.disp;
    double m = 0.0;
    for (std::size_t p = 0; p < np; ++p)
      m += (rho + lag.states[k].theta[p]) * f.jac[p];
    mass[k] = m * std::pow(d.spacing(), 3);
  }

  EulerReport rep;
  rep.lagrangian_residual = 0.0;
  // absolute residuals so the two frames compare on the same scale
  for (std::size_t k = 1; k + 1 < K; ++k) {
    const double two_dt = lag.times[k + 1] - lag.times[k - 1];
    FieldState r = lag.states[k + 1];
    for (std::size_t p = 0; p < np; ++p)
      r.theta[p] = (r.theta[p] - lag.states[k - 1].theta[p]) / two_dt -
                   lag.dt_states[k].theta[p];
    for (int c = 0; c < 3; ++c)
      for (std::size_t p = 0; p < np; ++p)
        r.vel[c][p] = (r.vel[c][p] - lag.states[k - 1].vel[c][p]) / two_dt -
                      lag.dt_states[k].vel[c][p];
    rep.lagrangian_residual =
        std::max(rep.lagrangian_residual, lq_norm_pair(r, d, 2.0));
  }

  double mass_res = 0.0, mom_res = 0.0, chain_res = 0.0;
  for (std::size_t k = 1; k + 1 < K; ++k) {
    const double two_dt = lag.times[k + 1] - lag.times[k - 1];
    const FieldState& e = eul[k];

    // continuity: dt theta + div((rho+theta) v)
    Vec flux(3, Scalar(np));
    for (int c = 0; c < 3; ++c)
      for (std::size_t p = 0; p < np; ++p)
        flux[c][p] = (rho + e.theta[p]) * e.vel[c][p];
    Scalar divflux = divergence(flux, d);
    Scalar rm(np);
    for (std::size_t p = 0; p < np; ++p)
      rm[p] = (eul[k + 1].theta[p] - eul[k - 1].theta[p]) / two_dt +
              divflux[p];
    mass_res = std::max(mass_res, lq_norm(rm, d, 2.0));

    // momentum: (rho+theta)(dt v + (v.grad) v) - mu lap v
    //           - (mu+nu) grad div v + grad P(rho+theta)
    Mat gv = grad_mat(e.vel, d);
    Scalar dv = divergence(e.vel, d);
    Vec gdiv = grad(dv, d);
    Scalar pfield(np);
    for (std::size_t p = 0; p < np; ++p)
      pfield[p] = params.pressure.value(rho + e.theta[p]);
    Vec gp = grad(pfield, d);
    Vec rv(3, Scalar(np));
    for (int j = 0; j < 3; ++j) {
      Scalar lap = laplace(e.vel[j], d);
      for (std::size_t p = 0; p < np; ++p) {
        double adv = 0.0;
        for (int i = 0; i < 3; ++i) adv += e.vel[i][p] * gv[i * 3 + j][p];
        double dtv = (eul[k + 1].vel[j][p] - eul[k - 1].vel[j][p]) / two_dt;
        rv[j][p] = (rho + e.theta[p]) * (dtv + adv) - params.mu * lap[p] -
                   (params.mu + params.nu) * gdiv[j][p] + gp[j][p];
      }
    }
    mom_res = std::max(mom_res, lq_norm(rv, d, 2.0));

    // transport identity dt eta(y) = [dt theta + (v.grad) theta](x(y))
    Vec gth = grad(e.theta, d);
    Scalar w(np);
    for (std::size_t p = 0; p < np; ++p) {
      double adv = 0.0;
      for (int i = 0; i < 3; ++i) adv += e.vel[i][p] * gth[i][p];
      w[p] = (eul[k + 1].theta[p] - eul[k - 1].theta[p]) / two_dt + adv;
    }
    const int n = d.n;
    const double h = d.spacing();
    Scalar rc(np);
    for (int ix = 0; ix < n; ++ix)
      for (int iy = 0; iy < n; ++iy)
        for (int iz = 0; iz < n; ++iz) {
          std::size_t p = (static_cast<std::size_t>(ix) * n + iy) * n + iz;
          double x0 = ix * h + disp[k][0][p];
          double x1 = iy * h + disp[k][1][p];
          double x2 = iz * h + disp[k][2][p];
          double rhs = interp_box(w, d, x0, x1, x2);
          double lhs = (lag.states[k + 1].theta[p] -
                        lag.states[k - 1].theta[p]) /
                       two_dt;
          rc[p] = lhs - rhs;
        }
    chain_res = std::max(chain_res, lq_norm(rc, d, 2.0));
  }

  rep.euler_mass_residual = mass_res;
  rep.euler_momentum_residual = mom_res;
  rep.euler_residual = mass_res + mom_res;
  rep.chain_rule_residual = chain_res;
  double drift = 0.0;
  for (std::size_t k = 0; k < K; ++k)
    drift = std::max(drift, std::abs(mass[k] - mass[0]));
  rep.mass_drift = drift / std::abs(mass[0]);

  if (euler_out) {
    euler_out->times = lag.times;
    euler_out->states = std::move(eul);
    euler_out->dt_states.clear();
  }
  return rep;
}

}  // namespace mnflow
