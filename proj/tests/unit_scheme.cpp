#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include "mnflow/scheme.hpp"
#include "test_util.hpp"

using namespace mnflow;
using namespace testutil;

namespace {

double max_state_diff(const FieldState& a, const FieldState& b) {
  double worst = 0.0;
  for (std::size_t p = 0; p < a.theta.size(); ++p)
    worst = std::max(worst, std::abs(a.theta[p] - b.theta[p]));
  for (std::size_t c = 0; c < a.vel.size(); ++c)
    for (std::size_t p = 0; p < a.vel[c].size(); ++p)
      worst = std::max(worst, std::abs(a.vel[c][p] - b.vel[c][p]));
  return worst;
}

double max_traj_diff(const TrajectoryRecord& a, const TrajectoryRecord& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    worst = std::max(worst, max_state_diff(a.states[k], b.states[k]));
  return worst;
}

}  // namespace

TEST_CASE("zero source reproduces the shifted semigroup at every node") {
  DomainSpec d = DomainSpec::box(2.0 * M_PI, 16);
  ModelParams p = default_params();
  LinearOp op(p, d);
  std::mt19937_64 rng(401);
  FieldState s0 = random_state(d, rng, 0.1);
  const double lam = 1.7;
  TrajectoryRecord traj = shifted_solve(op, lam, s0, nullptr, 0.5, 0.05);
  REQUIRE(traj.size() == 11);
  for (std::size_t k : {std::size_t(1), std::size_t(5), std::size_t(10)}) {
    FieldState ref = shifted_semigroup_apply(op, lam, traj.times[k], s0);
    CHECK(max_state_diff(traj.states[k], ref) < 1e-10);
  }
}

TEST_CASE("dt_states carry the shifted generator action") {
  DomainSpec d = DomainSpec::box(2.0 * M_PI, 8);
  ModelParams p = default_params();
  LinearOp op(p, d);
  std::mt19937_64 rng(402);
  FieldState s0 = random_state(d, rng, 0.1);
  const double lam = 2.0;
  TrajectoryRecord traj = shifted_solve(op, lam, s0, nullptr, 0.2, 0.05);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    FieldState want = op.apply(traj.states[k]);
    for (std::size_t q = 0; q < want.theta.size(); ++q)
      want.theta[q] -= lam * traj.states[k].theta[q];
    for (int c = 0; c < 3; ++c)
      for (std::size_t q = 0; q < want.vel[c].size(); ++q)
        want.vel[c][q] -= lam * traj.states[k].vel[c][q];
    CHECK(max_state_diff(traj.dt_states[k], want) < 1e-9);
  }
}

TEST_CASE("uniform forcing follows the zero-mode closed form") {
  DomainSpec d = DomainSpec::box(2.0 * M_PI, 8);
  ModelParams p = default_params();
  LinearOp op(p, d);
  FieldState s0 = FieldState::zero(d);
  const double c = 0.3, lam = 2.0, T = 0.5;
  SourceFn src = [&](std::size_t, double, Scalar& F, Vec&) {
    std::fill(F.begin(), F.end(), c);
  };
  auto err_at = [&](double dt) {
    TrajectoryRecord tr = shifted_solve(op, lam, s0, src, T, dt);
    const double want = (c / lam) * (1.0 - std::exp(-lam * T));
    double worst = 0.0;
    for (std::size_t q = 0; q < tr.states.back().theta.size(); ++q)
      worst = std::max(worst, std::abs(tr.states.back().theta[q] - want));
    for (int comp = 0; comp < 3; ++comp)
      for (double v : tr.states.back().vel[comp]) CHECK(v == 0.0);
    return worst;
  };
  double e1 = err_at(0.05);
  double e2 = err_at(0.025);
  CHECK(e1 > 0.0);
  CHECK(e1 / e2 > 3.5);
  CHECK(e1 / e2 < 4.5);
}

TEST_CASE("compensation layer removes the shift to second order") {
  DomainSpec d = DomainSpec::box(2.0 * M_PI, 8);
  ModelParams p = default_params();
  LinearOp op(p, d);
  std::mt19937_64 rng(404);
  FieldState s0 = random_state(d, rng, 0.05);
  Scalar f0 = random_smooth(d, rng, 0.1);
  Vec g0(3);
  for (int c = 0; c < 3; ++c) g0[c] = random_smooth(d, rng, 0.1);
  SourceFn src = [&](std::size_t, double t, Scalar& F, Vec& G) {
    for (std::size_t q = 0; q < F.size(); ++q) F[q] = f0[q] * std::cos(3 * t);
    for (int c = 0; c < 3; ++c)
      for (std::size_t q = 0; q < G[c].size(); ++q)
        G[c][q] = g0[c][q] * std::sin(2 * t);
  };
  const double lam = 2.0, T = 0.5;
  auto err_at = [&](double dt) {
    TrajectoryRecord direct = shifted_solve(op, 0.0, s0, src, T, dt);
    TrajectoryRecord s1 = shifted_solve(op, lam, s0, src, T, dt);
    TrajectoryRecord sum = sum_trajectories(s1, compensation_solve(op, lam, s1));
    return max_traj_diff(direct, sum);
  };
  double e1 = err_at(0.05);
  double e2 = err_at(0.025);
  CHECK(e1 < 0.05);
  CHECK(e1 / e2 > 3.0);
}

TEST_CASE("trajectory algebra guards the time grid") {
  DomainSpec d = DomainSpec::box(2.0 * M_PI, 8);
  ModelParams p = default_params();
  LinearOp op(p, d);
  std::mt19937_64 rng(405);
  FieldState s0 = random_state(d, rng, 0.1);
  TrajectoryRecord a = shifted_solve(op, 1.0, s0, nullptr, 0.2, 0.05);
  TrajectoryRecord b = shifted_solve(op, 1.0, s0, nullptr, 0.2, 0.1);
  CHECK_THROWS_AS(sum_trajectories(a, b), std::invalid_argument);
  CHECK_THROWS_AS(diff_trajectories(a, b), std::invalid_argument);

  TrajectoryRecord c = shifted_solve(op, 2.0, s0, nullptr, 0.2, 0.05);
  TrajectoryRecord back = diff_trajectories(sum_trajectories(a, c), c);
  CHECK(max_traj_diff(back, a) < 1e-12);
}

TEST_CASE("centered residual of an exact trajectory is second order") {
  DomainSpec d = DomainSpec::box(2.0 * M_PI, 8);
  ModelParams p = default_params();
  LinearOp op(p, d);
  std::mt19937_64 rng(406);
  FieldState s0 = random_state(d, rng, 0.1);
  TrajectoryRecord t1 = shifted_solve(op, 0.0, s0, nullptr, 0.4, 0.02);
  TrajectoryRecord t2 = shifted_solve(op, 0.0, s0, nullptr, 0.4, 0.01);
  double r1 = centered_residual(t1, d);
  double r2 = centered_residual(t2, d);
  CHECK(r1 > 0.0);
  CHECK(r1 / r2 > 3.0);
  CHECK(r1 / r2 < 5.0);

  TrajectoryRecord short_traj;
  short_traj.times = {0.0, 0.1};
  short_traj.states = {s0, s0};
  short_traj.dt_states = {s0, s0};
  CHECK_THROWS_AS(centered_residual(short_traj, d), std::invalid_argument);
}

TEST_CASE("invalid step configurations are rejected") {
  DomainSpec d = DomainSpec::box(2.0 * M_PI, 8);
  ModelParams p = default_params();
  LinearOp op(p, d);
  FieldState s0 = FieldState::zero(d);
  CHECK_THROWS_AS(shifted_solve(op, 1.0, s0, nullptr, 0.5, 0.15),
                  std::invalid_argument);
  CHECK_THROWS_AS(shifted_solve(op, 1.0, s0, nullptr, 0.5, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(shifted_solve(op, 1.0, s0, nullptr, 0.5, 0.0),
                  std::invalid_argument);
}

TEST_CASE("picard with zero data converges after one refinement") {
  DomainSpec d = DomainSpec::box(2.0 * M_PI, 8);
  ModelParams p = default_params();
  LinearOp op(p, d);
  SchemeConfig cfg;
  cfg.T_end = 0.2;
  cfg.dt = 0.05;
  auto [traj, rep] = picard_fixed_point(op, FieldState::zero(d), cfg);
  CHECK(rep.converged);
  CHECK(rep.verdict == "converged");
  CHECK(rep.iterates == 1);
  CHECK(rep.initial_norm_total == 0.0);
  CHECK(rep.final_residual == 0.0);
  CHECK(rep.final_energy.total == 0.0);
  REQUIRE(rep.diff_energies.size() == 1);
  CHECK(rep.diff_energies[0] == 0.0);
  CHECK(traj.size() == 5);
  CHECK(max_state_diff(traj.states.back(), FieldState::zero(d)) == 0.0);
}

TEST_CASE("smallness gate rejects data above epsilon^2") {
  DomainSpec d = DomainSpec::box(2.0 * M_PI, 8);
  ModelParams p = default_params();  // epsilon = 1e-3, gate 1e-6
  LinearOp op(p, d);
  std::mt19937_64 rng(408);
  FieldState s0 = random_state(d, rng, 0.5);
  SchemeConfig cfg;
  cfg.T_end = 0.2;
  cfg.dt = 0.05;
  try {
    picard_fixed_point(op, s0, cfg);
    FAIL("gate did not trigger");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("smallness gate") != std::string::npos);
  }
}

TEST_CASE("picard requires a periodic box") {
  DomainSpec d = DomainSpec::shell(1.0, 6.0, 40);
  ModelParams p = default_params();
  LinearOp op(p, d);
  SchemeConfig cfg;
  CHECK_THROWS_AS(picard_fixed_point(op, FieldState::zero(d), cfg),
                  std::runtime_error);
}

TEST_CASE("small data picard contracts and its residual is second order") {
  DomainSpec d = DomainSpec::box(2.0 * M_PI, 16);
  ModelParams p = default_params();
  p.epsilon = 0.05;  // gate 2.5e-3
  LinearOp op(p, d);
  std::mt19937_64 rng(410);
  FieldState s0 = random_state(d, rng, 3e-6);

  SchemeConfig cfg;
  cfg.T_end = 0.4;
  cfg.dt = 0.05;
  cfg.max_picard = 6;
  auto [traj, rep] = picard_fixed_point(op, s0, cfg);
  CHECK(rep.converged);
  CHECK(rep.iterates <= cfg.max_picard);
  for (double f : rep.contraction_factors) CHECK(f < 1.0);
  CHECK(std::isfinite(rep.final_residual));
  CHECK(rep.final_residual < 0.5);
  CHECK(traj.size() == 9);

  // quartering dt: second order predicts 1/16, first order 1/4; the
  // coarsest steps are pre-asymptotic, so measure from dt = 0.025 down
  SchemeConfig mid = cfg;
  mid.dt = 0.025;
  auto [traj2, rep2] = picard_fixed_point(op, s0, mid);
  CHECK(rep2.converged);
  SchemeConfig fine = cfg;
  fine.dt = 0.00625;
  auto [traj3, rep3] = picard_fixed_point(op, s0, fine);
  CHECK(rep3.converged);
  CHECK(rep3.final_residual / rep2.final_residual < 0.15);
}

TEST_CASE("euler frame measurement of a linear trajectory") {
  DomainSpec d = DomainSpec::box(2.0 * M_PI, 16);
  ModelParams p = default_params();
  LinearOp op(p, d);
  std::mt19937_64 rng(411);
  FieldState s0 = random_state(d, rng, 1e-4);
  TrajectoryRecord traj = shifted_solve(op, 0.0, s0, nullptr, 0.3, 0.05);
  TrajectoryRecord eul;
  EulerReport rep = euler_solution(traj, d, p, &eul);
  CHECK(std::isfinite(rep.lagrangian_residual));
  CHECK(std::isfinite(rep.euler_mass_residual));
  CHECK(std::isfinite(rep.euler_momentum_residual));
  CHECK(rep.euler_residual ==
        rep.euler_mass_residual + rep.euler_momentum_residual);
  CHECK(std::isfinite(rep.chain_rule_residual));
  CHECK(rep.mass_drift < 1e-5);
  REQUIRE(eul.size() == traj.size());
  for (const auto& s : eul.states) CHECK(s.frame == Frame::Euler);
  CHECK(eul.times == traj.times);
}

TEST_CASE("radial stepping matches the adaptive semigroup and guards energy") {
  DomainSpec d = DomainSpec::shell(1.0, 6.0, 60);
  ModelParams p = default_params();
  LinearOp op(p, d);
  FieldState s0 = FieldState::zero(d);
  for (std::size_t i = 0; i < d.points(); ++i) {
    const double r = d.radius(i);
    s0.theta[i] = std::exp(-2.0 * (r - 3.0) * (r - 3.0));
    s0.vel[0][i] = 0.05 * (r - 1.0) * (6.0 - r) * std::exp(-r);
  }
  s0.vel[0].front() = 0.0;
  s0.vel[0].back() = 0.0;

  const double lam = 1.0, T = 0.2, dt = 0.02;
  TrajectoryRecord traj = shifted_solve(op, lam, s0, nullptr, T, dt);
  REQUIRE(traj.size() == 11);
  FieldState ref = shifted_semigroup_apply(op, lam, T, s0);
  double scale = lq_norm_pair(ref, d, 2.0);
  FieldState diff = traj.states.back();
  for (std::size_t i = 0; i < d.points(); ++i) {
    diff.theta[i] -= ref.theta[i];
    diff.vel[0][i] -= ref.vel[0][i];
  }
  CHECK(lq_norm_pair(diff, d, 2.0) < 5e-3 * scale);

  TrajectoryRecord free_traj = shifted_solve(op, 0.0, s0, nullptr, T, dt);
  double prev_e = energy(op, free_traj.states[0]);
  for (std::size_t k = 1; k < free_traj.size(); ++k) {
    double e = energy(op, free_traj.states[k]);
    CHECK(e <= prev_e * (1.0 + 1e-8));
    prev_e = e;
  }
  for (const auto& ds : free_traj.dt_states)
    for (double v : ds.theta) CHECK(std::isfinite(v));
}
