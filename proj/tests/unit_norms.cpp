#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "mnflow/norms.hpp"
#include "test_util.hpp"

using namespace mnflow;
using namespace testutil;

TEST_CASE("lq norm of constants and single modes") {
  DomainSpec d = DomainSpec::box(2.0 * M_PI, 16);
  const double V = d.volume();

  Scalar c(d.points(), 2.5);
  CHECK(lq_norm(c, d, 1.0) == doctest::Approx(2.5 * V).epsilon(1e-12));
  CHECK(lq_norm(c, d, 2.0) ==
        doctest::Approx(2.5 * std::sqrt(V)).epsilon(1e-12));
  CHECK(lq_norm(c, d, kInf) == doctest::Approx(2.5).epsilon(1e-12));

  Scalar s = eval_box(d, [](double x, double, double) { return std::sin(x); });
  CHECK(lq_norm(s, d, 2.0) ==
        doctest::Approx(std::sqrt(V / 2.0)).epsilon(1e-12));

  CHECK_THROWS_AS(lq_norm(c, d, 0.5), std::invalid_argument);
}

TEST_CASE("norm scaling and triangle inequality") {
  DomainSpec d = DomainSpec::box(3.0, 16);
  std::mt19937_64 rng(5);
  Scalar f = random_smooth(d, rng, 1.0);
  Scalar g = random_smooth(d, rng, 1.0);
  for (double q : {1.0, 2.0, 2.1, 6.0}) {
    Scalar f3 = f;
    for (auto& x : f3) x *= -3.0;
    CHECK(lq_norm(f3, d, q) == doctest::Approx(3.0 * lq_norm(f, d, q)));
    Scalar sum = f;
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += g[i];
    CHECK(lq_norm(sum, d, q) <=
          lq_norm(f, d, q) + lq_norm(g, d, q) + 1e-12);
  }
}

TEST_CASE("lq interpolation (log-convexity) between 2 and 6") {
  // || f ||_{2+sigma} <= || f ||_2^{1-a} || f ||_6^a with the Hoelder
  // exponent a solving 1/(2+sigma) = (1-a)/2 + a/6.
  const double sigma = 0.1;
  const double a = 3.0 * sigma / (2.0 * (2.0 + sigma));
  DomainSpec d = DomainSpec::box(2.0 * M_PI, 16);
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    Scalar f = random_smooth(d, rng, 1.0 + trial);
    const double lhs = lq_norm(f, d, 2.0 + sigma);
    const double rhs = std::pow(lq_norm(f, d, 2.0), 1.0 - a) *
                       std::pow(lq_norm(f, d, 6.0), a);
    CHECK(lhs <= rhs * (1.0 + 1e-12));
  }
}

TEST_CASE("sobolev norms of a single mode") {
  DomainSpec d = DomainSpec::box(2.0 * M_PI, 32);
  Scalar f = eval_box(d, [](double x, double, double) { return std::sin(x); });
  const double m = std::sqrt(d.volume() / 2.0);  // L2 of sin, cos alike
  CHECK(sobolev_norm(f, d, 2.0, 0) == doctest::Approx(m).epsilon(1e-12));
  CHECK(sobolev_norm(f, d, 2.0, 1) == doctest::Approx(2 * m).epsilon(1e-12));
  CHECK(sobolev_norm(f, d, 2.0, 2) == doctest::Approx(3 * m).epsilon(1e-12));
}

TEST_CASE("weighted time norm") {
  // L2-in-time of e^{-t} over [0, 10]: sqrt((1 - e^{-20})/2), frozen
  std::vector<double> times(2001), values(2001);
  for (int i = 0; i <= 2000; ++i) {
    times[i] = 10.0 * i / 2000.0;
    values[i] = std::exp(-times[i]);
  }
  CHECK(std::abs(weighted_time_norm(times, values, 2.0, 0.0) -
                 7.07106780457819717e-01) < 1e-5);

  // sup norm picks up the weight <t>
  std::vector<double> t2 = {0.0, 3.0};
  std::vector<double> ones = {1.0, 1.0};
  CHECK(weighted_time_norm(t2, ones, kInf, 1.0) ==
        doctest::Approx(std::sqrt(10.0)).epsilon(1e-12));

  // a single sample carries no time measure
  CHECK(weighted_time_norm({1.0}, {5.0}, 2.0, 0.0) == 0.0);
  CHECK_THROWS_AS(weighted_time_norm({0.0, 1.0}, {1.0}, 2.0, 0.0),
                  std::invalid_argument);
}

namespace {

TrajectoryRecord small_traj(const DomainSpec& d, int nodes, double amp) {
  std::mt19937_64 rng(23);
  TrajectoryRecord traj;
  for (int k = 0; k < nodes; ++k) {
    traj.times.push_back(0.1 * k);
    FieldState s = random_state(d, rng, amp);
    s.time = 0.1 * k;
    traj.states.push_back(s);
    FieldState ds = random_state(d, rng, amp);
    ds.time = 0.1 * k;
    traj.dt_states.push_back(ds);
  }
  return traj;
}

}  // namespace

TEST_CASE("energy functional bookkeeping") {
  DomainSpec d = DomainSpec::box(2.0 * M_PI, 8);
  ModelParams p = default_params();

  TrajectoryRecord zero;
  for (int k = 0; k < 4; ++k) {
    zero.times.push_back(0.1 * k);
    zero.states.push_back(FieldState::zero(d, Frame::Lagrange, 0.1 * k));
    zero.dt_states.push_back(FieldState::zero(d, Frame::Lagrange, 0.1 * k));
  }
  EnergyReport zr = energy_ET(zero, d, p, 0.0);
  CHECK(zr.total == 0.0);
  CHECK(zr.small);
  for (const auto& c : zr.components) CHECK(c.value == 0.0);
  CHECK(zr.components.size() == 6);

  TrajectoryRecord traj = small_traj(d, 5, 1e-3);
  EnergyReport r = energy_ET(traj, d, p, 1.0);
  double sum = 0.0;
  for (const auto& c : r.components) {
    CHECK(c.value >= 0.0);
    sum += c.value;
  }
  CHECK(r.total == doctest::Approx(sum).epsilon(1e-15));

  // 1-homogeneous in the trajectory
  TrajectoryRecord twice = traj;
  for (auto* vec : {&twice.states, &twice.dt_states})
    for (auto& s : *vec) {
      for (auto& x : s.theta) x *= 2.0;
      for (auto& cvec : s.vel)
        for (auto& x : cvec) x *= 2.0;
    }
  EnergyReport r2 = energy_ET(twice, d, p, 1.0);
  CHECK(r2.total == doctest::Approx(2.0 * r.total).epsilon(1e-10));

  // monotone under window extension
  TrajectoryRecord prefix = traj;
  prefix.times.resize(3);
  prefix.states.resize(3);
  prefix.dt_states.resize(3);
  CHECK(energy_ET(prefix, d, p, 1.0).total <= r.total + 1e-14);
}

TEST_CASE("initial data norm") {
  DomainSpec d = DomainSpec::box(2.0 * M_PI, 16);
  ModelParams p = default_params();

  FieldState z = FieldState::zero(d);
  InitialDataNorm zn = initial_norm(z, d, p);
  CHECK(zn.total == 0.0);

  std::mt19937_64 rng(31);
  FieldState s = random_state(d, rng, 1e-2);
  InitialDataNorm n = initial_norm(s, d, p);
  CHECK(n.total > 0.0);
  double sum = 0.0;
  bool saw_theta = false, saw_besov = false, saw_pair = false;
  for (const auto& c : n.components) {
    sum += c.value;
    if (c.label.find("theta0") != std::string::npos) saw_theta = true;
    if (c.label.find("Besov") != std::string::npos) saw_besov = true;
    if (c.label.find("H10_r") != std::string::npos) saw_pair = true;
  }
  CHECK(n.total == doctest::Approx(sum).epsilon(1e-15));
  CHECK(saw_theta);
  CHECK(saw_besov);
  CHECK(saw_pair);
}

TEST_CASE("iterate strength is finite and 0 at 0") {
  DomainSpec d = DomainSpec::box(2.0 * M_PI, 8);
  ModelParams p = default_params();
  FieldState z = FieldState::zero(d);
  CHECK(iterate_strength(z, z, d, p) == 0.0);
  std::mt19937_64 rng(37);
  FieldState s = random_state(d, rng, 1e-2);
  FieldState ds = random_state(d, rng, 1e-2);
  double v = iterate_strength(s, ds, d, p);
  CHECK(v > 0.0);
  CHECK(std::isfinite(v));
}
