#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <complex>
#include <random>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "mnflow/linstokes.hpp"
#include "mnflow/norms.hpp"
#include "mnflow/operators.hpp"
#include "test_util.hpp"

using namespace mnflow;
using namespace testutil;

namespace {

// 2x2 longitudinal block as complex entries for composition checks
struct Block {
  Cplx e00, e01, e10, e11;
};

Block as_block(const ModePropagator& m) {
  return {Cplx(m.e00, 0.0), Cplx(0.0, m.s01), Cplx(0.0, m.s10),
          Cplx(m.e11, 0.0)};
}

Block mul(const Block& a, const Block& b) {
  return {a.e00 * b.e00 + a.e01 * b.e10, a.e00 * b.e01 + a.e01 * b.e11,
          a.e10 * b.e00 + a.e11 * b.e10, a.e10 * b.e01 + a.e11 * b.e11};
}

double block_dist(const Block& a, const Block& b) {
  return std::max(
      std::max(std::abs(a.e00 - b.e00), std::abs(a.e01 - b.e01)),
      std::max(std::abs(a.e10 - b.e10), std::abs(a.e11 - b.e11)));
}

// Independent route: RK4 on the longitudinal ODE system
//   theta' = -i rho |xi| v,   v' = -i (c^2/rho) |xi| theta - a v.
Block rk4_block(const ModelParams& p, double xi2, double t, int steps) {
  const double xin = std::sqrt(xi2);
  const double c2 = p.pressure.deriv(p.rho_star);
  const double a = (2.0 * p.mu + p.nu) / p.rho_star * xi2;
  auto rhs = [&](const std::array<Cplx, 2>& y) {
    return std::array<Cplx, 2>{
        Cplx(0.0, -p.rho_star * xin) * y[1],
        Cplx(0.0, -(c2 / p.rho_star) * xin) * y[0] - a * y[1]};
  };
  auto evolve = [&](std::array<Cplx, 2> y) {
    const double h = t / steps;
    for (int s = 0; s < steps; ++s) {
      auto k1 = rhs(y);
      auto k2 = rhs({y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]});
      auto k3 = rhs({y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]});
      auto k4 = rhs({y[0] + h * k3[0], y[1] + h * k3[1]});
      y[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
      y[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
    }
    return y;
  };
  auto c0 = evolve({Cplx(1.0, 0.0), Cplx(0.0, 0.0)});
  auto c1 = evolve({Cplx(0.0, 0.0), Cplx(1.0, 0.0)});
  return {c0[0], c1[0], c0[1], c1[1]};
}

}  // namespace

TEST_CASE("mode exponential: identity at t=0 and RK4 cross-check") {
  ModelParams p = default_params();
  ModePropagator id = mode_exponential(p, 2.5, 0.0);
  CHECK(id.e00 == 1.0);
  CHECK(id.e11 == 1.0);
  CHECK(id.s01 == 0.0);
  CHECK(id.s10 == 0.0);
  CHECK(id.tr == 1.0);

  for (double xi2 : {0.04, 1.0, 4.0, 25.0, 400.0}) {
    ModePropagator m = mode_exponential(p, xi2, 0.7);
    Block want = rk4_block(p, xi2, 0.7, 20000);
    CHECK(block_dist(as_block(m), want) < 1e-9);
    CHECK(m.tr == doctest::Approx(std::exp(-p.mu / p.rho_star * xi2 * 0.7))
                      .epsilon(1e-12));
  }
}

TEST_CASE("mode exponential at and near the defective root") {
  ModelParams p = default_params();
  // a^2/4 = c^2 xi^2 with a = (2mu+nu)/rho xi^2 picks the double root
  const double c2 = p.pressure.deriv(p.rho_star);
  const double xi2c =
      4.0 * c2 * p.rho_star * p.rho_star /
      ((2.0 * p.mu + p.nu) * (2.0 * p.mu + p.nu));
  for (double xi2 : {xi2c, xi2c * (1.0 + 1e-9), xi2c * (1.0 - 1e-9)}) {
    ModePropagator m = mode_exponential(p, xi2, 1.3);
    Block want = rk4_block(p, xi2, 1.3, 20000);
    CHECK(block_dist(as_block(m), want) < 1e-9);
  }
}

TEST_CASE("semigroup composition per mode") {
  ModelParams p = default_params();
  for (double xi2 : {0.09, 1.0, 16.0, 111.0}) {
    Block a = as_block(mode_exponential(p, xi2, 0.3));
    Block b = as_block(mode_exponential(p, xi2, 0.7));
    Block ab = as_block(mode_exponential(p, xi2, 1.0));
    CHECK(block_dist(mul(a, b), ab) < 1e-12);
    CHECK(block_dist(mul(a, b), mul(b, a)) < 1e-14);
  }
}

TEST_CASE("generator consistent with the propagator derivative") {
  ModelParams p = default_params();
  std::array<double, 3> xi = {1.0, -2.0, 0.5};
  const double xi2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
  Cplx th0(0.3, -0.2);
  std::array<Cplx, 3> v0 = {Cplx(0.1, 0.4), Cplx(-0.25, 0.0), Cplx(0.0, 0.7)};

  auto apply_prop = [&](double t, Cplx& th, std::array<Cplx, 3>& v) {
    ModePropagator m = mode_exponential(p, xi2, t);
    const double xin = std::sqrt(xi2);
    std::array<double, 3> hat = {xi[0] / xin, xi[1] / xin, xi[2] / xin};
    Cplx vl = hat[0] * v[0] + hat[1] * v[1] + hat[2] * v[2];
    std::array<Cplx, 3> vt;
    for (int c = 0; c < 3; ++c) vt[c] = v[c] - vl * hat[c];
    Cplx thn = m.e00 * th + Cplx(0.0, m.s01) * vl;
    Cplx vln = Cplx(0.0, m.s10) * th + m.e11 * vl;
    for (int c = 0; c < 3; ++c) v[c] = m.tr * vt[c] + vln * hat[c];
    th = thn;
  };

  const double t = 0.4, h = 1e-5;
  Cplx thp = th0, thm = th0, thc = th0;
  auto vp = v0, vm = v0, vc = v0;
  apply_prop(t + h, thp, vp);
  apply_prop(t - h, thm, vm);
  apply_prop(t, thc, vc);
  Cplx dth;
  std::array<Cplx, 3> dv;
  generator_mode(p, xi, thc, vc, dth, dv);
  CHECK(std::abs((thp - thm) / (2.0 * h) - dth) < 1e-6);
  for (int c = 0; c < 3; ++c)
    CHECK(std::abs((vp[c] - vm[c]) / (2.0 * h) - dv[c]) < 1e-6);
}

TEST_CASE("resolvent single-mode reference") {
  // xi = e1, lambda = 1, rho* = mu = P'(rho*) = 1, nu = 0:
  // w1 = (1-i)/4, zeta = (3-i)/4 for f = 1, g = e1.
  ModelParams p;
  p.mu = 1.0;
  p.nu = 0.0;
  p.rho_star = 1.0;
  p.pressure.a = 1.0 / 1.4;  // P'(1) = a*gamma = 1
  p.pressure.gamma = 1.4;
  std::array<double, 3> xi = {1.0, 0.0, 0.0};
  Cplx zeta;
  std::array<Cplx, 3> w;
  resolvent_mode(p, xi, Cplx(1.0, 0.0), Cplx(1.0, 0.0),
                 {Cplx(1.0, 0.0), Cplx(0.0, 0.0), Cplx(0.0, 0.0)}, zeta, w);
  CHECK(std::abs(zeta - Cplx(0.75, -0.25)) < 1e-14);
  CHECK(std::abs(w[0] - Cplx(0.25, -0.25)) < 1e-14);
  CHECK(std::abs(w[1]) < 1e-14);
  CHECK(std::abs(w[2]) < 1e-14);
}

TEST_CASE("resolvent solves the displayed system on the box") {
  ModelParams p = default_params();
  DomainSpec d = DomainSpec::box(2.0 * M_PI, 16);
  LinearOp op(p, d);
  std::mt19937_64 rng(211);
  Scalar f = random_smooth(d, rng, 1.0);
  Vec g(3);
  for (int c = 0; c < 3; ++c) g[c] = random_smooth(d, rng, 1.0);

  ResolventResult res = resolvent_solve(op, Cplx(3.7, 0.0), f, g);
  CHECK(res.residual < 1e-10);

  // real lambda, real data: solution is real and *_im vanishes
  CHECK(max_abs(res.zeta_im) < 1e-12);
  for (int c = 0; c < 3; ++c) CHECK(max_abs(res.w_im[c]) < 1e-12);

  const double pp = p.pressure.deriv(p.rho_star);
  auto rebuild_worst = [&](const ResolventResult& r, Cplx lambda) {
    // coupled real block system for lambda = alpha + i beta:
    //   alpha u_re - beta u_im + A-part(u_re) = data,
    //   beta  u_re + alpha u_im + A-part(u_im) = 0.
    const double al = lambda.real(), be = lambda.imag();
    Scalar div_re = divergence(r.w_re, d), div_im = divergence(r.w_im, d);
    Vec gz_re = grad(r.zeta_re, d), gz_im = grad(r.zeta_im, d);
    Vec gd_re = grad(div_re, d), gd_im = grad(div_im, d);
    double worst = 0.0;
    for (std::size_t q = 0; q < d.points(); ++q) {
      double e_re = al * r.zeta_re[q] - be * r.zeta_im[q] +
                    p.rho_star * div_re[q] - f[q];
      double e_im =
          be * r.zeta_re[q] + al * r.zeta_im[q] + p.rho_star * div_im[q];
      worst = std::max({worst, std::abs(e_re), std::abs(e_im)});
    }
    for (int c = 0; c < 3; ++c) {
      Scalar lap_re = laplace(r.w_re[c], d), lap_im = laplace(r.w_im[c], d);
      for (std::size_t q = 0; q < d.points(); ++q) {
        double a_re = p.mu * lap_re[q] + (p.mu + p.nu) * gd_re[c][q] -
                      pp * gz_re[c][q];
        double a_im = p.mu * lap_im[q] + (p.mu + p.nu) * gd_im[c][q] -
                      pp * gz_im[c][q];
        double e_re = p.rho_star * (al * r.w_re[c][q] - be * r.w_im[c][q]) -
                      a_re - g[c][q];
        double e_im =
            p.rho_star * (be * r.w_re[c][q] + al * r.w_im[c][q]) - a_im;
        worst = std::max({worst, std::abs(e_re), std::abs(e_im)});
      }
    }
    return worst;
  };
  CHECK(rebuild_worst(res, Cplx(3.7, 0.0)) < 1e-9);

  ResolventResult resc = resolvent_solve(op, Cplx(2.5, 1.5), f, g);
  CHECK(resc.residual < 1e-10);
  CHECK(max_abs(resc.zeta_im) > 1e-6);  // genuinely complex solution
  CHECK(rebuild_worst(resc, Cplx(2.5, 1.5)) < 1e-9);
}

TEST_CASE("box semigroup: identity at t=0 and energy decay") {
  ModelParams p = default_params();
  DomainSpec d = DomainSpec::box(2.0 * M_PI, 16);
  LinearOp op(p, d);
  std::mt19937_64 rng(223);
  FieldState s = random_state(d, rng, 0.01);

  FieldState s0 = semigroup_apply(op, 0.0, s);
  CHECK(max_abs_diff(s.theta, s0.theta) < 1e-14);
  for (int c = 0; c < 3; ++c)
    CHECK(max_abs_diff(s.vel[c], s0.vel[c]) < 1e-14);

  double e_prev = energy(op, s);
  FieldState cur = s;
  for (int k = 0; k < 100; ++k) {
    cur = semigroup_apply(op, 0.02, cur);
    const double e = energy(op, cur);
    CHECK(e <= e_prev * (1.0 + 1e-12));
    e_prev = e;
  }

  // dissipation identity dE/dt = -(mu ||grad w||^2 + (mu+nu) ||div w||^2)
  const double h = 1e-4;
  FieldState sp = semigroup_apply(op, h, s);
  FieldState sm = s;
  const double dE = (energy(op, sp) - energy(op, sm)) / h;
  const double rate = energy_dissipation_rate(op, s);
  CHECK(rate <= 0.0);
  CHECK(std::abs(dE - rate) < 1e-3 * std::abs(rate) + 1e-12);
}

TEST_CASE("shifted semigroup matches scaled plain semigroup on the box") {
  ModelParams p = default_params();
  DomainSpec d = DomainSpec::box(2.0 * M_PI, 8);
  LinearOp op(p, d);
  std::mt19937_64 rng(227);
  FieldState s = random_state(d, rng, 0.1);
  const double t = 0.9, lambda1 = 2.0;
  FieldState a = shifted_semigroup_apply(op, lambda1, t, s);
  FieldState b = semigroup_apply(op, t, s);
  const double scale = std::exp(-lambda1 * t);
  for (std::size_t q = 0; q < d.points(); ++q)
    CHECK(a.theta[q] == doctest::Approx(scale * b.theta[q]).epsilon(1e-10));
}

TEST_CASE("box spectral abscissa and default shift") {
  ModelParams p = default_params();
  DomainSpec d = DomainSpec::box(2.0 * M_PI, 8);
  LinearOp op(p, d);
  const double ab = spectral_abscissa_estimate(op);
  CHECK(ab == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(default_lambda1(op) == doctest::Approx(2.0));
}

TEST_CASE("radial generator: dense spectrum and arnoldi agree") {
  ModelParams p = default_params();
  DomainSpec d = DomainSpec::shell(1.0, 8.0, 48);
  LinearOp op(p, d);

  auto eig = radial_dense_eigenvalues(op);
  double max_re = -1e300, min_abs = 1e300;
  double max_re_nonzero = -1e300;
  for (const auto& z : eig) {
    max_re = std::max(max_re, z.real());
    min_abs = std::min(min_abs, std::abs(z));
    if (std::abs(z) > 1e-8) max_re_nonzero = std::max(max_re_nonzero, z.real());
  }
  // dense QR noise on the exact kernel vector scales with ||A||*eps
  CHECK(min_abs < 1e-8);
  CHECK(max_re < 1e-8);
  CHECK(max_re_nonzero < 0.0);

  const double ab = spectral_abscissa_estimate(op);
  CHECK(std::abs(ab - max_re_nonzero) <
        1e-6 * std::max(1.0, std::abs(max_re_nonzero)));
}

TEST_CASE("radial stepping against the dense exponential") {
  ModelParams p = default_params();
  DomainSpec d = DomainSpec::shell(1.0, 8.0, 40);
  LinearOp op(p, d);
  const int nr = d.nr, dim = 2 * nr;

  // assemble the dense generator column by column from apply()
  Eigen::MatrixXd A(dim, dim);
  for (int col = 0; col < dim; ++col) {
    FieldState e = FieldState::zero(d);
    if (col < nr)
      e.theta[col] = 1.0;
    else
      e.vel[0][col - nr] = 1.0;
    FieldState ae = op.apply(e);
    for (int j = 0; j < nr; ++j) {
      A(j, col) = ae.theta[j];
      A(nr + j, col) = ae.vel[0][j];
    }
  }

  FieldState s = FieldState::zero(d);
  for (int j = 0; j < nr; ++j) {
    const double x = (d.radius(j) - d.R0) / (d.R - d.R0);
    s.theta[j] = 0.02 * std::sin(M_PI * x);
    s.vel[0][j] = 0.01 * std::sin(M_PI * x) * std::sin(M_PI * x);
  }
  s.vel[0][0] = 0.0;
  s.vel[0][nr - 1] = 0.0;

  const double t = 0.2;
  Eigen::VectorXd x0(dim);
  for (int j = 0; j < nr; ++j) {
    x0(j) = s.theta[j];
    x0(nr + j) = s.vel[0][j];
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(A);
  Eigen::VectorXcd coef = es.eigenvectors().fullPivLu().solve(
      x0.cast<std::complex<double>>());
  for (int i = 0; i < dim; ++i)
    coef(i) *= std::exp(es.eigenvalues()(i) * t);
  Eigen::VectorXcd xt = es.eigenvectors() * coef;

  FieldState stepped = shifted_semigroup_apply(op, 0.0, t, s);
  double diff = 0.0, scale = 0.0;
  for (int j = 0; j < nr; ++j) {
    diff = std::max(diff, std::abs(stepped.theta[j] - xt(j).real()));
    diff = std::max(diff, std::abs(stepped.vel[0][j] - xt(nr + j).real()));
    scale = std::max({scale, std::abs(stepped.theta[j]),
                      std::abs(stepped.vel[0][j])});
  }
  CHECK(diff < 1e-4 * std::max(scale, 1e-10));
}

TEST_CASE("radial energy decays under stepping") {
  ModelParams p = default_params();
  DomainSpec d = DomainSpec::shell(1.0, 8.0, 64);
  LinearOp op(p, d);
  FieldState s = FieldState::zero(d);
  for (int j = 0; j < d.nr; ++j) {
    const double x = (d.radius(j) - d.R0) / (d.R - d.R0);
    s.theta[j] = 0.05 * std::cos(2.0 * M_PI * x);
    s.vel[0][j] = 0.02 * std::sin(M_PI * x);
  }
  s.vel[0][0] = 0.0;
  s.vel[0][d.nr - 1] = 0.0;

  double e_prev = energy(op, s);
  FieldState cur = s;
  for (int k = 0; k < 50; ++k) {
    cur = op.cn_step(0.0, 0.01, cur, nullptr, nullptr);
    const double e = energy(op, cur);
    CHECK(e <= e_prev * (1.0 + 1e-8));
    e_prev = e;
  }
}
