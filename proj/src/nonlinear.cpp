#include "mnflow/nonlinear.hpp"

#include <cmath>
#include <stdexcept>

#include "mnflow/norms.hpp"
#include "mnflow/operators.hpp"

namespace mnflow {

namespace {

// 5-point Gauss-Legendre on [0,1]
constexpr double kGx[5] = {0.04691007703066800, 0.23076534494715845, 0.5,
                           0.76923465505284155, 0.95308992296933200};
constexpr double kGw[5] = {0.11846344252809454, 0.23931433524968324,
                           0.28444444444444444, 0.23931433524968324,
                           0.11846344252809454};

std::array<double, 9> plus_identity(std::array<double, 9> a) {
  a[0] += 1.0;
  a[4] += 1.0;
  a[8] += 1.0;
  return a;
}

void require_box(const DomainSpec& d) {
  if (d.kind != DomainKind::PeriodicBox)
    throw std::runtime_error(
        "nonlinear terms require a periodic-box domain");
}

}  // namespace

Scalar d_div(const Mat& v0, const Mat& gu) {
  const std::size_t np = v0[0].size();
  Scalar out(np);
  for (std::size_t p = 0; p < np; ++p) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) s += v0[i * 3 + j][p] * gu[j * 3 + i][p];
    out[p] = s;
  }
  return out;
}

Mat d_deform(const Mat& v0, const Mat& gu) {
  const std::size_t np = v0[0].size();
  Mat out = zero_mat(np);
  for (std::size_t p = 0; p < np; ++p) {
    auto a = mul3(mat_at(v0, p), mat_at(gu, p));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        out[i * 3 + j][p] = a[i * 3 + j] + a[j * 3 + i];
  }
  return out;
}

Scalar d_div_direction(const Mat& v0, const Mat& E, const Mat& gu) {
  const std::size_t np = v0[0].size();
  Scalar out(np);
  for (std::size_t p = 0; p < np; ++p) {
    auto n = plus_identity(mat_at(v0, p));
    auto dv0 = mul3(mul3(n, mat_at(E, p)), n);
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) s -= dv0[i * 3 + j] * gu[j * 3 + i][p];
    out[p] = s;
  }
  return out;
}

Mat d_deform_direction(const Mat& v0, const Mat& E, const Mat& gu) {
  const std::size_t np = v0[0].size();
  Mat out = zero_mat(np);
  for (std::size_t p = 0; p < np; ++p) {
    auto n = plus_identity(mat_at(v0, p));
    auto dv0 = mul3(mul3(n, mat_at(E, p)), n);
    for (double& e : dv0) e = -e;
    auto a = mul3(dv0, mat_at(gu, p));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        out[i * 3 + j][p] = a[i * 3 + j] + a[j * 3 + i];
  }
  return out;
}

NonlinearTerms assemble_nonlinear(const FieldState& s, const FieldState& dt_s,
                                  const DisplacementField& dfield,
                                  const ModelParams& params,
                                  bool with_diagnostics) {
  const DomainSpec& d = dfield.domain;
  require_box(d);
  s.check_shape(d);
  dt_s.check_shape(d);
  if (dfield.k_hess.empty())
    throw std::invalid_argument(
        "assemble_nonlinear: displacement field lacks the hessian integral");

  const double rho = params.rho_star;
  const double pr0 = params.pressure.deriv(rho);
  const Mat gu = grad_mat(s.vel, d);
  const Hessian hs = hessian(s.vel, d);
  const Vec ge = grad(s.theta, d);
  const std::size_t np = d.points();

  NonlinearTerms out;
  out.F.resize(np);
  out.G.assign(3, Scalar(np));

  double sup_ddiv = 0.0, sup_mass = 0.0, sup_inertia = 0.0, sup_v1 = 0.0,
         sup_v2 = 0.0, sup_press = 0.0, sup_cross = 0.0;

  for (std::size_t p = 0; p < np; ++p) {
    const auto v0p = mat_at(dfield.v0, p);
    const auto gup = mat_at(gu, p);
    const auto N = plus_identity(v0p);
    const double eta = s.theta[p];

    double H[3][3][3];
    for (int l = 0; l < 3; ++l)
      for (int i = l; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          H[l][i][j] = H[i][l][j] = hs.at(l, i, j)[p];

    const double divu = gup[0] + gup[4] + gup[8];
    double ddiv = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) ddiv += v0p[i * 3 + j] * gup[j * 3 + i];
    out.F[p] = -(rho * ddiv + eta * (divu + ddiv));

    double dldiv[3];
    for (int l = 0; l < 3; ++l)
      dldiv[l] = H[l][0][0] + H[l][1][1] + H[l][2][2];

    // gradient-of-k slices: Am = dV0[W_m] gu = -(N W_m N) gu
    double Am[3][9];
    for (int m = 0; m < 3; ++m) {
      std::array<double, 9> Wm;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          Wm[a * 3 + b] = dfield.k_hess.at(m, a, b)[p];
      auto prod = mul3(mul3(N, Wm), N);
      for (double& e : prod) e = -e;
      auto am = mul3(prod, gup);
      for (int e = 0; e < 9; ++e) Am[m][e] = am[e];
    }

    const double rhoeta = rho + eta;
    if (!(rhoeta > 0.0))
      throw std::domain_error("assemble_nonlinear: rho* + eta <= 0");
    const double pd = params.pressure.deriv(rhoeta);

    for (int j = 0; j < 3; ++j) {
      double v1 = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int l = 0; l < 3; ++l)
          v1 += params.mu * v0p[i * 3 + l] * H[i][l][j];
      for (int l = 0; l < 3; ++l)
        v1 += params.mu * v0p[j * 3 + l] * dldiv[l];
      for (int m = 0; m < 3; ++m)
        for (int l = 0; l < 3; ++l)
          v1 += params.nu * v0p[m * 3 + l] * H[j][l][m];
      for (int i = 0; i < 3; ++i)
        for (int l = 0; l < 3; ++l) {
          double inner = params.mu * (H[l][i][j] + H[l][j][i]);
          if (i == j) inner += params.nu * dldiv[l];
          for (int m = 0; m < 3; ++m)
            inner += params.mu * (v0p[i * 3 + m] * H[l][m][j] +
                                  v0p[j * 3 + m] * H[l][m][i]);
          if (i == j)
            for (int m = 0; m < 3; ++m)
              for (int nn = 0; nn < 3; ++nn)
                inner += params.nu * v0p[m * 3 + nn] * H[l][nn][m];
          v1 += v0p[i * 3 + l] * inner;
        }

      double v2 = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int m = 0; m < 3; ++m) {
          double term = params.mu * (Am[m][i * 3 + j] + Am[m][j * 3 + i]);
          if (i == j)
            term += params.nu * (Am[m][0] + Am[m][4] + Am[m][8]);
          v2 += N[i * 3 + m] * term;
        }

      double press = -(pd - pr0) * ge[j][p];
      double pv0 = 0.0;
      for (int l = 0; l < 3; ++l) pv0 += v0p[j * 3 + l] * ge[l][p];
      press -= pd * pv0;

      const double inertia = -eta * dt_s.vel[j][p];
      out.G[j][p] = inertia + v1 + v2 + press;

      if (with_diagnostics) {
        sup_inertia = std::max(sup_inertia, std::abs(inertia));
        sup_v1 = std::max(sup_v1, std::abs(v1));
        sup_v2 = std::max(sup_v2, std::abs(v2));
        sup_press = std::max(sup_press, std::abs(press));
      }
    }

    if (with_diagnostics) {
      sup_ddiv = std::max(sup_ddiv, std::abs(rho * ddiv));
      sup_mass = std::max(sup_mass, std::abs(eta * (divu + ddiv)));
      // pressure-difference cross-check: eta * int_0^1 P''(rho*+s eta) ds
      double rem = 0.0;
      for (int gq = 0; gq < 5; ++gq)
        rem += kGw[gq] * params.pressure.deriv2(rho + kGx[gq] * eta);
      sup_cross = std::max(sup_cross, std::abs((pd - pr0) - eta * rem));
    }
  }

  if (with_diagnostics) {
    out.diagnostics = {
        {"div_correction", sup_ddiv},   {"mass_coupling", sup_mass},
        {"inertia", sup_inertia},       {"viscous_k", sup_v1},
        {"viscous_grad_k", sup_v2},     {"pressure_nl", sup_press},
        {"pressure_diff_crosscheck", sup_cross},
    };
  }
  return out;
}

Scalar assemble_F(const FieldState& s, const DisplacementField& dfield,
                  const ModelParams& params) {
  const DomainSpec& d = dfield.domain;
  require_box(d);
  s.check_shape(d);
  const double rho = params.rho_star;
  const Mat gu = grad_mat(s.vel, d);
  const std::size_t np = d.points();
  Scalar F(np);
  for (std::size_t p = 0; p < np; ++p) {
    const auto v0p = mat_at(dfield.v0, p);
    const auto gup = mat_at(gu, p);
    double divu = gup[0] + gup[4] + gup[8];
    double ddiv = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) ddiv += v0p[i * 3 + j] * gup[j * 3 + i];
    F[p] = -(rho * ddiv + s.theta[p] * (divu + ddiv));
  }
  return F;
}

Vec assemble_G(const FieldState& s, const FieldState& dt_s,
               const DisplacementField& dfield, const ModelParams& params) {
  return assemble_nonlinear(s, dt_s, dfield, params).G;
}

namespace {

// per-node norm series of one trajectory stream
struct SeriesSet {
  std::vector<double> fH1r, fLr, fH1[3], fL[3], gLr, gL[3];
  std::vector<double> dvH1[3];   // grad v in H^1_q
  std::vector<double> dvL2s;     // grad v in L_{2+sigma}
  std::vector<double> dtthH1[3]; // dt theta in H^1_q
  std::vector<double> dtthL2s;
  std::vector<double> dtvL[3], gthL[3], hvL[3];
  double th0H1[3] = {0, 0, 0};
  double th0L2s = 0.0;
};

FieldState state_diff(const FieldState& a, const FieldState& b) {
  FieldState d = a;
  for (std::size_t p = 0; p < d.theta.size(); ++p) d.theta[p] -= b.theta[p];
  for (std::size_t c = 0; c < d.vel.size(); ++c)
    for (std::size_t p = 0; p < d.vel[c].size(); ++p)
      d.vel[c][p] -= b.vel[c][p];
  return d;
}

double sup_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

std::vector<double> plus_series(const std::vector<double>& a,
                                const std::vector<double>& b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

}  // namespace

MonitorReport estimate_monitor(const TrajectoryRecord& a,
                               const TrajectoryRecord& b, const DomainSpec& d,
                               const ModelParams& params) {
  require_box(d);
  a.check_shape(d);
  const bool with_diff = !b.times.empty();
  if (with_diff) {
    b.check_shape(d);
    if (b.times != a.times)
      throw std::invalid_argument("estimate_monitor: sample times differ");
  }
  if (a.dt_states.empty() || (with_diff && b.dt_states.empty()))
    throw std::invalid_argument("estimate_monitor: dt_states required");

  const double sg = params.sigma;
  const double qs[3] = {2.0, 2.0 + sg, 6.0};
  const double r = params.r_exponent();
  const double p = params.p_time;
  const double bw = params.b();
  const std::size_t nt = a.size();

  SeriesSet A, B, D;
  auto prep = [&](SeriesSet& S) {
    S.fH1r.resize(nt);
    S.fLr.resize(nt);
    S.gLr.resize(nt);
    S.dvL2s.resize(nt);
    S.dtthL2s.resize(nt);
    for (int k = 0; k < 3; ++k) {
      S.fH1[k].resize(nt);
      S.fL[k].resize(nt);
      S.gL[k].resize(nt);
      S.dvH1[k].resize(nt);
      S.dtthH1[k].resize(nt);
      S.dtvL[k].resize(nt);
      S.gthL[k].resize(nt);
      S.hvL[k].resize(nt);
    }
  };
  prep(A);
  if (with_diff) {
    prep(B);
    prep(D);
  }

  DisplacementAccumulator acc_a(d, params, true);
  DisplacementAccumulator acc_b(d, params, true);

  auto fill_node = [&](SeriesSet& S, std::size_t i, const FieldState& s,
                       const FieldState& ds, const Scalar& F, const Vec& G) {
    double fL[3], fD[3];
    Vec gradF = grad(F, d);
    for (int k = 0; k < 3; ++k) {
      fL[k] = lq_norm(F, d, qs[k]);
      fD[k] = lq_norm(gradF, d, qs[k]);
      S.fL[k][i] = fL[k];
      S.fH1[k][i] = fL[k] + fD[k];
      S.gL[k][i] = lq_norm(G, d, qs[k]);
    }
    S.fLr[i] = lq_norm(F, d, r);
    S.fH1r[i] = S.fLr[i] + lq_norm(gradF, d, r);
    S.gLr[i] = lq_norm(G, d, r);
    Mat gv = grad_mat(s.vel, d);
    for (int k = 0; k < 3; ++k)
      S.dvH1[k][i] = sobolev_norm(s.vel, d, qs[k], 2) - lq_norm(s.vel, d, qs[k]);
    S.dvL2s[i] = lq_norm(gv, d, 2.0 + sg);
    Vec gth = grad(s.theta, d);
    for (int k = 0; k < 3; ++k) {
      S.dtthH1[k][i] = sobolev_norm(ds.theta, d, qs[k], 1);
      S.dtvL[k][i] = lq_norm(ds.vel, d, qs[k]);
      S.gthL[k][i] = lq_norm(gth, d, qs[k]);
      S.hvL[k][i] = sobolev_norm(s.vel, d, qs[k], 2) -
                    sobolev_norm(s.vel, d, qs[k], 1);
    }
    S.dtthL2s[i] = lq_norm(ds.theta, d, 2.0 + sg);
  };

  for (std::size_t i = 0; i < nt; ++i) {
    acc_a.push(a.states[i]);
    auto terms_a = assemble_nonlinear(a.states[i], a.dt_states[i],
                                      acc_a.current(), params);
    fill_node(A, i, a.states[i], a.dt_states[i], terms_a.F, terms_a.G);
    if (with_diff) {
      acc_b.push(b.states[i]);
      auto terms_b = assemble_nonlinear(b.states[i], b.dt_states[i],
                                        acc_b.current(), params);
      fill_node(B, i, b.states[i], b.dt_states[i], terms_b.F, terms_b.G);
      Scalar Fd = terms_a.F;
      for (std::size_t pp = 0; pp < Fd.size(); ++pp) Fd[pp] -= terms_b.F[pp];
      Vec Gd = terms_a.G;
      for (int c = 0; c < 3; ++c)
        for (std::size_t pp = 0; pp < Gd[c].size(); ++pp)
          Gd[c][pp] -= terms_b.G[c][pp];
      fill_node(D, i, state_diff(a.states[i], b.states[i]),
                state_diff(a.dt_states[i], b.dt_states[i]), Fd, Gd);
    }
  }

  for (int k = 0; k < 3; ++k) {
    A.th0H1[k] = sobolev_norm(a.states[0].theta, d, qs[k], 1);
    if (with_diff) {
      B.th0H1[k] = sobolev_norm(b.states[0].theta, d, qs[k], 1);
      D.th0H1[k] = sobolev_norm(
          state_diff(a.states[0], b.states[0]).theta, d, qs[k], 1);
    }
  }
  A.th0L2s = lq_norm(a.states[0].theta, d, 2.0 + sg);
  if (with_diff) {
    B.th0L2s = lq_norm(b.states[0].theta, d, 2.0 + sg);
    D.th0L2s =
        lq_norm(state_diff(a.states[0], b.states[0]).theta, d, 2.0 + sg);
  }

  auto Lpb = [&](const std::vector<double>& v) {
    return weighted_time_norm(a.times, v, p, bw);
  };
  auto theta_q = [&](const SeriesSet& S, int k) {
    return S.th0H1[k] + Lpb(S.dtthH1[k]);
  };
  auto theta_low = [&](const SeriesSet& S) {
    return S.th0L2s + Lpb(S.dtthL2s);
  };

  // factor lists per bound; slot 0 is the L_p-weighted trailing factor,
  // the rest enter by unweighted sup (or are plain numbers)
  struct Term {
    std::vector<double> lead_a, lead_b, lead_d;  // weighted factor series
    std::vector<std::pair<double, double>> rest_ab;  // (a,b) value pairs
    std::vector<double> rest_d;                      // matching diff values
  };

  auto make_term = [&](const std::vector<double>& la,
                       const std::vector<double>& lb,
                       const std::vector<double>& ld,
                       std::initializer_list<std::array<double, 3>> rest) {
    Term t;
    t.lead_a = la;
    t.lead_b = lb;
    t.lead_d = ld;
    for (const auto& f : rest) {
      t.rest_ab.emplace_back(f[0], f[1]);
      t.rest_d.push_back(f[2]);
    }
    return t;
  };

  auto rhs_base = [&](const std::vector<Term>& terms) {
    double out = 0.0;
    for (const auto& t : terms) {
      double v = Lpb(t.lead_a);
      for (const auto& f : t.rest_ab) v *= f.first;
      out += v;
    }
    return out;
  };
  // product rule: replace each factor by its difference in turn, partners
  // at the larger of the two base values
  auto rhs_diff = [&](const std::vector<Term>& terms) {
    double out = 0.0;
    for (const auto& t : terms) {
      double v = Lpb(t.lead_d);
      for (const auto& f : t.rest_ab) v *= std::max(f.first, f.second);
      out += v;
      for (std::size_t k = 0; k < t.rest_ab.size(); ++k) {
        double w = std::max(Lpb(t.lead_a), Lpb(t.lead_b));
        for (std::size_t j = 0; j < t.rest_ab.size(); ++j)
          w *= (j == k) ? t.rest_d[j]
                        : std::max(t.rest_ab[j].first, t.rest_ab[j].second);
        out += w;
      }
    }
    return out;
  };

  MonitorReport rep;
  auto push_entry = [&](const std::string& label, double lhs, double rhs) {
    MonitorEntry e;
    e.label = label;
    e.lhs = lhs;
    e.rhs = rhs;
    e.ratio = rhs > 0.0 ? lhs / rhs
                        : (lhs == 0.0
                               ? 0.0
                               : std::numeric_limits<double>::infinity());
    rep.max_ratio = std::max(rep.max_ratio, e.ratio);
    rep.entries.push_back(std::move(e));
  };

  const std::vector<double> empty;
  auto sup_pair = [&](const std::vector<double>& va,
                      const std::vector<double>& vb,
                      const std::vector<double>& vd) {
    return std::array<double, 3>{sup_of(va), with_diff ? sup_of(vb) : 0.0,
                                 with_diff ? sup_of(vd) : 0.0};
  };
  auto num3 = [&](double xa, double xb, double xd) {
    return std::array<double, 3>{xa, xb, xd};
  };

  // mass forcing in the mixed-exponent scale
  {
    std::vector<Term> terms;
    auto lead = [&](int k) {
      return std::array<const std::vector<double>*, 3>{
          &A.dvH1[k], with_diff ? &B.dvH1[k] : &empty,
          with_diff ? &D.dvH1[k] : &empty};
    };
    auto L2 = lead(0);
    terms.push_back(make_term(*L2[0], *L2[1], *L2[2],
                              {sup_pair(A.dvH1[1], B.dvH1[1], D.dvH1[1])}));
    terms.push_back(make_term(
        *L2[0], *L2[1], *L2[2],
        {num3(theta_q(A, 1), with_diff ? theta_q(B, 1) : 0.0,
              with_diff ? theta_q(D, 1) : 0.0)}));
    terms.push_back(make_term(
        *L2[0], *L2[1], *L2[2],
        {num3(theta_q(A, 2), with_diff ? theta_q(B, 2) : 0.0,
              with_diff ? theta_q(D, 2) : 0.0),
         sup_pair(A.dvH1[1], B.dvH1[1], D.dvH1[1])}));
    terms.push_back(make_term(
        *L2[0], *L2[1], *L2[2],
        {num3(theta_q(A, 1), with_diff ? theta_q(B, 1) : 0.0,
              with_diff ? theta_q(D, 1) : 0.0),
         sup_pair(A.dvH1[2], B.dvH1[2], D.dvH1[2])}));
    push_entry("mass forcing, H1_r scale", Lpb(A.fH1r), rhs_base(terms));
    if (with_diff)
      push_entry("mass forcing difference, L_r scale", Lpb(D.fLr),
                 rhs_diff(terms));
  }

  // mass forcing per q
  for (int k = 0; k < 3; ++k) {
    std::vector<Term> terms;
    terms.push_back(make_term(A.dvH1[k], with_diff ? B.dvH1[k] : empty,
                              with_diff ? D.dvH1[k] : empty,
                              {sup_pair(A.dvH1[2], B.dvH1[2], D.dvH1[2])}));
    terms.push_back(make_term(
        A.dvH1[2], with_diff ? B.dvH1[2] : empty,
        with_diff ? D.dvH1[2] : empty,
        {num3(theta_q(A, k), with_diff ? theta_q(B, k) : 0.0,
              with_diff ? theta_q(D, k) : 0.0)}));
    terms.push_back(make_term(
        A.dvH1[k], with_diff ? B.dvH1[k] : empty,
        with_diff ? D.dvH1[k] : empty,
        {num3(theta_q(A, 2), with_diff ? theta_q(B, 2) : 0.0,
              with_diff ? theta_q(D, 2) : 0.0)}));
    terms.push_back(make_term(
        A.dvH1[2], with_diff ? B.dvH1[2] : empty,
        with_diff ? D.dvH1[2] : empty,
        {num3(theta_q(A, k), with_diff ? theta_q(B, k) : 0.0,
              with_diff ? theta_q(D, k) : 0.0),
         sup_pair(A.dvH1[2], B.dvH1[2], D.dvH1[2])}));
    terms.push_back(make_term(
        A.dvH1[k], with_diff ? B.dvH1[k] : empty,
        with_diff ? D.dvH1[k] : empty,
        {num3(theta_q(A, 2), with_diff ? theta_q(B, 2) : 0.0,
              with_diff ? theta_q(D, 2) : 0.0),
         sup_pair(A.dvH1[2], B.dvH1[2], D.dvH1[2])}));
    std::string qs_label = "q=" + std::to_string(qs[k]);
    push_entry("mass forcing, H1 scale " + qs_label, Lpb(A.fH1[k]),
               rhs_base(terms));
    if (with_diff)
      push_entry("mass forcing difference, L scale " + qs_label,
                 Lpb(D.fL[k]), rhs_diff(terms));
  }

  // momentum forcing in the mixed-exponent scale
  {
    std::vector<Term> terms;
    terms.push_back(make_term(
        plus_series(A.dtvL[0], A.gthL[0]),
        with_diff ? plus_series(B.dtvL[0], B.gthL[0]) : empty,
        with_diff ? plus_series(D.dtvL[0], D.gthL[0]) : empty,
        {num3(theta_low(A), with_diff ? theta_low(B) : 0.0,
              with_diff ? theta_low(D) : 0.0)}));
    terms.push_back(make_term(
        plus_series(A.hvL[0], A.gthL[0]),
        with_diff ? plus_series(B.hvL[0], B.gthL[0]) : empty,
        with_diff ? plus_series(D.hvL[0], D.gthL[0]) : empty,
        {sup_pair(A.dvL2s, B.dvL2s, D.dvL2s)}));
    push_entry("momentum forcing, L_r scale", Lpb(A.gLr), rhs_base(terms));
    if (with_diff)
      push_entry("momentum forcing difference, L_r scale", Lpb(D.gLr),
                 rhs_diff(terms));
  }

  // momentum forcing per q
  for (int k = 0; k < 3; ++k) {
    std::vector<Term> terms;
    terms.push_back(make_term(
        plus_series(A.dtvL[k], A.gthL[k]),
        with_diff ? plus_series(B.dtvL[k], B.gthL[k]) : empty,
        with_diff ? plus_series(D.dtvL[k], D.gthL[k]) : empty,
        {num3(theta_q(A, 2), with_diff ? theta_q(B, 2) : 0.0,
              with_diff ? theta_q(D, 2) : 0.0)}));
    terms.push_back(make_term(
        plus_series(A.hvL[k], A.gthL[k]),
        with_diff ? plus_series(B.hvL[k], B.gthL[k]) : empty,
        with_diff ? plus_series(D.hvL[k], D.gthL[k]) : empty,
        {sup_pair(A.dvH1[2], B.dvH1[2], D.dvH1[2])}));
    std::string qs_label = "q=" + std::to_string(qs[k]);
    push_entry("momentum forcing, L scale " + qs_label, Lpb(A.gL[k]),
               rhs_base(terms));
    if (with_diff)
      push_entry("momentum forcing difference, L scale " + qs_label,
                 Lpb(D.gL[k]), rhs_diff(terms));
  }

  rep.note =
      "difference bounds are evaluated one derivative weaker (L scales) "
      "than the base mass-forcing bound (H1 scale); factors pair by the "
      "product rule with partners at the larger base value";
  return rep;
}

}  // namespace mnflow
