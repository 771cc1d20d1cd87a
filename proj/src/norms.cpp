#include "mnflow/norms.hpp"

#include <cmath>
#include <stdexcept>

#include "mnflow/operators.hpp"

namespace mnflow {

namespace {

// Quadrature weight at point p.
double quad_weight(const DomainSpec& d, std::size_t p) {
  if (d.kind == DomainKind::PeriodicBox) {
    double h = d.spacing();
    return h * h * h;
  }
  double h = d.spacing();
  double r = d.radius(static_cast<int>(p));
  double w = 4.0 * M_PI * r * r * h;
  if (p == 0 || p + 1 == d.points()) w *= 0.5;
  return w;
}

void check_q(double q) {
  if (q == kInf) return;
  if (!(q >= 1.0)) throw std::invalid_argument("lq_norm: requires q >= 1");
}

double lq_of_magnitude(const std::vector<const Scalar*>& comps,
                       const DomainSpec& d, double q) {
  check_q(q);
  const std::size_t np = d.points();
  for (auto* c : comps)
    if (c->size() != np) throw std::invalid_argument("lq_norm: size mismatch");
  if (q == kInf) {
    double m = 0.0;
    for (std::size_t p = 0; p < np; ++p) {
      double s = 0.0;
      for (auto* c : comps) s += (*c)[p] * (*c)[p];
      m = std::max(m, s);
    }
    return std::sqrt(m);
  }
  double acc = 0.0;
  for (std::size_t p = 0; p < np; ++p) {
    double s = 0.0;
    for (auto* c : comps) s += (*c)[p] * (*c)[p];
    acc += std::pow(s, 0.5 * q) * quad_weight(d, p);
  }
  return std::pow(acc, 1.0 / q);
}

}  // namespace

double lq_norm(const Scalar& f, const DomainSpec& d, double q) {
  return lq_of_magnitude({&f}, d, q);
}

double lq_norm(const Vec& u, const DomainSpec& d, double q) {
  std::vector<const Scalar*> comps;
  for (const auto& c : u) comps.push_back(&c);
  return lq_of_magnitude(comps, d, q);
}

double lq_norm(const Mat& m, const DomainSpec& d, double q) {
  std::vector<const Scalar*> comps;
  for (const auto& c : m) comps.push_back(&c);
  return lq_of_magnitude(comps, d, q);
}

double lq_norm_pair(const FieldState& s, const DomainSpec& d, double q) {
  return lq_norm(s.theta, d, q) + lq_norm(s.vel, d, q);
}

double sobolev_norm(const Scalar& f, const DomainSpec& d, double q,
                    int order) {
  double out = lq_norm(f, d, q);
  if (order >= 1) out += lq_norm(grad(f, d), d, q);
  if (order >= 2) {
    if (d.kind == DomainKind::RadialShell) {
      out += lq_norm(radial_deriv(radial_deriv(f, d), d), d, q);
    } else {
      const auto& tf = transform_for(d);
      Spec fh = tf.forward(f);
      const std::size_t np = d.points();
      Scalar mag(np, 0.0);
      for (int l = 0; l < 3; ++l)
        for (int i = l; i < 3; ++i) {
          Spec sh(fh.size());
          const auto& xl = tf.xi_axis(l);
          const auto& xi = tf.xi_axis(i);
          for (std::size_t m = 0; m < fh.size(); ++m)
            sh[m] = -xl[m] * xi[m] * fh[m];
          Scalar dd = tf.backward(sh);
          double mult = (l == i) ? 1.0 : 2.0;  // off-diagonal pair counted twice
          for (std::size_t pt = 0; pt < np; ++pt)
            mag[pt] += mult * dd[pt] * dd[pt];
        }
      for (std::size_t pt = 0; pt < np; ++pt) mag[pt] = std::sqrt(mag[pt]);
      out += lq_norm(mag, d, q);
    }
  }
  if (order > 2) throw std::invalid_argument("sobolev_norm: order <= 2 only");
  return out;
}

double sobolev_norm(const Vec& u, const DomainSpec& d, double q, int order) {
  double out = lq_norm(u, d, q);
  if (order >= 1) out += lq_norm(grad_mat(u, d), d, q);
  if (order >= 2) {
    if (d.kind == DomainKind::RadialShell) {
      // second radial derivative of the speed profile
      out += lq_norm(radial_deriv(radial_deriv(u[0], d), d), d, q);
    } else {
      Hessian h = hessian(u, d);
      // Frobenius magnitude over all 27 slots; off-diagonal pairs count twice
      const std::size_t np = d.points();
      Scalar mag(np, 0.0);
      for (int l = 0; l < 3; ++l)
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) {
            const Scalar& c = h.at(l, i, j);
            for (std::size_t p = 0; p < np; ++p) mag[p] += c[p] * c[p];
          }
      for (std::size_t p = 0; p < np; ++p) mag[p] = std::sqrt(mag[p]);
      out += lq_norm(mag, d, q);
    }
  }
  if (order > 2) throw std::invalid_argument("sobolev_norm: order <= 2 only");
  return out;
}

double pair_sobolev(const FieldState& s, const DomainSpec& d, double q,
                    int theta_order, int vel_order) {
  return sobolev_norm(s.theta, d, q, theta_order) +
         sobolev_norm(s.vel, d, q, vel_order);
}

double weighted_time_norm(const std::vector<double>& times,
                          const std::vector<double>& values, double p,
                          double b) {
  if (times.size() != values.size() || times.empty())
    throw std::invalid_argument("weighted_time_norm: sample mismatch");
  auto w = [&](std::size_t i) {
    return std::pow(std::sqrt(1.0 + times[i] * times[i]), b) * values[i];
  };
  if (p == kInf) {
    double m = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) m = std::max(m, w(i));
    return m;
  }
  if (!(p >= 1.0))
    throw std::invalid_argument("weighted_time_norm: requires p >= 1");
  if (times.size() == 1) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    double a = std::pow(w(i), p), c = std::pow(w(i + 1), p);
    acc += 0.5 * (a + c) * (times[i + 1] - times[i]);
  }
  return std::pow(acc, 1.0 / p);
}

EnergyReport energy_ET(const TrajectoryRecord& traj, const DomainSpec& d,
                       const ModelParams& params, double threshold) {
  traj.check_shape(d);
  if (traj.dt_states.empty())
    throw std::invalid_argument("energy_ET: trajectory needs dt_states");
  const double sg = params.sigma;
  const double p = params.p_time;
  const double b = params.b();
  const std::size_t nt = traj.size();

  std::vector<double> st_l2l6(nt), gr_mix(nt), h12_6(nt), dt_l2l6(nt),
      dt_h01_2(nt), dt_h01_6(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    const FieldState& s = traj.states[i];
    const FieldState& ds = traj.dt_states[i];
    st_l2l6[i] = lq_norm_pair(s, d, 2.0) + lq_norm_pair(s, d, 6.0);
    double g = 0.0;
    for (double q : {2.0, 2.0 + sg}) {
      g += lq_norm(grad(s.theta, d), d, q);
      g += sobolev_norm(s.vel, d, q, 2) - lq_norm(s.vel, d, q);
    }
    gr_mix[i] = g;
    h12_6[i] = pair_sobolev(s, d, 6.0, 1, 2);
    dt_l2l6[i] = lq_norm_pair(ds, d, 2.0) + lq_norm_pair(ds, d, 6.0);
    dt_h01_2[i] = pair_sobolev(ds, d, 2.0, 0, 1);
    dt_h01_6[i] = pair_sobolev(ds, d, 6.0, 0, 1);
  }

  EnergyReport rep;
  rep.components = {
      {"sup_t weighted (theta,v) in L2+L6",
       weighted_time_norm(traj.times, st_l2l6, kInf, b)},
      {"Lp_t weighted grad(theta,v) in H01_2+H01_{2+sigma}",
       weighted_time_norm(traj.times, gr_mix, p, b)},
      {"Lp_t weighted (theta,v) in H12_6",
       weighted_time_norm(traj.times, h12_6, p, b)},
      {"Lp_t weighted dt(theta,v) in L2+L6",
       weighted_time_norm(traj.times, dt_l2l6, p, b)},
      {"Lp_t weighted dt(theta,v) in H01_2",
       weighted_time_norm(traj.times, dt_h01_2, p, b)},
      {"Lp_t weighted dt(theta,v) in H01_6",
       weighted_time_norm(traj.times, dt_h01_6, p, b)},
  };
  rep.total = 0.0;
  for (const auto& c : rep.components) rep.total += c.value;
  rep.threshold = threshold;
  rep.small = rep.total <= threshold;
  return rep;
}

InitialDataNorm initial_norm(const FieldState& s0, const DomainSpec& d,
                             const ModelParams& params) {
  s0.check_shape(d);
  const double sg = params.sigma;
  const double p = params.p_time;
  const double r = params.r_exponent();
  InitialDataNorm out;
  for (double q : {2.0, 2.0 + sg, 6.0}) {
    out.components.push_back(
        {"theta0 H1_q q=" + std::to_string(q), sobolev_norm(s0.theta, d, q, 1)});
  }
  for (double q : {2.0, 2.0 + sg, 6.0}) {
    double lo = lq_norm(s0.vel, d, q);
    double hi = sobolev_norm(s0.vel, d, q, 2);
    out.components.push_back(
        {"v0 Besov surrogate q=" + std::to_string(q),
         std::pow(lo, 1.0 / p) * std::pow(hi, 1.0 - 1.0 / p)});
  }
  out.components.push_back({"(theta0,v0) H10_r r=" + std::to_string(r),
                            pair_sobolev(s0, d, r, 1, 0)});
  out.total = 0.0;
  for (const auto& c : out.components) out.total += c.value;
  return out;
}

double iterate_strength(const FieldState& s, const FieldState& dt_s,
                        const DomainSpec& d, const ModelParams& params) {
  const double sg = params.sigma;
  double out = pair_sobolev(s, d, params.r_exponent(), 1, 0);
  for (double q : {2.0, 2.0 + sg, 6.0}) {
    out += pair_sobolev(s, d, q, 1, 2);
    out += pair_sobolev(dt_s, d, q, 1, 0);
  }
  return out;
}

}  // namespace mnflow
