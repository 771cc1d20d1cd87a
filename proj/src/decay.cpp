#include "mnflow/decay.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "mnflow/linstokes.hpp"
#include "mnflow/norms.hpp"
#include "mnflow/operators.hpp"
#include "mnflow/spectral.hpp"

namespace mnflow {

const char* to_string(DecayObservable obs) {
  switch (obs) {
    case DecayObservable::State: return "state";
    case DecayObservable::Gradient: return "gradient";
    case DecayObservable::TimeDerivative: return "time-derivative";
  }
  return "unknown";
}

double predicted_exponent(DecayObservable obs, double p, double q) {
  if (!(q >= 1.0) || q > 2.0)
    throw std::invalid_argument("predicted_exponent: requires 1 <= q <= 2");
  if (!(p >= 2.0) || !std::isfinite(p))
    throw std::invalid_argument(
        "predicted_exponent: requires 2 <= p < infinity");
  switch (obs) {
    case DecayObservable::State:
      return 1.5 * (1.0 / q - 1.0 / p);
    case DecayObservable::Gradient:
      if (p <= 3.0) return 1.5 * (1.0 / q - 1.0 / p) + 0.5;
      return 1.5 / q;
    case DecayObservable::TimeDerivative:
      return 1.5 / q;
  }
  throw std::invalid_argument("predicted_exponent: unknown observable");
}

namespace {

// Spectral data on the r2c grid; Nyquist-touching modes are dropped so the
// derivative multipliers and the propagator see exactly the same content.
struct SpectralData {
  Spec theta;
  std::array<Spec, 3> vel;
};

SpectralData build_spectral_data(const DecayConfig& cfg,
                                 const SpectralTransform& tf) {
  const std::size_t nm = tf.nmodes();
  SpectralData s;
  s.theta.assign(nm, Cplx(0.0, 0.0));
  for (auto& c : s.vel) c.assign(nm, Cplx(0.0, 0.0));

  double a_th = cfg.amp_theta;
  double a_ac = cfg.amp_acoustic;
  double a_so = cfg.amp_solenoidal;
  if (cfg.kind == DecayDataKind::Acoustic) a_so = 0.0;
  if (cfg.kind == DecayDataKind::Solenoidal) {
    a_th = 0.0;
    a_ac = 0.0;
  }

  const double w2 = cfg.width * cfg.width;
  for (std::size_t m = 0; m < nm; ++m) {
    std::array<double, 3> xi = {tf.xi(0, m), tf.xi(1, m), tf.xi(2, m)};
    const double xi2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    if (xi2 == 0.0 || tf.nyquist(m)) continue;
    const double xin = std::sqrt(xi2);
    const double phi = std::exp(-xi2 / (2.0 * w2));
    std::array<double, 3> hat = {xi[0] / xin, xi[1] / xin, xi[2] / xin};
    // hat x e_z is orthogonal to hat, so this part is divergence-free
    std::array<double, 3> sol = {hat[1], -hat[0], 0.0};
    s.theta[m] = Cplx(a_th * phi, 0.0);
    for (int c = 0; c < 3; ++c)
      s.vel[c][m] = Cplx(0.0, phi * (a_ac * hat[c] + a_so * sol[c]));
  }
  return s;
}

}  // namespace

FieldState decay_initial_data(const DecayConfig& cfg, const DomainSpec& d) {
  d.validate();
  if (d.kind != DomainKind::PeriodicBox)
    throw std::invalid_argument("decay_initial_data: periodic box required");
  const auto& tf = transform_for(d);
  SpectralData s = build_spectral_data(cfg, tf);
  FieldState out = FieldState::zero(d, Frame::Euler, 0.0);
  out.theta = tf.backward(s.theta);
  for (int c = 0; c < 3; ++c) out.vel[c] = tf.backward(s.vel[c]);
  return out;
}

DecayFit run_decay_experiment(const ModelParams& params, const DomainSpec& d,
                              const DecayConfig& cfg, DecayObservable obs,
                              double p, double q) {
  params.validate();
  d.validate();
  if (d.kind != DomainKind::PeriodicBox)
    throw std::invalid_argument("run_decay_experiment: periodic box required");
  DecayFit fit;
  fit.observable = obs;
  fit.p = p;
  fit.q = q;
  fit.predicted = predicted_exponent(obs, p, q);

  const double t_min = cfg.t_min;
  const double t_max =
      cfg.t_max > 0.0 ? cfg.t_max : 0.4 * d.L / params.sound_speed();
  if (!(t_max > t_min))
    throw std::invalid_argument("run_decay_experiment: empty time window");
  const double decades = std::log10(t_max / t_min);
  const int count = std::max(
      2, static_cast<int>(std::lround(cfg.points_per_decade * decades)) + 1);

  const auto& tf = transform_for(d);
  const std::size_t nm = tf.nmodes();
  SpectralData s0 = build_spectral_data(cfg, tf);

  fit.times.resize(count);
  fit.values.resize(count);
  for (int i = 0; i < count; ++i) {
    const double t =
        t_min * std::pow(t_max / t_min, static_cast<double>(i) / (count - 1));
    fit.times[i] = t;
    SpectralData s = s0;
    BoxPropagator prop(params, d, t, 0.0);
    prop.apply(s.theta, s.vel[0], s.vel[1], s.vel[2]);

    FieldState st = FieldState::zero(d, Frame::Euler, t);
    double value = 0.0;
    switch (obs) {
      case DecayObservable::State: {
        st.theta = tf.backward(s.theta);
        for (int c = 0; c < 3; ++c) st.vel[c] = tf.backward(s.vel[c]);
        value = lq_norm_pair(st, d, p);
        break;
      }
      case DecayObservable::Gradient: {
        st.theta = tf.backward(s.theta);
        for (int c = 0; c < 3; ++c) st.vel[c] = tf.backward(s.vel[c]);
        value = lq_norm(grad(st.theta, d), d, p) +
                lq_norm(grad_mat(st.vel, d), d, p);
        break;
      }
      case DecayObservable::TimeDerivative: {
        Spec dth(nm);
        std::array<Spec, 3> dv;
        for (auto& c : dv) c.resize(nm);
        for (std::size_t m = 0; m < nm; ++m) {
          std::array<double, 3> xi = {tf.xi(0, m), tf.xi(1, m), tf.xi(2, m)};
          std::array<Cplx, 3> vm = {s.vel[0][m], s.vel[1][m], s.vel[2][m]};
          Cplx dthm;
          std::array<Cplx, 3> dvm;
          generator_mode(params, xi, s.theta[m], vm, dthm, dvm);
          dth[m] = dthm;
          for (int c = 0; c < 3; ++c) dv[c][m] = dvm[c];
        }
        st.theta = tf.backward(dth);
        for (int c = 0; c < 3; ++c) st.vel[c] = tf.backward(dv[c]);
        value = lq_norm_pair(st, d, p);
        break;
      }
    }
    fit.values[i] = value;
  }

  // log-log least squares
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < count; ++i) {
    if (!(fit.values[i] > 0.0)) {
      fit.verdict = "inconclusive";
      return fit;
    }
    const double x = std::log(fit.times[i]);
    const double y = std::log(fit.values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double nn = count;
  const double denom = nn * sxx - sx * sx;
  const double slope = (nn * sxy - sx * sy) / denom;
  const double ss_tot = syy - sy * sy / nn;
  const double ss_res =
      ss_tot - slope * slope * denom / nn;  // residual after the linear fit
  fit.exponent = -slope;
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;

  if (decades < 0.5) {
    fit.verdict = "inconclusive";
  } else if (std::abs(fit.exponent - fit.predicted) <=
                 0.15 * fit.predicted + 0.05 &&
             fit.r2 >= 0.98) {
    fit.verdict = "pass";
  } else {
    fit.verdict = "fail";
  }
  return fit;
}

BookkeepingReport exponent_bookkeeping(int N, double sigma, double p) {
  if (N < 2)
    throw std::invalid_argument("exponent_bookkeeping: N >= 2 required");
  if (!(sigma > 0.0) || !(sigma < 1.0 / 6.0))
    throw std::invalid_argument(
        "exponent_bookkeeping: requires 0 < sigma < 1/6");
  const bool p_std = std::abs(p - 2.0) < 1e-12;
  const bool p_low = std::abs(p - (1.0 + sigma)) < 1e-12;
  if (!p_std && !p_low)
    throw std::invalid_argument(
        "exponent_bookkeeping: p must be 2 or 1 + sigma");

  BookkeepingReport rep;
  rep.N = N;
  rep.sigma = sigma;
  rep.p = p;
  rep.q_exponents = {2.0, 2.0 + sigma};
  if (N > 2) rep.q_exponents.push_back(2.0 * N / (N - 2.0));

  rep.b = p_std ? (3.0 - sigma) / (2.0 * (2.0 + sigma))
                : (1.0 - sigma) / (2.0 * (2.0 + sigma));
  const double pprime = p / (p - 1.0);
  rep.b_lo = 1.0 / pprime;
  rep.b_hi = 0.5 + N / (2.0 * (2.0 + sigma)) - 1.0 / p;
  rep.interval_nonempty = 0.5 + N / (2.0 * (2.0 + sigma)) > 1.0;
  rep.time_integrability = (0.5 + N / (2.0 * (2.0 + sigma)) - rep.b) * p;
  rep.weight_integrability = rep.b * pprime;

  char buf[160];
  auto line = [&](bool ok, const char* fmt, double v) {
    std::snprintf(buf, sizeof(buf), fmt, v);
    rep.lines.push_back(std::string(ok ? "ok   " : "FAIL ") + buf);
    return ok;
  };
  bool ok = true;
  ok &= line(rep.interval_nonempty,
             "weight interval nonempty: 1/2 + N/(2(2+sigma)) = %.6f > 1",
             0.5 + N / (2.0 * (2.0 + sigma)));
  ok &= line(rep.b > rep.b_lo && rep.b < rep.b_hi,
             "chosen weight inside interval: b = %.6f", rep.b);
  ok &= line(rep.time_integrability > 1.0,
             "decay integrable in time: (1/2 + N/(2(2+sigma)) - b) p = %.6f "
             "> 1",
             rep.time_integrability);
  ok &= line(rep.weight_integrability > 1.0,
             "weight integrable against the dual power: b p' = %.6f > 1",
             rep.weight_integrability);
  rep.pass = ok;
  return rep;
}

}  // namespace mnflow
