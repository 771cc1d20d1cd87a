#include "mnflow/lagrangian.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "mnflow/operators.hpp"

namespace mnflow {

namespace {

double frob_at(const Mat& m, std::size_t p) {
  double s = 0.0;
  for (int i = 0; i < 9; ++i) s += m[i][p] * m[i][p];
  return std::sqrt(s);
}

double sup_frob(const Mat& m) {
  double out = 0.0;
  for (std::size_t p = 0; p < m[0].size(); ++p)
    out = std::max(out, frob_at(m, p));
  return out;
}

}  // namespace

DisplacementAccumulator::DisplacementAccumulator(const DomainSpec& d,
                                                 const ModelParams& params,
                                                 bool with_hessian)
    : params_(params), with_hessian_(with_hessian) {
  if (with_hessian && d.kind != DomainKind::PeriodicBox)
    throw std::invalid_argument(
        "displacement accumulator: hessian tracking needs a periodic box");
  field_.domain = d;
  const std::size_t np = d.points();
  field_.disp.assign(d.vel_comps(), Scalar(np, 0.0));
  field_.k = zero_mat(np);
  field_.v0 = zero_mat(np);
  field_.jac.assign(np, 1.0);
  if (with_hessian)
    for (auto& c : field_.k_hess.comp) c.assign(np, 0.0);
}

void DisplacementAccumulator::push(const FieldState& s) {
  s.check_shape(field_.domain);
  Mat gu = grad_mat(s.vel, field_.domain);
  double ginf = sup_frob(gu);
  Hessian h;
  if (with_hessian_) h = hessian(s.vel, field_.domain);

  if (have_prev_) {
    double dt = s.time - prev_time_;
    if (!(dt > 0.0))
      throw std::invalid_argument("displacement accumulator: time must increase");
    const std::size_t np = field_.domain.points();
    for (std::size_t c = 0; c < field_.disp.size(); ++c)
      for (std::size_t p = 0; p < np; ++p)
        field_.disp[c][p] += 0.5 * dt * (prev_u_[c][p] + s.vel[c][p]);
    for (int i = 0; i < 9; ++i)
      for (std::size_t p = 0; p < np; ++p)
        field_.k[i][p] += 0.5 * dt * (prev_gu_[i][p] + gu[i][p]);
    if (with_hessian_)
      for (int i = 0; i < 18; ++i)
        for (std::size_t p = 0; p < np; ++p)
          field_.k_hess.comp[i][p] +=
              0.5 * dt * (prev_h_.comp[i][p] + h.comp[i][p]);
    field_.grad_u_int += 0.5 * dt * (prev_ginf_ + ginf);
    field_.time = s.time;

    field_.k_sup = sup_frob(field_.k);
    if (field_.k_sup >= 1.0)
      throw SingularMapError(
          "displacement: sup |k| = " + std::to_string(field_.k_sup) +
          " >= 1, flow map may be singular");
    if (field_.grad_u_int >= params_.delta_diffeo)
      throw AdmissibilityError(
          "displacement: int |grad u|_inf dt = " +
          std::to_string(field_.grad_u_int) + " exceeds delta = " +
          std::to_string(params_.delta_diffeo));
    field_.v0 = v0_of_k(field_.k);
    field_.jac = det_of_k(field_.k);
  } else {
    field_.time = s.time;
  }
  prev_time_ = s.time;
  prev_u_ = s.vel;
  prev_gu_ = std::move(gu);
  if (with_hessian_) prev_h_ = std::move(h);
  prev_ginf_ = ginf;
  have_prev_ = true;
}

DisplacementField accumulate_displacement(const TrajectoryRecord& traj,
                                          const DomainSpec& d,
                                          const ModelParams& params,
                                          bool with_hessian) {
  traj.check_shape(d);
  if (traj.size() == 0)
    throw std::invalid_argument("accumulate_displacement: empty trajectory");
  DisplacementAccumulator acc(d, params, with_hessian);
  for (const auto& s : traj.states) acc.push(s);
  return acc.current();
}

Mat v0_of_k(const Mat& k) {
  const std::size_t np = k[0].size();
  Mat v0 = zero_mat(np);
  for (std::size_t p = 0; p < np; ++p) {
    auto a = mat_at(k, p);
    for (int i = 0; i < 3; ++i) a[i * 3 + i] += 1.0;
    if (std::abs(det3(a)) < 1e-12)
      throw SingularMapError("v0_of_k: det(I+k) vanished");
    auto inv = inv3(a);
    for (int i = 0; i < 3; ++i) inv[i * 3 + i] -= 1.0;
    for (int i = 0; i < 9; ++i) v0[i][p] = inv[i];
  }
  return v0;
}

Scalar det_of_k(const Mat& k) {
  const std::size_t np = k[0].size();
  Scalar jac(np);
  for (std::size_t p = 0; p < np; ++p) {
    auto a = mat_at(k, p);
    for (int i = 0; i < 3; ++i) a[i * 3 + i] += 1.0;
    jac[p] = det3(a);
  }
  return jac;
}

Mat dv0_direction(const Mat& v0, const Mat& E) {
  const std::size_t np = v0[0].size();
  Mat out = zero_mat(np);
  for (std::size_t p = 0; p < np; ++p) {
    auto n = mat_at(v0, p);
    for (int i = 0; i < 3; ++i) n[i * 3 + i] += 1.0;  // I + V0
    auto prod = mul3(mul3(n, mat_at(E, p)), n);
    for (int i = 0; i < 9; ++i) out[i][p] = -prod[i];
  }
  return out;
}

InjectivityReport check_injectivity(const DisplacementField& f, int samples,
                                    unsigned long seed, double delta) {
  InjectivityReport rep;
  rep.samples = samples;
  rep.bound = 1.0 - delta;
  rep.worst_ratio = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  const DomainSpec& d = f.domain;

  if (d.kind == DomainKind::PeriodicBox) {
    std::uniform_int_distribution<int> pick(0, d.n - 1);
    const int n = d.n;
    const double h = d.spacing();
    for (int s = 0; s < samples; ++s) {
      int a[3], b[3];
      do {
        for (int i = 0; i < 3; ++i) {
          a[i] = pick(rng);
          b[i] = pick(rng);
        }
      } while (a[0] == b[0] && a[1] == b[1] && a[2] == b[2]);
      std::size_t pa = (static_cast<std::size_t>(a[0]) * n + a[1]) * n + a[2];
      std::size_t pb = (static_cast<std::size_t>(b[0]) * n + b[1]) * n + b[2];
      double dy2 = 0.0, dx2 = 0.0;
      for (int i = 0; i < 3; ++i) {
        double dy = (a[i] - b[i]) * h;
        // minimum-image separation; displacements are small so the same
        // image pair is the relevant one on the Euler side
        if (dy > 0.5 * d.L) dy -= d.L;
        if (dy < -0.5 * d.L) dy += d.L;
        double dx = dy + f.disp[i][pa] - f.disp[i][pb];
        dy2 += dy * dy;
        dx2 += dx * dx;
      }
      rep.worst_ratio = std::min(rep.worst_ratio, std::sqrt(dx2 / dy2));
    }
  } else {
    std::uniform_int_distribution<int> pick(0, d.nr - 1);
    for (int s = 0; s < samples; ++s) {
      int a, b;
      do {
        a = pick(rng);
        b = pick(rng);
      } while (a == b);
      double dy = (a - b) * d.spacing();
      double dx = dy + f.disp[0][a] - f.disp[0][b];
      rep.worst_ratio = std::min(rep.worst_ratio, std::abs(dx / dy));
    }
  }
  rep.pass = rep.worst_ratio >= rep.bound;
  return rep;
}

double interp_box(const Scalar& f, const DomainSpec& d, double x, double y,
                  double z) {
  const int n = d.n;
  const double h = d.spacing();
  double coord[3] = {x, y, z};
  int base[3];
  double w[3][4];
  for (int a = 0; a < 3; ++a) {
    double s = coord[a] / h;
    double fl = std::floor(s);
    double t = s - fl;
    base[a] = static_cast<int>(fl);
    w[a][0] = -t * (t - 1.0) * (t - 2.0) / 6.0;
    w[a][1] = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    w[a][2] = -(t + 1.0) * t * (t - 2.0) / 2.0;
    w[a][3] = (t + 1.0) * t * (t - 1.0) / 6.0;
  }
  auto wrap = [n](int i) {
    i %= n;
    return i < 0 ? i + n : i;
  };
  double out = 0.0;
  for (int ia = 0; ia < 4; ++ia) {
    int ix = wrap(base[0] + ia - 1);
    for (int ib = 0; ib < 4; ++ib) {
      int iy = wrap(base[1] + ib - 1);
      double wxy = w[0][ia] * w[1][ib];
      for (int ic = 0; ic < 4; ++ic) {
        int iz = wrap(base[2] + ic - 1);
        out += wxy * w[2][ic] *
               f[(static_cast<std::size_t>(ix) * n + iy) * n + iz];
      }
    }
  }
  return out;
}

double interp_radial(const Scalar& f, const DomainSpec& d, double r) {
  const double h = d.spacing();
  double s = (r - d.R0) / h;
  if (s <= 0.0) return f.front();
  if (s >= d.nr - 1.0) return f.back();
  int j = static_cast<int>(std::floor(s));
  double t = s - j;
  return (1.0 - t) * f[j] + t * f[j + 1];
}

namespace {

double sample(const Scalar& f, const DomainSpec& d, const double* pos) {
  if (d.kind == DomainKind::PeriodicBox)
    return interp_box(f, d, pos[0], pos[1], pos[2]);
  return interp_radial(f, d, pos[0]);
}

// Solve y + disp(y) = x by y <- x - disp(y).
void invert_map(const DisplacementField& f, const double* x, double* y) {
  const DomainSpec& d = f.domain;
  const int nc = d.vel_comps();
  for (int c = 0; c < nc; ++c) y[c] = x[c];
  for (int it = 0; it < 50; ++it) {
    double delta = 0.0;
    double ynew[3];
    for (int c = 0; c < nc; ++c) {
      ynew[c] = x[c] - sample(f.disp[c], d, y);
      delta = std::max(delta, std::abs(ynew[c] - y[c]));
    }
    for (int c = 0; c < nc; ++c) y[c] = ynew[c];
    if (delta <= 1e-10) return;
  }
  throw std::runtime_error("pullback: inverse flow map did not converge");
}

}  // namespace

FieldState pullback_to_euler(const FieldState& lag,
                             const DisplacementField& f) {
  const DomainSpec& d = f.domain;
  lag.check_shape(d);
  FieldState out = FieldState::zero(d, Frame::Euler, lag.time);
  const std::size_t np = d.points();
  const int nc = d.vel_comps();
  if (d.kind == DomainKind::PeriodicBox) {
    const int n = d.n;
    const double h = d.spacing();
    for (int ix = 0; ix < n; ++ix)
      for (int iy = 0; iy < n; ++iy)
        for (int iz = 0; iz < n; ++iz) {
          std::size_t p = (static_cast<std::size_t>(ix) * n + iy) * n + iz;
          double x[3] = {ix * h, iy * h, iz * h};
          double y[3];
          invert_map(f, x, y);
          out.theta[p] = interp_box(lag.theta, d, y[0], y[1], y[2]);
          for (int c = 0; c < nc; ++c)
            out.vel[c][p] = interp_box(lag.vel[c], d, y[0], y[1], y[2]);
        }
  } else {
    for (std::size_t p = 0; p < np; ++p) {
      double x[1] = {d.radius(static_cast<int>(p))};
      double y[1];
      invert_map(f, x, y);
      out.theta[p] = interp_radial(lag.theta, d, y[0]);
      out.vel[0][p] = interp_radial(lag.vel[0], d, y[0]);
    }
  }
  return out;
}

FieldState pushforward_to_lagrange(const FieldState& eul,
                                   const DisplacementField& f) {
  const DomainSpec& d = f.domain;
  eul.check_shape(d);
  FieldState out = FieldState::zero(d, Frame::Lagrange, eul.time);
  const int nc = d.vel_comps();
  if (d.kind == DomainKind::PeriodicBox) {
    const int n = d.n;
    const double h = d.spacing();
    for (int ix = 0; ix < n; ++ix)
      for (int iy = 0; iy < n; ++iy)
        for (int iz = 0; iz < n; ++iz) {
          std::size_t p = (static_cast<std::size_t>(ix) * n + iy) * n + iz;
          double x[3] = {ix * h + f.disp[0][p], iy * h + f.disp[1][p],
                         iz * h + f.disp[2][p]};
          out.theta[p] = interp_box(eul.theta, d, x[0], x[1], x[2]);
          for (int c = 0; c < nc; ++c)
            out.vel[c][p] = interp_box(eul.vel[c], d, x[0], x[1], x[2]);
        }
  } else {
    for (std::size_t p = 0; p < d.points(); ++p) {
      double x = d.radius(static_cast<int>(p)) + f.disp[0][p];
      out.theta[p] = interp_radial(eul.theta, d, x);
      out.vel[0][p] = interp_radial(eul.vel[0], d, x);
    }
  }
  return out;
}

}  // namespace mnflow
