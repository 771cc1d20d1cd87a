#include "mnflow/operators.hpp"

#include <stdexcept>

namespace mnflow {

namespace {

Scalar spectral_axis_deriv(const SpectralTransform& tf, const Spec& fh,
                           int axis) {
  Spec gh(fh.size());
  const auto& xi = tf.xi_axis(axis);
  for (std::size_t m = 0; m < fh.size(); ++m)
    gh[m] = Cplx(0.0, xi[m]) * fh[m];
  return tf.backward(gh);
}

void require_box(const DomainSpec& d, const char* op) {
  if (d.kind != DomainKind::PeriodicBox)
    throw std::invalid_argument(std::string(op) +
                                ": periodic-box domain required");
}

}  // namespace

Vec grad(const Scalar& f, const DomainSpec& d) {
  if (d.kind == DomainKind::RadialShell) return {radial_deriv(f, d)};
  const auto& tf = transform_for(d);
  Spec fh = tf.forward(f);
  Vec g(3);
  for (int a = 0; a < 3; ++a) g[a] = spectral_axis_deriv(tf, fh, a);
  return g;
}

Scalar divergence(const Vec& u, const DomainSpec& d) {
  if (d.kind == DomainKind::RadialShell) {
    if (u.size() != 1)
      throw std::invalid_argument("divergence: radial field has one component");
    return radial_div(u[0], d);
  }
  if (u.size() != 3)
    throw std::invalid_argument("divergence: box field has three components");
  const auto& tf = transform_for(d);
  Spec dh(tf.nmodes(), Cplx(0.0, 0.0));
  for (int a = 0; a < 3; ++a) {
    Spec uh = tf.forward(u[a]);
    const auto& xi = tf.xi_axis(a);
    for (std::size_t m = 0; m < dh.size(); ++m)
      dh[m] += Cplx(0.0, xi[m]) * uh[m];
  }
  return tf.backward(dh);
}

Scalar laplace(const Scalar& f, const DomainSpec& d) {
  if (d.kind == DomainKind::RadialShell) {
    // f'' + 2f'/r on the interior, one-sided at the ends
    Scalar df = radial_deriv(f, d);
    Scalar ddf = radial_deriv(df, d);
    Scalar out(f.size());
    for (std::size_t j = 0; j < f.size(); ++j)
      out[j] = ddf[j] + 2.0 * df[j] / d.radius(static_cast<int>(j));
    return out;
  }
  const auto& tf = transform_for(d);
  Spec fh = tf.forward(f);
  for (std::size_t m = 0; m < fh.size(); ++m) fh[m] *= -tf.xi_norm2(m);
  return tf.backward(fh);
}

Mat grad_mat(const Vec& u, const DomainSpec& d) {
  Mat g;
  if (d.kind == DomainKind::RadialShell) {
    if (u.size() != 1)
      throw std::invalid_argument("grad_mat: radial field has one component");
    const std::size_t np = u[0].size();
    g = zero_mat(np);
    Scalar du = radial_deriv(u[0], d);
    for (std::size_t j = 0; j < np; ++j) {
      double r = d.radius(static_cast<int>(j));
      g[0][j] = du[j];
      g[4][j] = u[0][j] / r;
      g[8][j] = u[0][j] / r;
    }
    return g;
  }
  if (u.size() != 3)
    throw std::invalid_argument("grad_mat: box field has three components");
  const auto& tf = transform_for(d);
  for (int j = 0; j < 3; ++j) {
    Spec uh = tf.forward(u[j]);
    for (int i = 0; i < 3; ++i)
      g[i * 3 + j] = spectral_axis_deriv(tf, uh, i);
  }
  return g;
}

Mat deform_tensor(const Vec& u, const DomainSpec& d) {
  Mat g = grad_mat(u, d);
  Mat out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      out[i * 3 + j] = g[i * 3 + j];
      const Scalar& t = g[j * 3 + i];
      Scalar& o = out[i * 3 + j];
      for (std::size_t p = 0; p < o.size(); ++p) o[p] += t[p];
    }
  return out;
}

Hessian hessian(const Vec& u, const DomainSpec& d) {
  require_box(d, "hessian");
  if (u.size() != 3)
    throw std::invalid_argument("hessian: box field has three components");
  const auto& tf = transform_for(d);
  Hessian h;
  for (int j = 0; j < 3; ++j) {
    Spec uh = tf.forward(u[j]);
    for (int l = 0; l < 3; ++l)
      for (int i = l; i < 3; ++i) {
        Spec sh(uh.size());
        const auto& xl = tf.xi_axis(l);
        const auto& xi = tf.xi_axis(i);
        for (std::size_t m = 0; m < uh.size(); ++m)
          sh[m] = -xl[m] * xi[m] * uh[m];
        h.slot(Hessian::pair_index(l, i), j) = tf.backward(sh);
      }
  }
  return h;
}

Scalar radial_deriv(const Scalar& f, const DomainSpec& d) {
  if (d.kind != DomainKind::RadialShell)
    throw std::invalid_argument("radial_deriv: radial domain required");
  const int nr = d.nr;
  if (f.size() != static_cast<std::size_t>(nr))
    throw std::invalid_argument("radial_deriv: size mismatch");
  const double h = d.spacing();
  Scalar out(nr);
  out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
  for (int j = 1; j < nr - 1; ++j) out[j] = (f[j + 1] - f[j - 1]) / (2.0 * h);
  out[nr - 1] = (3.0 * f[nr - 1] - 4.0 * f[nr - 2] + f[nr - 3]) / (2.0 * h);
  return out;
}

Scalar radial_div(const Scalar& w, const DomainSpec& d) {
  Scalar dw = radial_deriv(w, d);
  Scalar out(w.size());
  for (std::size_t j = 0; j < w.size(); ++j)
    out[j] = dw[j] + 2.0 * w[j] / d.radius(static_cast<int>(j));
  return out;
}

}  // namespace mnflow
