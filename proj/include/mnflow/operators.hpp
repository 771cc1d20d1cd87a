#pragma once

#include "mnflow/field.hpp"
#include "mnflow/spectral.hpp"

namespace mnflow {

// Differential operators.  Box versions are spectral (exact on resolved
// modes, Nyquist zeroed); radial versions use centered second-order
// stencils with one-sided closures at the shell ends.
//
// Index convention throughout: (grad_mat u)[i*3+j] = d u_j / d y_i, so the
// chain rule for the flow map reads grad_x = (I + V0) grad_y with V0 acting
// from the left.

Vec grad(const Scalar& f, const DomainSpec& d);
Scalar divergence(const Vec& u, const DomainSpec& d);
Scalar laplace(const Scalar& f, const DomainSpec& d);

// Full velocity gradient; radial fields embed as u(r) e_r evaluated on the
// positive x-axis, giving diag(u', u/r, u/r).
Mat grad_mat(const Vec& u, const DomainSpec& d);

// Symmetrized gradient D(u) = grad_mat + transpose.
Mat deform_tensor(const Vec& u, const DomainSpec& d);

// All second derivatives H(l,i,j) = d_l d_i u_j (box only).
Hessian hessian(const Vec& u, const DomainSpec& d);

// Radial helpers (second-order): derivative with one-sided ends, and the
// combined viscous operator (2mu+nu)(w'' + 2w'/r - 2w/r^2) on the interior.
Scalar radial_deriv(const Scalar& f, const DomainSpec& d);
Scalar radial_div(const Scalar& w, const DomainSpec& d);  // w' + 2w/r

}  // namespace mnflow
