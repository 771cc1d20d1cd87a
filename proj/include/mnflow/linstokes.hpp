#pragma once

#include <array>
#include <memory>
#include <stdexcept>

#include "mnflow/field.hpp"
#include "mnflow/params.hpp"
#include "mnflow/spectral.hpp"

namespace mnflow {

// Resolvent system near-singular at the requested lambda.
class SpectrumError : public std::runtime_error {
 public:
  explicit SpectrumError(const std::string& m) : std::runtime_error(m) {}
};

// Exact exponential of the longitudinal 2x2 mode block
//   M = [[0, -i rho |xi|], [-i (P'/rho)|xi|, -a]],  a = (2mu+nu)/rho xi^2,
// evaluated in the overflow-safe eigen-factored form (both exponents have
// nonpositive real part; the sinch factor switches to a series near the
// defective double root).  The entries satisfy E00, E11 real and
// E01 = i s01, E10 = i s10 with s01, s10 real; tr is the transverse heat
// factor exp(-(mu/rho) xi^2 t).
struct ModePropagator {
  double e00 = 1.0, e11 = 1.0;
  double s01 = 0.0, s10 = 0.0;
  double tr = 1.0;
};
ModePropagator mode_exponential(const ModelParams& params, double xi2,
                                double t);

// Precomputed e^{-shift t} e^{At} over all modes of one box; applies in
// place to a spectral state.
class BoxPropagator {
 public:
  BoxPropagator(const ModelParams& params, const DomainSpec& box, double t,
                double shift = 0.0);
  void apply(Spec& th, Spec& v1, Spec& v2, Spec& v3) const;
  double time() const { return t_; }

 private:
  const SpectralTransform* tf_;
  double t_;
  std::vector<ModePropagator> modes_;
};

// Generator action on one Fourier mode (theta-hat, v-hat).
void generator_mode(const ModelParams& params, const std::array<double, 3>& xi,
                    const Cplx& th, const std::array<Cplx, 3>& v, Cplx& dth,
                    std::array<Cplx, 3>& dv);

// Linearized operator about the quiet state: on the box it acts per Fourier
// mode; on the shell it is the assembled second-order matrix on (theta, w)
// with Dirichlet velocity rows.  Radial time stepping is implicit trapezoid
// with cached factorizations per step size.
class LinearOp {
 public:
  LinearOp(const ModelParams& params, const DomainSpec& domain);
  ~LinearOp();
  LinearOp(const LinearOp&) = delete;
  LinearOp& operator=(const LinearOp&) = delete;

  const ModelParams& params() const { return params_; }
  const DomainSpec& domain() const { return domain_; }

  FieldState apply(const FieldState& s) const;  // generator action

  // One implicit-trapezoid step of d/dt s = (A - shift) s + f (radial only);
  // pass null sources for the homogeneous problem.
  FieldState cn_step(double shift, double dt, const FieldState& s,
                     const FieldState* f0, const FieldState* f1) const;

 private:
  ModelParams params_;
  DomainSpec domain_;
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct ResolventResult {
  // Real and imaginary parts of the complex solution field; for real
  // lambda and real data the *_im fields vanish up to roundoff.
  Scalar zeta_re, zeta_im;
  Vec w_re, w_im;
  double residual = 0.0;  // relative, against the data norm
};

// Solve  lambda zeta + rho* div w = f,
//        rho* lambda w - Div(mu D(w) + nu div w I) + P'(rho*) grad zeta = g.
ResolventResult resolvent_solve(const LinearOp& op, Cplx lambda,
                                const Scalar& f, const Vec& g);

// Same system on a single mode; exposed for direct checks.
void resolvent_mode(const ModelParams& params, const std::array<double, 3>& xi,
                    Cplx lambda, Cplx fhat, const std::array<Cplx, 3>& ghat,
                    Cplx& zeta, std::array<Cplx, 3>& w);

FieldState semigroup_apply(const LinearOp& op, double t, const FieldState& s0);
FieldState shifted_semigroup_apply(const LinearOp& op, double lambda1,
                                   double t, const FieldState& s0);

// Rightmost real part of the generator spectrum.  Box: closed form over
// modes (zero, attained at xi = 0).  Shell: shift-invert Arnoldi on the
// active dofs with the conserved-mass kernel excluded, so the reported
// abscissa is that of the decaying part of the flow.
double spectral_abscissa_estimate(const LinearOp& op);
double default_lambda1(const LinearOp& op);

// All eigenvalues of the assembled radial matrix restricted to active dofs
// (frozen Dirichlet endpoints removed); dense, validation aid.
std::vector<Cplx> radial_dense_eigenvalues(const LinearOp& op);

// Quadratic energy (1/2) int rho*|w|^2 + (P'(rho*)/rho*) theta^2 and its
// exact production rate -(mu ||grad w||^2 + (mu+nu) ||div w||^2).
double energy(const LinearOp& op, const FieldState& s);
double energy_dissipation_rate(const LinearOp& op, const FieldState& s);

}  // namespace mnflow
