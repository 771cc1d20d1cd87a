#pragma once

#include <stdexcept>

#include "mnflow/field.hpp"
#include "mnflow/params.hpp"

namespace mnflow {

// sup |k| reached 1: the flow map x = y + disp(y) may fold.
class SingularMapError : public std::runtime_error {
 public:
  explicit SingularMapError(const std::string& m) : std::runtime_error(m) {}
};

// Accumulated int ||grad u||_inf dt exceeded the diffeomorphism budget.
class AdmissibilityError : public std::runtime_error {
 public:
  explicit AdmissibilityError(const std::string& m) : std::runtime_error(m) {}
};

// Time-integrated displacement data of a velocity trajectory.
//
// k is the running integral of grad_mat(u) ((i,j) slot = int d u_j / d y_i),
// v0 = (I+k)^{-1} - I, jac = det(I+k).  Matrix sup norms use the pointwise
// Frobenius magnitude, which dominates the operator norm, so the k_sup < 1
// and admissibility gates are conservative.
struct DisplacementField {
  DomainSpec domain;
  Vec disp;
  Mat k;
  Mat v0;
  Scalar jac;
  Hessian k_hess;          // int hessian(u) dt; box only, optional
  double grad_u_int = 0.0; // int ||grad u||_inf dt
  double k_sup = 0.0;      // sup_y |k(y)|_F
  double time = 0.0;
};

// Streaming trapezoid accumulator: push states in time order; current()
// is valid after every push.  Throws SingularMapError / AdmissibilityError
// the moment a gate is crossed.
class DisplacementAccumulator {
 public:
  DisplacementAccumulator(const DomainSpec& d, const ModelParams& params,
                          bool with_hessian = false);
  void push(const FieldState& s);
  const DisplacementField& current() const { return field_; }

 private:
  ModelParams params_;
  DisplacementField field_;
  bool with_hessian_;
  bool have_prev_ = false;
  double prev_time_ = 0.0;
  Vec prev_u_;
  Mat prev_gu_;
  Hessian prev_h_;
  double prev_ginf_ = 0.0;
};

DisplacementField accumulate_displacement(const TrajectoryRecord& traj,
                                          const DomainSpec& d,
                                          const ModelParams& params,
                                          bool with_hessian = false);

// Pointwise (I+k)^{-1} - I by direct 3x3 inversion.
Mat v0_of_k(const Mat& k);
Scalar det_of_k(const Mat& k);

// Directional derivative of V0 in k: dV0[E] = -(I+V0) E (I+V0).
Mat dv0_direction(const Mat& v0, const Mat& E);

struct InjectivityReport {
  int samples = 0;
  double worst_ratio = 0.0;  // min |x(y1)-x(y2)| / |y1-y2| over sampled pairs
  double bound = 0.0;        // 1 - delta
  bool pass = false;
};
InjectivityReport check_injectivity(const DisplacementField& f, int samples,
                                    unsigned long seed, double delta);

// Frame transfer by composition with the flow map.  Pushforward samples the
// Euler field at x = y + disp(y); pullback inverts the map per grid point by
// the fixed-point iteration y <- x - disp(y) (tol 1e-10, at most 50 sweeps)
// and samples the Lagrange field there.  Box interpolation is periodic
// tricubic, shell interpolation linear with clamping.
FieldState pullback_to_euler(const FieldState& lag,
                             const DisplacementField& f);
FieldState pushforward_to_lagrange(const FieldState& eul,
                                   const DisplacementField& f);

double interp_box(const Scalar& f, const DomainSpec& d, double x, double y,
                  double z);
double interp_radial(const Scalar& f, const DomainSpec& d, double r);

}  // namespace mnflow
