#pragma once

#include <map>
#include <string>

#include "mnflow/field.hpp"
#include "mnflow/lagrangian.hpp"
#include "mnflow/params.hpp"

namespace mnflow {

// Pointwise correction operators in the gradient convention
// (gu)_ij = d u_j / d y_i, V0 = (I+k)^{-1} - I:
//   d_div:    tr(V0 gu), the divergence correction div_x v - div_y u
//   d_deform: V0 gu + (V0 gu)^T, the deformation correction (symmetric by
//             construction)
// and their directional derivatives in k along E, via
// dV0[E] = -(I+V0) E (I+V0).
Scalar d_div(const Mat& v0, const Mat& gu);
Mat d_deform(const Mat& v0, const Mat& gu);
Scalar d_div_direction(const Mat& v0, const Mat& E, const Mat& gu);
Mat d_deform_direction(const Mat& v0, const Mat& E, const Mat& gu);

// Right-hand sides of the transformed system.  Requires a periodic box
// (the radial path has no nonlinear stage) and a displacement field that
// carries the accumulated hessian integral for the gradient-of-k terms.
struct NonlinearTerms {
  Scalar F;
  Vec G;
  std::map<std::string, double> diagnostics;  // sup norms of named pieces
};
NonlinearTerms assemble_nonlinear(const FieldState& s, const FieldState& dt_s,
                                  const DisplacementField& dfield,
                                  const ModelParams& params,
                                  bool with_diagnostics = false);
Scalar assemble_F(const FieldState& s, const DisplacementField& dfield,
                  const ModelParams& params);
Vec assemble_G(const FieldState& s, const FieldState& dt_s,
               const DisplacementField& dfield, const ModelParams& params);

// Product-shaped bounding families for the forcing norms, evaluated on one
// trajectory (base entries) or a pair (difference entries via the product
// rule, each factor replaced by its difference in turn while the partner
// keeps the larger base value).  Constants are not asserted; the measured
// lhs/rhs ratio is the output.  In every product the trajectory-gradient
// factor carries the time weight <t>^b and the L_p integration; remaining
// factors enter through their unweighted time sup.
struct MonitorEntry {
  std::string label;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;  // 0 when both sides vanish
};
struct MonitorReport {
  std::vector<MonitorEntry> entries;
  double max_ratio = 0.0;
  std::string note;
};
MonitorReport estimate_monitor(const TrajectoryRecord& a,
                               const TrajectoryRecord& b, const DomainSpec& d,
                               const ModelParams& params);

}  // namespace mnflow
