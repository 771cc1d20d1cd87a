#pragma once

#include <cmath>

#include "mnflow/field.hpp"
#include "mnflow/lagrangian.hpp"
#include "mnflow/params.hpp"
#include "test_util.hpp"

namespace testutil {

struct Manufactured {
  mnflow::FieldState s;
  mnflow::FieldState dt_s;
  mnflow::DisplacementField dfield;
  mnflow::ModelParams params;
};

// Single-mode trig inputs; every derivative the assembly takes spectrally
// is exact for these fields, so comparisons are limited only by roundoff.
// alpha scales all inputs jointly for smallness studies.
inline Manufactured manufactured_case(const mnflow::DomainSpec& d,
                                      double alpha = 1.0) {
  using namespace mnflow;
  Manufactured m;
  m.params.mu = 0.7;
  m.params.nu = 0.3;
  m.params.rho_star = 1.0;
  m.params.pressure.a = 1.0;
  m.params.pressure.gamma = 1.4;

  m.s = FieldState::zero(d);
  m.dt_s = FieldState::zero(d);
  m.s.theta = eval_box(d, [&](double y1, double y2, double y3) {
    return alpha * 0.03 * std::cos(y1 + 2 * y2 - y3);
  });
  m.s.vel[0] = eval_box(d, [&](double y1, double y2, double) {
    return alpha * 0.02 * std::sin(y1 + y2);
  });
  m.s.vel[1] = eval_box(d, [&](double, double y2, double y3) {
    return alpha * 0.015 * std::cos(y2 + 2 * y3);
  });
  m.s.vel[2] = eval_box(d, [&](double y1, double, double y3) {
    return alpha * -0.01 * std::sin(y1 - y3);
  });
  m.dt_s.vel[0] = eval_box(d, [&](double y1, double y2, double) {
    return alpha * 0.005 * std::cos(y1 + y2);
  });
  m.dt_s.vel[1] = eval_box(d, [&](double y1, double, double y3) {
    return alpha * -0.007 * std::sin(2 * y1 + y3);
  });
  m.dt_s.vel[2] = eval_box(d, [&](double, double y2, double y3) {
    return alpha * 0.004 * std::cos(y2 - y3);
  });

  const double A[3][3] = {{0.010, -0.020, 0.015},
                          {0.005, 0.020, -0.010},
                          {-0.015, 0.010, 0.020}};
  m.dfield.domain = d;
  m.dfield.k = zero_mat(d.points());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      m.dfield.k[i * 3 + j] = eval_box(d, [&](double y1, double y2, double y3) {
        return alpha * A[i][j] * std::cos(y1 - y2 + y3);
      });
  m.dfield.v0 = v0_of_k(m.dfield.k);
  m.dfield.jac = det_of_k(m.dfield.k);
  m.dfield.disp = Vec(3, Scalar(d.points(), 0.0));
  for (int l = 0; l < 3; ++l)
    for (int i = l; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double b = 0.002 * ((l + 1) * (i + 1) + 3 * (j + 1));
        m.dfield.k_hess.slot(Hessian::pair_index(l, i), j) =
            eval_box(d, [&](double, double y2, double y3) {
              return alpha * b * std::cos(y2 + y3);
            });
      }
  return m;
}

}  // namespace testutil
