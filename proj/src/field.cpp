#include "mnflow/field.hpp"

#include <cmath>
#include <stdexcept>

namespace mnflow {

int Hessian::pair_index(int l, int i) {
  if (l > i) std::swap(l, i);
  // (0,0)=0 (0,1)=1 (0,2)=2 (1,1)=3 (1,2)=4 (2,2)=5
  static constexpr int table[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
  return table[l][i];
}

FieldState FieldState::zero(const DomainSpec& d, Frame f, double t) {
  FieldState s;
  s.theta.assign(d.points(), 0.0);
  s.vel.assign(d.vel_comps(), Scalar(d.points(), 0.0));
  s.frame = f;
  s.time = t;
  return s;
}

void FieldState::check_shape(const DomainSpec& d) const {
  if (theta.size() != d.points())
    throw std::invalid_argument("field state: theta size mismatch");
  if (vel.size() != static_cast<std::size_t>(d.vel_comps()))
    throw std::invalid_argument("field state: velocity component count mismatch");
  for (const auto& c : vel)
    if (c.size() != d.points())
      throw std::invalid_argument("field state: velocity size mismatch");
}

double FieldState::sup_theta() const {
  double m = 0.0;
  for (double v : theta) m = std::max(m, std::abs(v));
  return m;
}

void TrajectoryRecord::check_shape(const DomainSpec& d) const {
  if (states.size() != times.size() ||
      (!dt_states.empty() && dt_states.size() != times.size()))
    throw std::invalid_argument("trajectory: length mismatch");
  for (std::size_t i = 0; i < times.size(); ++i) {
    states[i].check_shape(d);
    if (!dt_states.empty()) dt_states[i].check_shape(d);
    if (i > 0 && !(times[i] > times[i - 1]))
      throw std::invalid_argument("trajectory: times must increase");
  }
}

bool all_finite(const Scalar& f) {
  for (double v : f)
    if (!std::isfinite(v)) return false;
  return true;
}

bool all_finite(const FieldState& s) {
  if (!all_finite(s.theta)) return false;
  for (const auto& c : s.vel)
    if (!all_finite(c)) return false;
  return true;
}

std::array<double, 9> mat_at(const Mat& m, std::size_t p) {
  std::array<double, 9> a;
  for (int i = 0; i < 9; ++i) a[i] = m[i][p];
  return a;
}

Mat zero_mat(std::size_t npts) {
  Mat m;
  for (auto& c : m) c.assign(npts, 0.0);
  return m;
}

double det3(const std::array<double, 9>& a) {
  return a[0] * (a[4] * a[8] - a[5] * a[7]) -
         a[1] * (a[3] * a[8] - a[5] * a[6]) +
         a[2] * (a[3] * a[7] - a[4] * a[6]);
}

std::array<double, 9> inv3(const std::array<double, 9>& a) {
  double d = det3(a);
  if (std::abs(d) < 1e-14)
    throw std::runtime_error("inv3: singular 3x3 matrix");
  double id = 1.0 / d;
  return {(a[4] * a[8] - a[5] * a[7]) * id, (a[2] * a[7] - a[1] * a[8]) * id,
          (a[1] * a[5] - a[2] * a[4]) * id, (a[5] * a[6] - a[3] * a[8]) * id,
          (a[0] * a[8] - a[2] * a[6]) * id, (a[2] * a[3] - a[0] * a[5]) * id,
          (a[3] * a[7] - a[4] * a[6]) * id, (a[1] * a[6] - a[0] * a[7]) * id,
          (a[0] * a[4] - a[1] * a[3]) * id};
}

std::array<double, 9> mul3(const std::array<double, 9>& a,
                           const std::array<double, 9>& b) {
  std::array<double, 9> c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += a[i * 3 + k] * b[k * 3 + j];
      c[i * 3 + j] = s;
    }
  return c;
}

double sup_abs_entry(const std::array<double, 9>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace mnflow
