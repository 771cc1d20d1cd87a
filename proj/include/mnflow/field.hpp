#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "mnflow/domain.hpp"

namespace mnflow {

// One value per grid point (layout: x-major box index ((ix*n)+iy)*n+iz,
// or the radial node index).
using Scalar = std::vector<double>;

// Velocity-like field: domain.vel_comps() components.
using Vec = std::vector<Scalar>;

// Pointwise 3x3 matrix field, row-major slot i*3+j.
using Mat = std::array<Scalar, 9>;

// Pointwise symmetric-in-(l,i) third-order field H(l,i,j) = d_l d_i u_j;
// 6 unique (l,i) pairs x 3 values of j.
struct Hessian {
  std::array<Scalar, 18> comp;
  bool empty() const { return comp[0].empty(); }
  static int pair_index(int l, int i);
  const Scalar& at(int l, int i, int j) const {
    return comp[pair_index(l, i) * 3 + j];
  }
  Scalar& slot(int pair, int j) { return comp[pair * 3 + j]; }
};

enum class Frame { Euler, Lagrange };

// Density perturbation plus velocity at one instant.
struct FieldState {
  Scalar theta;
  Vec vel;
  Frame frame = Frame::Lagrange;
  double time = 0.0;

  static FieldState zero(const DomainSpec& d, Frame f = Frame::Lagrange,
                         double t = 0.0);
  void check_shape(const DomainSpec& d) const;  // throws std::invalid_argument
  double sup_theta() const;
};

// Sampled trajectory; dt_states hold the time derivative at the same nodes.
struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<FieldState> states;
  std::vector<FieldState> dt_states;

  std::size_t size() const { return times.size(); }
  void check_shape(const DomainSpec& d) const;
};

bool all_finite(const Scalar& f);
bool all_finite(const FieldState& s);

// Linear-algebra helpers on pointwise 3x3 matrices (index p into Mat slots).
std::array<double, 9> mat_at(const Mat& m, std::size_t p);
Mat zero_mat(std::size_t npts);
double det3(const std::array<double, 9>& a);
std::array<double, 9> inv3(const std::array<double, 9>& a);  // throws on |det| ~ 0
std::array<double, 9> mul3(const std::array<double, 9>& a,
                           const std::array<double, 9>& b);
double sup_abs_entry(const std::array<double, 9>& a);

}  // namespace mnflow
