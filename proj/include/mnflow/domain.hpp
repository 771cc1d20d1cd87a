#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace mnflow {

enum class DomainKind { PeriodicBox, RadialShell };

// Computational domain: either the periodic box [0,L)^3 sampled on an
// n^3 grid, or a radially symmetric shell R0 <= r <= R with nr nodes and
// homogeneous Dirichlet velocity at both ends (outer wall far enough out
// to stand in for the unbounded exterior).
struct DomainSpec {
  DomainKind kind = DomainKind::PeriodicBox;

  // box
  double L = 6.283185307179586;
  int n = 32;

  // shell
  double R0 = 1.0;
  double R = 8.0;
  int nr = 128;

  static DomainSpec box(double L, int n);
  static DomainSpec shell(double R0, double R, int nr);

  std::size_t points() const;   // n^3 or nr
  int vel_comps() const;        // 3 (box) or 1 (radial speed)
  double spacing() const;       // L/n or (R-R0)/(nr-1)
  double radius(int j) const;   // shell node position
  double volume() const;        // L^3 or 4pi/3 (R^3 - R0^3)

  std::vector<std::string> violations() const;
  void validate() const;  // throws std::invalid_argument

  bool operator==(const DomainSpec&) const = default;
};

}  // namespace mnflow
