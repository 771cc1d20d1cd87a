#include "mnflow/domain.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mnflow {

DomainSpec DomainSpec::box(double L, int n) {
  DomainSpec d;
  d.kind = DomainKind::PeriodicBox;
  d.L = L;
  d.n = n;
  return d;
}

DomainSpec DomainSpec::shell(double R0, double R, int nr) {
  DomainSpec d;
  d.kind = DomainKind::RadialShell;
  d.R0 = R0;
  d.R = R;
  d.nr = nr;
  return d;
}

std::size_t DomainSpec::points() const {
  if (kind == DomainKind::PeriodicBox)
    return static_cast<std::size_t>(n) * n * n;
  return static_cast<std::size_t>(nr);
}

int DomainSpec::vel_comps() const {
  return kind == DomainKind::PeriodicBox ? 3 : 1;
}

double DomainSpec::spacing() const {
  if (kind == DomainKind::PeriodicBox) return L / n;
  return (R - R0) / (nr - 1);
}

double DomainSpec::radius(int j) const {
  return R0 + j * spacing();
}

double DomainSpec::volume() const {
  if (kind == DomainKind::PeriodicBox) return L * L * L;
  return 4.0 * M_PI / 3.0 * (R * R * R - R0 * R0 * R0);
}

std::vector<std::string> DomainSpec::violations() const {
  std::vector<std::string> out;
  if (kind == DomainKind::PeriodicBox) {
    if (!(L > 0.0)) out.push_back("domain.L: requires L > 0");
    if (!(n >= 8)) out.push_back("domain.n: requires n >= 8");
    if (n % 2 != 0) out.push_back("domain.n: requires even n");
  } else {
    if (!(R0 > 0.0)) out.push_back("domain.R0: requires R0 > 0");
    if (!(R > 4.0 * R0)) out.push_back("domain.R: requires R > 4 R0");
    if (!(nr >= 8)) out.push_back("domain.nr: requires nr >= 8");
  }
  return out;
}

void DomainSpec::validate() const {
  auto v = violations();
  if (v.empty()) return;
  std::ostringstream msg;
  msg << "invalid domain:";
  for (const auto& s : v) msg << "\n  " << s;
  throw std::invalid_argument(msg.str());
}

}  // namespace mnflow
