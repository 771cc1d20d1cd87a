#include "mnflow/params.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mnflow {

double PressureLaw::value(double rho) const {
  if (rho <= 0.0) throw std::domain_error("pressure law: rho must be positive");
  return a * std::pow(rho, gamma);
}

double PressureLaw::deriv(double rho) const {
  if (rho <= 0.0) throw std::domain_error("pressure law: rho must be positive");
  return a * gamma * std::pow(rho, gamma - 1.0);
}

double PressureLaw::deriv2(double rho) const {
  if (rho <= 0.0) throw std::domain_error("pressure law: rho must be positive");
  return a * gamma * (gamma - 1.0) * std::pow(rho, gamma - 2.0);
}

double ModelParams::b() const {
  if (b_weight > 0.0) return b_weight;
  return default_b_weight(p_time, sigma);
}

double ModelParams::r_exponent() const {
  return 2.0 * (2.0 + sigma) / (4.0 + sigma);
}

double ModelParams::sound_speed() const {
  return std::sqrt(pressure.deriv(rho_star));
}

std::vector<std::string> ModelParams::violations() const {
  std::vector<std::string> out;
  if (!(mu > 0.0)) out.push_back("mu: requires mu > 0");
  if (!(mu + nu > 0.0)) out.push_back("nu: requires mu + nu > 0");
  if (!(rho_star > 0.0)) out.push_back("rho_star: requires rho_star > 0");
  if (!(pressure.a > 0.0)) out.push_back("pressure.a: requires a > 0");
  if (!(pressure.gamma >= 1.0)) out.push_back("pressure.gamma: requires gamma >= 1");
  if (!(sigma > 0.0 && sigma < 1.0 / 6.0))
    out.push_back("sigma: requires 0 < sigma < 1/6");
  if (!(p_time == 2.0 || std::abs(p_time - (1.0 + sigma)) < 1e-12))
    out.push_back("p_time: requires p_time = 2 or p_time = 1 + sigma");
  if (!(delta_diffeo > 0.0 && delta_diffeo < 1.0))
    out.push_back("delta_diffeo: requires 0 < delta < 1");
  if (!(epsilon > 0.0)) out.push_back("epsilon: requires epsilon > 0");
  return out;
}

void ModelParams::validate() const {
  auto v = violations();
  if (v.empty()) return;
  std::ostringstream msg;
  msg << "invalid parameters:";
  for (const auto& s : v) msg << "\n  " << s;
  throw std::invalid_argument(msg.str());
}

double pressure_deriv(const ModelParams& params, double rho) {
  return params.pressure.deriv(rho);
}

double default_b_weight(double p_time, double sigma) {
  if (p_time == 2.0) return (3.0 - sigma) / (2.0 * (2.0 + sigma));
  if (std::abs(p_time - (1.0 + sigma)) < 1e-12)
    return (1.0 - sigma) / (2.0 * (2.0 + sigma));
  throw std::invalid_argument(
      "default_b_weight: no default for p_time outside {2, 1+sigma}");
}

}  // namespace mnflow
