#pragma once

#include <string>
#include <vector>

namespace mnflow {

// Barotropic pressure law P(rho) = a * rho^gamma on rho > 0.
struct PressureLaw {
  double a = 1.0;
  double gamma = 1.4;

  double value(double rho) const;
  double deriv(double rho) const;   // throws std::domain_error for rho <= 0
  double deriv2(double rho) const;
};

// Physical and analysis parameters shared by every module.
//
// b_weight <= 0 and lambda1 <= 0 mean "derive the default": b from
// (p_time, sigma), lambda1 from the spectral abscissa of the linear
// operator (2 * max(1, |abscissa|)).
struct ModelParams {
  double mu = 1.0;            // shear viscosity, > 0
  double nu = 0.0;            // bulk-type viscosity, mu + nu > 0
  double rho_star = 1.0;      // reference density, > 0
  PressureLaw pressure;
  double sigma = 0.1;         // in (0, 1/6)
  double p_time = 2.0;        // time-integrability exponent, 2 or 1+sigma
  double b_weight = -1.0;
  double lambda1 = -1.0;
  double delta_diffeo = 0.1;  // admissibility budget for int |grad u|_inf dt
  double epsilon = 1e-3;      // smallness threshold for initial data

  double b() const;           // resolved time-weight exponent
  double r_exponent() const;  // r = 2(2+sigma)/(4+sigma)
  double sound_speed() const; // sqrt(P'(rho_star))

  std::vector<std::string> violations() const;  // empty when valid
  void validate() const;  // throws std::invalid_argument naming each rule
};

// P'(rho) with the positivity check; the law lives in params.pressure.
double pressure_deriv(const ModelParams& params, double rho);

// Default weight exponent: (3-sigma)/(2(2+sigma)) for p=2,
// (1-sigma)/(2(2+sigma)) for p=1+sigma.
double default_b_weight(double p_time, double sigma);

}  // namespace mnflow
