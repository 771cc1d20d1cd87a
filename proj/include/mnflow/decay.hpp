#pragma once

#include <string>
#include <vector>

#include "mnflow/domain.hpp"
#include "mnflow/field.hpp"
#include "mnflow/params.hpp"

namespace mnflow {

enum class DecayDataKind {
  Generic,     // mass + acoustic + solenoidal content
  Acoustic,    // curl-free velocity, mass perturbation kept
  Solenoidal,  // divergence-free velocity only, zero mass part
};

struct DecayConfig {
  DecayDataKind kind = DecayDataKind::Generic;
  double amp_theta = 1.0;
  double amp_acoustic = 1.0;
  double amp_solenoidal = 1.0;
  double width = 1.25;  // Fourier-space Gaussian width
  double t_min = 1.0;
  double t_max = -1.0;  // <= 0 derives 0.4 L / c (box-crossing guard)
  int points_per_decade = 12;
};

enum class DecayObservable { State, Gradient, TimeDerivative };

const char* to_string(DecayObservable obs);

// Whole-space reference exponent for || . ||_p of data measured in L_q,
// valid for 1 <= q <= 2 <= p < infinity.
double predicted_exponent(DecayObservable obs, double p, double q);

// Band-limited smooth data: Gaussian spectral profile, zero mean, velocity
// split into a curl-free and a divergence-free part.
FieldState decay_initial_data(const DecayConfig& cfg, const DomainSpec& d);

struct DecayFit {
  DecayObservable observable;
  double p = 2.0;
  double q = 1.0;
  std::vector<double> times;
  std::vector<double> values;
  double exponent = 0.0;   // fitted decay rate (sign-flipped log-log slope)
  double r2 = 0.0;
  double predicted = 0.0;
  std::string verdict;  // pass | fail | inconclusive
};

// Evolves the data under the semigroup, samples || . ||_p on a log-spaced
// time grid, and fits the decay rate.  Pass needs the fit within
// 0.15 predicted + 0.05 of the reference exponent and r^2 >= 0.98; a sample
// window shorter than half a decade is inconclusive.
DecayFit run_decay_experiment(const ModelParams& params, const DomainSpec& d,
                              const DecayConfig& cfg, DecayObservable obs,
                              double p, double q);

struct BookkeepingReport {
  int N = 3;
  double sigma = 0.1;
  double p = 2.0;
  std::vector<double> q_exponents;  // {2, 2+sigma, 2N/(N-2)} when defined
  double b = 0.0;
  double b_lo = 0.0;  // admissible weight interval (b_lo, b_hi)
  double b_hi = 0.0;
  bool interval_nonempty = false;
  double time_integrability = 0.0;    // (1/2 + N/(2(2+sigma)) - b) p
  double weight_integrability = 0.0;  // b p'
  bool pass = false;
  std::vector<std::string> lines;  // one human-readable line per check
};

// Checks whether the closure bookkeeping for the iteration scheme balances
// in dimension N with the given (sigma, p).
BookkeepingReport exponent_bookkeeping(int N, double sigma, double p);

}  // namespace mnflow
