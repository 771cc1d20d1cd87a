#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "mnflow/decay.hpp"
#include "mnflow/domain.hpp"
#include "mnflow/params.hpp"
#include "mnflow/scheme.hpp"

namespace mnflow {

// Config problem attributable to one key, e.g. "params.mu: requires mu > 0".
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RunMode { LinearDecay, Picard, Monitor, Bookkeeping };

const char* to_string(RunMode m);
RunMode run_mode_from(const std::string& s);  // throws ScenarioError

// Initial data for the evolution modes: a periodized Gaussian bump, sizes
// relative to the box edge so scenarios stay resolution-independent.
struct DataConfig {
  std::string kind = "gaussian";  // gaussian | zero
  double amp_theta = 0.0;
  std::array<double, 3> amp_vel = {0.0, 0.0, 0.0};
  double width_frac = 0.08;
  std::array<double, 3> center_frac = {0.5, 0.5, 0.5};
};

// One decay measurement cell: which norm of which quantity, against which
// data-space exponent.
struct DecayCell {
  std::string observable;  // state | gradient | time-derivative
  double p = 2.0;
  double q = 1.0;
};

struct BookkeepingConfig {
  int N = 3;
  double sigma = 0.1;
  double p = 2.0;
};

struct Scenario {
  std::string name;
  RunMode mode = RunMode::Bookkeeping;
  ModelParams params;
  DomainSpec domain;
  SchemeConfig scheme;
  DecayConfig decay;
  std::vector<DecayCell> decay_cells;
  DataConfig data;
  BookkeepingConfig bookkeeping;
  unsigned long seed = 12345;
  std::string output_dir = "out";

  std::vector<std::string> violations() const;
};

// Parses and structurally checks a scenario file.  Unknown or ill-typed
// keys throw ScenarioError naming the key; value-range problems are
// reported through violations() instead.
Scenario load_scenario(const std::string& path);

FieldState build_initial_data(const Scenario& sc);

// Executes one scenario, writing artifacts under its output directory.
// Returns the process exit status: 0 ok, 2 verdict failure.  Errors throw.
int run_scenario(const Scenario& sc, int log_level);

}  // namespace mnflow
