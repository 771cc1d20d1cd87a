#include "mnflow/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <memory>
#include <utility>

#include <json.hpp>

#include "mnflow/lagrangian.hpp"
#include "mnflow/linstokes.hpp"
#include "mnflow/nonlinear.hpp"
#include "mnflow/norms.hpp"
#include "mnflow/serialize.hpp"
#include "mnflow/version.hpp"

namespace mnflow {

using nlohmann::json;

const char* to_string(RunMode m) {
  switch (m) {
    case RunMode::LinearDecay: return "linear-decay";
    case RunMode::Picard: return "picard";
    case RunMode::Monitor: return "monitor";
    case RunMode::Bookkeeping: return "bookkeeping";
  }
  return "unknown";
}

RunMode run_mode_from(const std::string& s) {
  if (s == "linear-decay") return RunMode::LinearDecay;
  if (s == "picard") return RunMode::Picard;
  if (s == "monitor") return RunMode::Monitor;
  if (s == "bookkeeping") return RunMode::Bookkeeping;
  throw ScenarioError(
      "mode: must be one of linear-decay, picard, monitor, bookkeeping");
}

namespace {

void expect_keys(const json& j, const std::string& prefix,
                 std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known) throw ScenarioError(prefix + it.key() + ": unknown key");
  }
}

double num_at(const json& j, const std::string& prefix, const char* key,
              double dflt) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_number())
    throw ScenarioError(prefix + key + ": expected a number");
  return j.at(key).get<double>();
}

long int_at(const json& j, const std::string& prefix, const char* key,
            long dflt) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_number_integer())
    throw ScenarioError(prefix + key + ": expected an integer");
  return j.at(key).get<long>();
}

std::string str_at(const json& j, const std::string& prefix, const char* key,
                   const std::string& dflt) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_string())
    throw ScenarioError(prefix + key + ": expected a string");
  return j.at(key).get<std::string>();
}

std::array<double, 3> arr3_at(const json& j, const std::string& prefix,
                              const char* key,
                              const std::array<double, 3>& dflt) {
  if (!j.contains(key)) return dflt;
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 3 || !v[0].is_number() ||
      !v[1].is_number() || !v[2].is_number())
    throw ScenarioError(prefix + key + ": expected an array of 3 numbers");
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

DecayDataKind decay_kind_from(const std::string& s, const std::string& key) {
  if (s == "generic") return DecayDataKind::Generic;
  if (s == "acoustic") return DecayDataKind::Acoustic;
  if (s == "solenoidal") return DecayDataKind::Solenoidal;
  throw ScenarioError(key + ": must be generic, acoustic or solenoidal");
}

std::string iso_utc_now() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void log_info(int level, const std::string& msg) {
  if (level >= 1) std::fprintf(stderr, "mnflow: %s\n", msg.c_str());
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

std::string trim_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError(path + ": cannot open scenario file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ScenarioError(path + ": " + e.what());
  }
  if (!j.is_object()) throw ScenarioError(path + ": top level must be object");
  expect_keys(j, "", {"name", "mode", "seed", "output_dir", "params",
                      "domain", "scheme", "decay", "data", "bookkeeping"});

  Scenario sc;
  sc.name = str_at(j, "", "name", "unnamed");
  sc.mode = run_mode_from(str_at(j, "", "mode", "bookkeeping"));
  sc.seed = static_cast<unsigned long>(int_at(j, "", "seed", 12345));
  sc.output_dir = str_at(j, "", "output_dir", "out");

  if (j.contains("params")) {
    const json& p = j.at("params");
    expect_keys(p, "params.",
                {"mu", "nu", "rho_star", "a", "gamma", "sigma", "p", "b",
                 "lambda1", "delta", "epsilon"});
    sc.params.mu = num_at(p, "params.", "mu", sc.params.mu);
    sc.params.nu = num_at(p, "params.", "nu", sc.params.nu);
    sc.params.rho_star = num_at(p, "params.", "rho_star", sc.params.rho_star);
    sc.params.pressure.a = num_at(p, "params.", "a", sc.params.pressure.a);
    sc.params.pressure.gamma =
        num_at(p, "params.", "gamma", sc.params.pressure.gamma);
    sc.params.sigma = num_at(p, "params.", "sigma", sc.params.sigma);
    sc.params.p_time = num_at(p, "params.", "p", sc.params.p_time);
    sc.params.b_weight = num_at(p, "params.", "b", sc.params.b_weight);
    sc.params.lambda1 = num_at(p, "params.", "lambda1", sc.params.lambda1);
    sc.params.delta_diffeo =
        num_at(p, "params.", "delta", sc.params.delta_diffeo);
    sc.params.epsilon = num_at(p, "params.", "epsilon", sc.params.epsilon);
  }

  if (j.contains("domain")) {
    const json& d = j.at("domain");
    expect_keys(d, "domain.", {"kind", "L", "n", "R0", "R", "nr"});
    std::string kind = str_at(d, "domain.", "kind", "box");
    if (kind == "box")
      sc.domain.kind = DomainKind::PeriodicBox;
    else if (kind == "shell")
      sc.domain.kind = DomainKind::RadialShell;
    else
      throw ScenarioError("domain.kind: must be box or shell");
    sc.domain.L = num_at(d, "domain.", "L", sc.domain.L);
    sc.domain.n = static_cast<int>(int_at(d, "domain.", "n", sc.domain.n));
    sc.domain.R0 = num_at(d, "domain.", "R0", sc.domain.R0);
    sc.domain.R = num_at(d, "domain.", "R", sc.domain.R);
    sc.domain.nr = static_cast<int>(int_at(d, "domain.", "nr", sc.domain.nr));
  }

  if (j.contains("scheme")) {
    const json& s = j.at("scheme");
    expect_keys(s, "scheme.",
                {"T_end", "dt", "max_picard", "contraction_tol",
                 "duhamel_rule", "lambda1", "checkpoint_every",
                 "checkpoint_dir"});
    sc.scheme.T_end = num_at(s, "scheme.", "T_end", sc.scheme.T_end);
    sc.scheme.dt = num_at(s, "scheme.", "dt", sc.scheme.dt);
    sc.scheme.max_picard = static_cast<int>(
        int_at(s, "scheme.", "max_picard", sc.scheme.max_picard));
    sc.scheme.contraction_tol =
        num_at(s, "scheme.", "contraction_tol", sc.scheme.contraction_tol);
    sc.scheme.duhamel_rule =
        str_at(s, "scheme.", "duhamel_rule", sc.scheme.duhamel_rule);
    sc.scheme.lambda1 = num_at(s, "scheme.", "lambda1", sc.scheme.lambda1);
    sc.scheme.checkpoint_every = static_cast<int>(
        int_at(s, "scheme.", "checkpoint_every", sc.scheme.checkpoint_every));
    sc.scheme.checkpoint_dir =
        str_at(s, "scheme.", "checkpoint_dir", sc.scheme.checkpoint_dir);
  }

  if (j.contains("decay")) {
    const json& d = j.at("decay");
    expect_keys(d, "decay.",
                {"kind", "amp_theta", "amp_acoustic", "amp_solenoidal",
                 "width", "t_min", "t_max", "points_per_decade", "cells"});
    sc.decay.kind =
        decay_kind_from(str_at(d, "decay.", "kind", "generic"), "decay.kind");
    sc.decay.amp_theta =
        num_at(d, "decay.", "amp_theta", sc.decay.amp_theta);
    sc.decay.amp_acoustic =
        num_at(d, "decay.", "amp_acoustic", sc.decay.amp_acoustic);
    sc.decay.amp_solenoidal =
        num_at(d, "decay.", "amp_solenoidal", sc.decay.amp_solenoidal);
    sc.decay.width = num_at(d, "decay.", "width", sc.decay.width);
    sc.decay.t_min = num_at(d, "decay.", "t_min", sc.decay.t_min);
    sc.decay.t_max = num_at(d, "decay.", "t_max", sc.decay.t_max);
    sc.decay.points_per_decade = static_cast<int>(int_at(
        d, "decay.", "points_per_decade", sc.decay.points_per_decade));
    if (d.contains("cells")) {
      if (!d.at("cells").is_array())
        throw ScenarioError("decay.cells: expected an array");
      for (const auto& c : d.at("cells")) {
        expect_keys(c, "decay.cells.", {"observable", "p", "q"});
        DecayCell cell;
        cell.observable = str_at(c, "decay.cells.", "observable", "state");
        cell.p = num_at(c, "decay.cells.", "p", 2.0);
        cell.q = num_at(c, "decay.cells.", "q", 1.0);
        sc.decay_cells.push_back(cell);
      }
    }
  }

  if (j.contains("data")) {
    const json& d = j.at("data");
    expect_keys(d, "data.",
                {"kind", "amp_theta", "amp_vel", "width_frac", "center_frac"});
    sc.data.kind = str_at(d, "data.", "kind", sc.data.kind);
    sc.data.amp_theta = num_at(d, "data.", "amp_theta", sc.data.amp_theta);
    sc.data.amp_vel = arr3_at(d, "data.", "amp_vel", sc.data.amp_vel);
    sc.data.width_frac = num_at(d, "data.", "width_frac", sc.data.width_frac);
    sc.data.center_frac =
        arr3_at(d, "data.", "center_frac", sc.data.center_frac);
  }

  if (j.contains("bookkeeping")) {
    const json& b = j.at("bookkeeping");
    expect_keys(b, "bookkeeping.", {"N", "sigma", "p"});
    sc.bookkeeping.N =
        static_cast<int>(int_at(b, "bookkeeping.", "N", sc.bookkeeping.N));
    sc.bookkeeping.sigma =
        num_at(b, "bookkeeping.", "sigma", sc.bookkeeping.sigma);
    sc.bookkeeping.p = num_at(b, "bookkeeping.", "p", sc.bookkeeping.p);
  }

  return sc;
}

std::vector<std::string> Scenario::violations() const {
  std::vector<std::string> out;
  for (const auto& v : params.violations()) out.push_back("params." + v);
  for (const auto& v : domain.violations()) out.push_back("domain." + v);
  if (!(scheme.T_end > 0.0))
    out.push_back("scheme.T_end: requires T_end > 0");
  if (!(scheme.dt > 0.0) || scheme.dt > scheme.T_end)
    out.push_back("scheme.dt: requires 0 < dt <= T_end");
  if (scheme.max_picard < 1)
    out.push_back("scheme.max_picard: requires max_picard >= 1");
  if (!(scheme.contraction_tol > 0.0))
    out.push_back("scheme.contraction_tol: requires contraction_tol > 0");
  if (scheme.duhamel_rule != "trapezoid")
    out.push_back("scheme.duhamel_rule: only 'trapezoid' is implemented");
  if (!(decay.width > 0.0)) out.push_back("decay.width: requires width > 0");
  if (!(decay.t_min > 0.0)) out.push_back("decay.t_min: requires t_min > 0");
  if (decay.t_max > 0.0 && decay.t_max <= decay.t_min)
    out.push_back("decay.t_max: requires t_max > t_min when set");
  if (decay.points_per_decade < 1)
    out.push_back("decay.points_per_decade: requires at least 1");
  for (const auto& c : decay_cells) {
    if (c.observable != "state" && c.observable != "gradient" &&
        c.observable != "time-derivative")
      out.push_back(
          "decay.cells.observable: must be state, gradient or "
          "time-derivative");
    if (!(c.q >= 1.0 && c.q <= 2.0))
      out.push_back("decay.cells.q: requires 1 <= q <= 2");
    if (!(c.p >= 2.0))
      out.push_back("decay.cells.p: requires p >= 2");
  }
  if (data.kind != "gaussian" && data.kind != "zero")
    out.push_back("data.kind: must be gaussian or zero");
  if (!(data.width_frac > 0.0))
    out.push_back("data.width_frac: requires width_frac > 0");
  if ((mode == RunMode::Picard || mode == RunMode::Monitor) &&
      domain.kind != DomainKind::PeriodicBox)
    out.push_back(
        "domain.kind: picard and monitor modes require the periodic box");
  if (bookkeeping.N < 2)
    out.push_back("bookkeeping.N: requires N >= 2");
  if (!(bookkeeping.sigma > 0.0 && bookkeeping.sigma < 1.0 / 6.0))
    out.push_back("bookkeeping.sigma: requires 0 < sigma < 1/6");
  if (std::abs(bookkeeping.p - 2.0) > 1e-12 &&
      std::abs(bookkeeping.p - (1.0 + bookkeeping.sigma)) > 1e-12)
    out.push_back("bookkeeping.p: must be 2 or 1 + sigma");
  return out;
}

FieldState build_initial_data(const Scenario& sc) {
  const DomainSpec& d = sc.domain;
  d.validate();
  FieldState s = FieldState::zero(d, Frame::Lagrange, 0.0);
  if (sc.data.kind == "zero") return s;
  if (d.kind != DomainKind::PeriodicBox)
    throw std::invalid_argument(
        "build_initial_data: gaussian data needs the periodic box");
  const int n = d.n;
  const double h = d.spacing();
  const double w = sc.data.width_frac * d.L;
  const std::array<double, 3> c = {sc.data.center_frac[0] * d.L,
                                   sc.data.center_frac[1] * d.L,
                                   sc.data.center_frac[2] * d.L};
  // summing the 27 nearest images keeps the bump exactly periodic
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      for (int iz = 0; iz < n; ++iz) {
        const std::size_t p = (static_cast<std::size_t>(ix) * n + iy) * n + iz;
        double g = 0.0;
        for (int mx = -1; mx <= 1; ++mx)
          for (int my = -1; my <= 1; ++my)
            for (int mz = -1; mz <= 1; ++mz) {
              const double dx = ix * h - c[0] + mx * d.L;
              const double dy = iy * h - c[1] + my * d.L;
              const double dz = iz * h - c[2] + mz * d.L;
              g += std::exp(-(dx * dx + dy * dy + dz * dz) / (2.0 * w * w));
            }
        s.theta[p] = sc.data.amp_theta * g;
        for (int cc = 0; cc < 3; ++cc) s.vel[cc][p] = sc.data.amp_vel[cc] * g;
      }
  return s;
}

namespace {

json energy_to_json(const EnergyReport& rep) {
  json comps = json::object();
  for (const auto& c : rep.components) comps[c.label] = c.value;
  return json{{"components", comps},
              {"total", rep.total},
              {"threshold", rep.threshold},
              {"small", rep.small}};
}

int run_linear_decay(const Scenario& sc, const std::string& dir, int log) {
  std::vector<DecayCell> cells = sc.decay_cells;
  if (cells.empty())
    cells = {{"state", 2.0, 1.0},
             {"gradient", 2.0, 1.0},
             {"time-derivative", 2.0, 1.0}};
  json fits = json::array();
  std::vector<std::string> csv_names, csv_titles;
  bool all_pass = true;
  for (const auto& cell : cells) {
    DecayObservable obs;
    if (cell.observable == "state")
      obs = DecayObservable::State;
    else if (cell.observable == "gradient")
      obs = DecayObservable::Gradient;
    else
      obs = DecayObservable::TimeDerivative;
    log_info(log, "decay cell " + cell.observable + " p=" + trim_num(cell.p) +
                      " q=" + trim_num(cell.q));
    DecayFit fit =
        run_decay_experiment(sc.params, sc.domain, sc.decay, obs, cell.p,
                             cell.q);
    std::string base = "decay_" + cell.observable + "_p" + trim_num(cell.p) +
                       "_q" + trim_num(cell.q);
    CsvWriter csv(dir + "/" + base + ".csv",
                  {"t [decay.run_decay_experiment]",
                   "norm [linstokes.semigroup_apply|norms.lq_norm]"});
    for (std::size_t i = 0; i < fit.times.size(); ++i)
      csv.row({fit.times[i], fit.values[i]});
    csv_names.push_back(base + ".csv");
    csv_titles.push_back(cell.observable + " p=" + trim_num(cell.p) +
                         " q=" + trim_num(cell.q));
    fits.push_back(json{{"observable", cell.observable},
                        {"p", cell.p},
                        {"q", cell.q},
                        {"exponent", fit.exponent},
                        {"r2", fit.r2},
                        {"predicted", fit.predicted},
                        {"verdict", fit.verdict}});
    if (fit.verdict != "pass") all_pass = false;
    log_info(log, "  fitted " + format_double(fit.exponent) + " predicted " +
                      format_double(fit.predicted) + " -> " + fit.verdict);
  }
  write_json_file(dir + "/decay_fits.json", fits);

  std::ofstream gp(dir + "/decay_plot.gp", std::ios::binary);
  gp << "# log-log decay of evolved norms\n"
     << "set datafile separator ','\n"
     << "set logscale xy\n"
     << "set xlabel 't'\n"
     << "set ylabel 'norm'\n"
     << "set key bottom left\n"
     << "plot \\\n";
  for (std::size_t i = 0; i < csv_names.size(); ++i)
    gp << "  '" << csv_names[i] << "' every ::1 using 1:2 with linespoints"
       << " title '" << csv_titles[i] << "'"
       << (i + 1 < csv_names.size() ? ", \\\n" : "\n");
  return all_pass ? 0 : 2;
}

int run_picard(const Scenario& sc, const std::string& dir, int log) {
  LinearOp op(sc.params, sc.domain);
  FieldState s0 = build_initial_data(sc);
  log_info(log, "picard: " + std::to_string(sc.domain.n) + "^3 box, T=" +
                    trim_num(sc.scheme.T_end) + ", dt=" +
                    trim_num(sc.scheme.dt));
  auto [traj, rep] = picard_fixed_point(op, s0, sc.scheme);

  {
    CsvWriter csv(dir + "/picard_energy.csv",
                  {"component [norms.energy_ET]", "value [norms.energy_ET]"});
    for (const auto& c : rep.final_energy.components)
      csv.row_mixed({c.label, format_double(c.value)});
  }
  {
    CsvWriter csv(
        dir + "/picard_contraction.csv",
        {"iterate [scheme.picard_fixed_point]",
         "diff_energy [norms.energy_ET]",
         "factor [scheme.picard_fixed_point]"});
    for (std::size_t i = 0; i < rep.diff_energies.size(); ++i)
      csv.row_mixed({std::to_string(i + 1),
                     format_double(rep.diff_energies[i]),
                     i == 0 ? "" : format_double(rep.contraction_factors[i - 1])});
  }
  {
    CsvWriter csv(dir + "/trajectory_norms.csv",
                  {"t [scheme.picard_fixed_point]",
                   "pair_L2 [norms.lq_norm_pair]",
                   "pair_L6 [norms.lq_norm_pair]",
                   "dt_pair_L2 [norms.lq_norm_pair]"});
    for (std::size_t k = 0; k < traj.size(); ++k)
      csv.row({traj.times[k], lq_norm_pair(traj.states[k], sc.domain, 2.0),
               lq_norm_pair(traj.states[k], sc.domain, 6.0),
               lq_norm_pair(traj.dt_states[k], sc.domain, 2.0)});
  }
  write_state_bin(dir + "/final_state.bin", traj.states.back(), sc.domain);

  json jrep{{"iterates", rep.iterates},
            {"verdict", rep.verdict},
            {"converged", rep.converged},
            {"initial_norm_total", rep.initial_norm_total}};
  jrep["diff_energies"] = rep.diff_energies;
  jrep["contraction_factors"] = rep.contraction_factors;
  jrep["final_residual"] = rep.final_residual;
  jrep["final_energy"] = energy_to_json(rep.final_energy);
  try {
    DisplacementField f =
        accumulate_displacement(traj, sc.domain, sc.params, false);
    InjectivityReport inj =
        check_injectivity(f, 500, sc.seed, sc.params.delta_diffeo);
    jrep["injectivity"] =
        json{{"worst_ratio", inj.worst_ratio}, {"pass", inj.pass}};
  } catch (const std::exception& e) {
    jrep["injectivity"] = json{{"error", e.what()}};
  }
  write_json_file(dir + "/picard_report.json", jrep);

  std::ofstream gp(dir + "/picard_plot.gp", std::ios::binary);
  gp << "# norms of the converged trajectory over time\n"
     << "set datafile separator ','\n"
     << "set xlabel 't'\n"
     << "set ylabel 'norm'\n"
     << "set logscale y\n"
     << "plot 'trajectory_norms.csv' every ::1 using 1:2 with linespoints "
        "title 'pair L2', \\\n"
     << "     '' every ::1 using 1:3 with linespoints title 'pair L6', \\\n"
     << "     '' every ::1 using 1:4 with linespoints title 'dt pair L2'\n";

  log_info(log, "picard verdict: " + rep.verdict);
  return rep.converged ? 0 : 2;
}

int run_monitor(const Scenario& sc, const std::string& dir, int log) {
  LinearOp op(sc.params, sc.domain);
  FieldState s0 = build_initial_data(sc);
  const double lambda1 = sc.scheme.lambda1 > 0.0 ? sc.scheme.lambda1
                                                 : default_lambda1(op);
  auto solve_with = [&](const TrajectoryRecord* prev) {
    SourceFn src = nullptr;
    std::shared_ptr<DisplacementAccumulator> acc;
    if (prev) {
      acc = std::make_shared<DisplacementAccumulator>(sc.domain, sc.params,
                                                      true);
      src = [prev, acc, &sc](std::size_t k, double, Scalar& F, Vec& G) {
        acc->push(prev->states[k]);
        auto nl = assemble_nonlinear(prev->states[k], prev->dt_states[k],
                                     acc->current(), sc.params);
        F = std::move(nl.F);
        G = std::move(nl.G);
      };
    }
    auto t1 = shifted_solve(op, lambda1, s0, src, sc.scheme.T_end,
                            sc.scheme.dt);
    auto t2 = compensation_solve(op, lambda1, t1);
    return sum_trajectories(t1, t2);
  };
  log_info(log, "monitor: linear sweep");
  TrajectoryRecord a = solve_with(nullptr);
  log_info(log, "monitor: forced sweep");
  TrajectoryRecord b = solve_with(&a);
  MonitorReport rep = estimate_monitor(a, b, sc.domain, sc.params);

  CsvWriter csv(dir + "/monitor.csv",
                {"entry [nonlinear.estimate_monitor]",
                 "lhs [nonlinear.estimate_monitor]",
                 "rhs [nonlinear.estimate_monitor]",
                 "ratio [nonlinear.estimate_monitor]"});
  bool finite = true;
  for (const auto& e : rep.entries) {
    csv.row_mixed({e.label, format_double(e.lhs), format_double(e.rhs),
                   format_double(e.ratio)});
    if (!std::isfinite(e.ratio)) finite = false;
  }
  json jrep{{"max_ratio", rep.max_ratio}, {"note", rep.note}};
  json entries = json::array();
  for (const auto& e : rep.entries)
    entries.push_back(json{{"entry", e.label},
                           {"lhs", e.lhs},
                           {"rhs", e.rhs},
                           {"ratio", e.ratio}});
  jrep["entries"] = entries;
  write_json_file(dir + "/monitor.json", jrep);
  log_info(log, "monitor max ratio: " + format_double(rep.max_ratio));
  return finite ? 0 : 2;
}

int run_bookkeeping(const Scenario& sc, const std::string& dir, int log) {
  BookkeepingReport rep = exponent_bookkeeping(
      sc.bookkeeping.N, sc.bookkeeping.sigma, sc.bookkeeping.p);
  json jrep{{"N", rep.N},
            {"sigma", rep.sigma},
            {"p", rep.p},
            {"q_exponents", rep.q_exponents},
            {"b", rep.b},
            {"b_lo", rep.b_lo},
            {"b_hi", rep.b_hi},
            {"interval_nonempty", rep.interval_nonempty},
            {"time_integrability", rep.time_integrability},
            {"weight_integrability", rep.weight_integrability},
            {"pass", rep.pass},
            {"lines", rep.lines}};
  write_json_file(dir + "/bookkeeping.json", jrep);
  for (const auto& line : rep.lines) log_info(log, line);
  return rep.pass ? 0 : 2;
}

}  // namespace

int run_scenario(const Scenario& sc, int log_level) {
  auto viols = sc.violations();
  if (!viols.empty()) throw ScenarioError(viols.front());
  std::filesystem::create_directories(sc.output_dir);

  json meta{{"name", sc.name},
            {"mode", to_string(sc.mode)},
            {"mnflow_version", kVersion},
            {"started_at", iso_utc_now()}};
  int status = 0;
  switch (sc.mode) {
    case RunMode::LinearDecay:
      status = run_linear_decay(sc, sc.output_dir, log_level);
      break;
    case RunMode::Picard:
      status = run_picard(sc, sc.output_dir, log_level);
      break;
    case RunMode::Monitor:
      status = run_monitor(sc, sc.output_dir, log_level);
      break;
    case RunMode::Bookkeeping:
      status = run_bookkeeping(sc, sc.output_dir, log_level);
      break;
  }
  meta["finished_at"] = iso_utc_now();
  meta["exit_status"] = status;
  write_json_file(sc.output_dir + "/run_meta.json", meta);
  return status;
}

}  // namespace mnflow
