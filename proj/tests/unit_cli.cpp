#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

RunResult run_cli(const std::string& args) {
  // the binary reads the scenario dir from the environment at run time
  std::string cmd = "MNFLOW_SCENARIO_DIR='" + std::string(MNFLOW_SCENARIO_DIR) +
                    "' " + std::string(MNFLOW_BIN_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  char buf[512];
  while (std::fgets(buf, sizeof(buf), pipe)) r.output += buf;
  int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch_dir(const std::string& leaf) {
  fs::path p = fs::temp_directory_path() /
               ("mnflow_cli_" + std::to_string(::getpid())) / leaf;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_file(const fs::path& p, const std::string& body) {
  std::ofstream out(p, std::ios::binary);
  REQUIRE(out.good());
  out << body;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("version prints the release string") {
  RunResult r = run_cli("version");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("mnflow 0.1.0") != std::string::npos);
}

TEST_CASE("bookkeeping subcommand maps pass/fail to exit codes") {
  RunResult ok = run_cli("bookkeeping --N 3 --sigma 0.1 --p 2");
  CHECK(ok.exit_code == 0);
  CHECK(ok.output.find("ok   ") != std::string::npos);
  CHECK(ok.output.find("pass") != std::string::npos);

  RunResult bad = run_cli("bookkeeping --N 2 --sigma 0.1 --p 2");
  CHECK(bad.exit_code == 2);
  CHECK(bad.output.find("FAIL") != std::string::npos);

  RunResult err = run_cli("bookkeeping --N 3 --sigma 0.5 --p 2");
  CHECK(err.exit_code == 1);
  CHECK(err.output.find("sigma") != std::string::npos);
}

TEST_CASE("no subcommand is a usage error") {
  RunResult r = run_cli("");
  CHECK(r.exit_code == 1);
}

TEST_CASE("validate names the offending key") {
  fs::path dir = scratch_dir("validate");

  write_file(dir / "bad_mu.json", R"({
  "name": "bad-mu",
  "mode": "bookkeeping",
  "params": {"mu": -1.0}
})");
  RunResult r1 = run_cli("validate \"" + (dir / "bad_mu.json").string() + "\"");
  CHECK(r1.exit_code == 1);
  CHECK(r1.output.find("params.mu") != std::string::npos);

  write_file(dir / "bad_sigma.json", R"({
  "name": "bad-sigma",
  "mode": "bookkeeping",
  "params": {"sigma": 0.5}
})");
  RunResult r2 =
      run_cli("validate \"" + (dir / "bad_sigma.json").string() + "\"");
  CHECK(r2.exit_code == 1);
  CHECK(r2.output.find("params.sigma") != std::string::npos);
  CHECK(r2.output.find("1/6") != std::string::npos);

  write_file(dir / "unknown.json", R"({
  "name": "unknown-key",
  "mode": "bookkeeping",
  "paramz": {}
})");
  RunResult r3 =
      run_cli("validate \"" + (dir / "unknown.json").string() + "\"");
  CHECK(r3.exit_code == 1);
  CHECK(r3.output.find("paramz") != std::string::npos);
  CHECK(r3.output.find("unknown key") != std::string::npos);

  write_file(dir / "good.json", R"({
  "name": "good",
  "mode": "bookkeeping"
})");
  RunResult r4 = run_cli("validate \"" + (dir / "good.json").string() + "\"");
  CHECK(r4.exit_code == 0);
  CHECK(r4.output.find("ok: good") != std::string::npos);

  write_file(dir / "broken.json", "{ this is not json");
  RunResult r5 = run_cli("validate \"" + (dir / "broken.json").string() + "\"");
  CHECK(r5.exit_code == 1);
}

TEST_CASE("list-scenarios shows the bundled files") {
  RunResult r = run_cli("list-scenarios");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("standard_decay.json") != std::string::npos);
  CHECK(r.output.find("bookkeeping_n3.json") != std::string::npos);
}

TEST_CASE("run executes a bookkeeping scenario deterministically") {
  fs::path dir = scratch_dir("bookkeeping_run");
  std::string config =
      std::string(MNFLOW_SCENARIO_DIR) + "/bookkeeping_n3.json";
  fs::path out1 = dir / "a", out2 = dir / "b";

  RunResult r1 = run_cli("run \"" + config + "\" --output-dir \"" +
                         out1.string() + "\"");
  CHECK(r1.exit_code == 0);
  REQUIRE(fs::exists(out1 / "bookkeeping.json"));
  REQUIRE(fs::exists(out1 / "run_meta.json"));

  RunResult r2 = run_cli("run \"" + config + "\" --output-dir \"" +
                         out2.string() + "\"");
  CHECK(r2.exit_code == 0);
  CHECK(read_file(out1 / "bookkeeping.json") ==
        read_file(out2 / "bookkeeping.json"));
  CHECK(read_file(out1 / "run_meta.json").find("exit_status") !=
        std::string::npos);
}

TEST_CASE("run on a tiny picard scenario converges in one iterate") {
  fs::path dir = scratch_dir("picard_run");
  write_file(dir / "tiny.json", R"({
  "name": "tiny-picard",
  "mode": "picard",
  "params": {"mu": 0.7, "nu": 0.3, "epsilon": 0.05},
  "domain": {"kind": "box", "L": 6.283185307179586, "n": 8},
  "scheme": {"T_end": 0.2, "dt": 0.05},
  "data": {"kind": "zero"}
})");
  fs::path out = dir / "out";
  RunResult r = run_cli("run \"" + (dir / "tiny.json").string() +
                        "\" --output-dir \"" + out.string() + "\"");
  CHECK(r.exit_code == 0);
  REQUIRE(fs::exists(out / "picard_report.json"));
  std::string rep = read_file(out / "picard_report.json");
  CHECK(rep.find("\"iterates\": 1") != std::string::npos);
  CHECK(rep.find("\"verdict\": \"converged\"") != std::string::npos);
  CHECK(fs::exists(out / "picard_energy.csv"));
  CHECK(fs::exists(out / "picard_contraction.csv"));
  CHECK(fs::exists(out / "trajectory_norms.csv"));
  CHECK(fs::exists(out / "final_state.bin"));
  CHECK(fs::exists(out / "picard_plot.gp"));

  // CSV headers tie each column to the producing module
  std::string csv = read_file(out / "trajectory_norms.csv");
  CHECK(csv.find("[norms.lq_norm_pair]") != std::string::npos);
  CHECK(csv.find("\r\n") == std::string::npos);
}

TEST_CASE("run reruns are byte-identical apart from timestamps") {
  fs::path dir = scratch_dir("determinism");
  write_file(dir / "det.json", R"({
  "name": "det-picard",
  "mode": "picard",
  "params": {"mu": 0.7, "nu": 0.3, "epsilon": 0.05},
  "domain": {"kind": "box", "L": 6.283185307179586, "n": 8},
  "scheme": {"T_end": 0.2, "dt": 0.05},
  "data": {"kind": "gaussian", "amp_theta": 1e-6,
           "amp_vel": [1e-6, -5e-7, 8e-7], "width_frac": 0.12}
})");
  fs::path out1 = dir / "a", out2 = dir / "b";
  RunResult r1 = run_cli("run \"" + (dir / "det.json").string() +
                         "\" --output-dir \"" + out1.string() + "\"");
  RunResult r2 = run_cli("run \"" + (dir / "det.json").string() +
                         "\" --output-dir \"" + out2.string() + "\"");
  CHECK(r1.exit_code == 0);
  CHECK(r2.exit_code == 0);
  for (const char* name :
       {"picard_report.json", "picard_energy.csv", "picard_contraction.csv",
        "trajectory_norms.csv", "final_state.bin", "picard_plot.gp"}) {
    CAPTURE(name);
    CHECK(read_file(out1 / name) == read_file(out2 / name));
  }
}

TEST_CASE("run maps an inconclusive decay verdict to exit 2") {
  fs::path dir = scratch_dir("decay_short");
  write_file(dir / "short.json", R"({
  "name": "short-window",
  "mode": "linear-decay",
  "params": {"mu": 0.5, "nu": 0.2},
  "domain": {"kind": "box", "L": 30.0, "n": 16},
  "decay": {"width": 1.0, "t_min": 1.0, "t_max": 2.0,
            "cells": [{"observable": "state", "p": 2, "q": 1}]}
})");
  fs::path out = dir / "out";
  RunResult r = run_cli("run \"" + (dir / "short.json").string() +
                        "\" --output-dir \"" + out.string() + "\"");
  CHECK(r.exit_code == 2);
  REQUIRE(fs::exists(out / "decay_fits.json"));
  CHECK(read_file(out / "decay_fits.json").find("inconclusive") !=
        std::string::npos);
  CHECK(fs::exists(out / "decay_state_p2_q1.csv"));
  CHECK(fs::exists(out / "decay_plot.gp"));
}

TEST_CASE("run reports malformed configs as errors naming the file") {
  fs::path dir = scratch_dir("malformed");
  write_file(dir / "broken.json", "{ nope");
  RunResult r = run_cli("run \"" + (dir / "broken.json").string() + "\"");
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("broken.json") != std::string::npos);

  write_file(dir / "bad_field.json", R"({
  "name": "bad-field",
  "mode": "picard",
  "scheme": {"dt": "soon"}
})");
  RunResult r2 = run_cli("run \"" + (dir / "bad_field.json").string() + "\"");
  CHECK(r2.exit_code == 1);
  CHECK(r2.output.find("scheme.dt") != std::string::npos);
}
