#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "mnflow/decay.hpp"
#include "mnflow/scenario.hpp"
#include "mnflow/version.hpp"

namespace {

int log_level_from_env() {
  const char* v = std::getenv("MNFLOW_LOG");
  if (!v) return 1;
  std::string s = v;
  if (s == "quiet" || s == "0") return 0;
  if (s == "debug" || s == "2") return 2;
  return 1;
}

int run_configs(const std::vector<std::string>& configs,
                const std::string& output_dir, int jobs, int log_level) {
  struct Item {
    std::string path;
    int status = 0;
    std::string error;
  };
  std::vector<Item> items;
  for (const auto& c : configs) items.push_back({c, 0, ""});

  auto work = [&](Item& item) {
    try {
      mnflow::Scenario sc = mnflow::load_scenario(item.path);
      auto viols = sc.violations();
      if (!viols.empty()) {
        item.status = 1;
        item.error = viols.front();
        return;
      }
      if (!output_dir.empty())
        sc.output_dir = configs.size() == 1
                            ? output_dir
                            : output_dir + "/" + sc.name;
      item.status = mnflow::run_scenario(sc, log_level);
    } catch (const std::exception& e) {
      item.status = 1;
      item.error = e.what();
    }
  };

  if (jobs <= 1 || items.size() <= 1) {
    for (auto& item : items) work(item);
  } else {
    std::mutex mtx;
    std::size_t next = 0;
    auto worker = [&] {
      for (;;) {
        std::size_t i;
        {
          std::lock_guard<std::mutex> lk(mtx);
          if (next >= items.size()) return;
          i = next++;
        }
        work(items[i]);
      }
    };
    std::vector<std::thread> pool;
    const int k = std::min<int>(jobs, static_cast<int>(items.size()));
    for (int t = 0; t < k; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  int status = 0;
  for (const auto& item : items) {
    if (!item.error.empty())
      std::fprintf(stderr, "mnflow: %s: %s\n", item.path.c_str(),
                   item.error.c_str());
    status = std::max(status, item.status);
  }
  return status;
}

int validate_config(const std::string& path) {
  try {
    mnflow::Scenario sc = mnflow::load_scenario(path);
    auto viols = sc.violations();
    for (const auto& v : viols) std::printf("%s\n", v.c_str());
    if (viols.empty()) {
      std::printf("ok: %s\n", sc.name.c_str());
      return 0;
    }
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "mnflow: %s\n", e.what());
    return 1;
  }
}

int list_scenarios() {
  const char* env = std::getenv("MNFLOW_SCENARIO_DIR");
  std::string dir = env ? env : "tools/scenarios";
  std::error_code ec;
  std::vector<std::string> names;
  for (const auto& entry :
       std::filesystem::directory_iterator(dir, ec)) {
    if (entry.path().extension() == ".json")
      names.push_back(entry.path().filename().string());
  }
  if (ec) {
    std::fprintf(stderr, "mnflow: cannot list %s: %s\n", dir.c_str(),
                 ec.message().c_str());
    return 1;
  }
  std::sort(names.begin(), names.end());
  for (const auto& n : names) std::printf("%s\n", n.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mnflow: compressible-flow linear theory experiments"};
  app.require_subcommand(1);
  const int log_level = log_level_from_env();

  std::vector<std::string> run_configs_arg;
  std::string output_dir;
  int jobs = 1;
  auto* run = app.add_subcommand("run", "execute scenario files");
  run->add_option("configs", run_configs_arg, "scenario JSON files")
      ->required()
      ->expected(-1);
  run->add_option("--output-dir", output_dir, "override the output directory");
  run->add_option("--jobs", jobs, "worker threads for independent scenarios")
      ->check(CLI::PositiveNumber);

  std::string validate_path;
  auto* val = app.add_subcommand("validate", "lint a scenario file");
  val->add_option("config", validate_path, "scenario JSON file")->required();

  auto* lst = app.add_subcommand("list-scenarios", "list bundled scenarios");

  int bk_N = 3;
  double bk_sigma = 0.1, bk_p = 2.0;
  auto* bk = app.add_subcommand("bookkeeping",
                                "check the exponent bookkeeping for (N, "
                                "sigma, p)");
  bk->add_option("--N", bk_N, "space dimension");
  bk->add_option("--sigma", bk_sigma, "integrability shift");
  bk->add_option("--p", bk_p, "time exponent");

  auto* ver = app.add_subcommand("version", "print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (run->parsed())
      return ::run_configs(run_configs_arg, output_dir, jobs, log_level);
    if (val->parsed()) return validate_config(validate_path);
    if (lst->parsed()) return list_scenarios();
    if (bk->parsed()) {
      mnflow::BookkeepingReport rep =
          mnflow::exponent_bookkeeping(bk_N, bk_sigma, bk_p);
      for (const auto& line : rep.lines) std::printf("%s\n", line.c_str());
      std::printf("%s\n", rep.pass ? "pass" : "fail");
      return rep.pass ? 0 : 2;
    }
    if (ver->parsed()) {
      std::printf("mnflow %s\n", mnflow::kVersion);
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "mnflow: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
