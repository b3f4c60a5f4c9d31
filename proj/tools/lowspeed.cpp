// Command-line front end: load scenario files, run the construction with the
// selected check categories, verify any pinned expectations, and write the
// requested artifacts.  Exit status is nonzero exactly when a check fails.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lowspeed/runner.hpp"

namespace {

struct ScenarioOutput {
  std::string text;  // console output, printed in argument order
  bool ok = false;
};

ScenarioOutput run_one(const std::string& path, const lowspeed::RunOptions& ropt,
                       const std::set<std::string>& emits, const std::string& outdir,
                       bool verbose) {
  ScenarioOutput out;
  std::ostringstream os;
  try {
    auto t0 = std::chrono::steady_clock::now();
    lowspeed::Scenario sc = lowspeed::load_scenario(path);
    lowspeed::RunOptions eff = ropt;
    eff.emit_dot = emits.count("dot") != 0;
    lowspeed::RunResult res = lowspeed::run_scenario(sc, eff);
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
    os << sc.name << ": " << res.checks.lines.size() << " checks, " << res.checks.failures()
       << " failure(s), " << ms << " ms\n";
    for (const auto& l : res.checks.lines)
      if (!l.pass || verbose)
        os << "  " << (l.pass ? "pass" : "FAIL") << " [" << l.category << "] " << l.name
           << ": " << l.detail << "\n";
    if (!emits.empty()) {
      std::filesystem::path dir = std::filesystem::path(outdir) / sc.name;
      std::filesystem::create_directories(dir);
      for (const auto& [name, body] : res.artifacts) {
        bool wanted = (name == "trace.tsv" && emits.count("trace")) ||
                      (name == "report.txt" && emits.count("report")) ||
                      (name.size() > 4 && name.substr(name.size() - 4) == ".dot" &&
                       emits.count("dot"));
        if (!wanted) continue;
        std::ofstream f(dir / name, std::ios::binary);
        f << body;
        os << "  wrote " << (dir / name).string() << "\n";
      }
    }
    out.ok = res.ok;
  } catch (const std::exception& ex) {
    os << path << ": error: " << ex.what() << "\n";
    out.ok = false;
  }
  out.text = os.str();
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  if (std::getenv("LOWSPEED_SEED") != nullptr)
    std::cerr << "warning: LOWSPEED_SEED is ignored; runs are deterministic by construction\n";

  CLI::App app{"deterministic priority-tree construction runner"};
  app.require_subcommand(1);

  std::vector<std::string> paths;
  std::int64_t budget = 0;
  std::int64_t sim_budget = 0;
  std::vector<std::string> checks;
  std::vector<std::string> emits;
  std::string schedule;
  std::string outdir = "out";
  bool parallel = false;
  bool verbose = false;

  CLI::App* run = app.add_subcommand("run", "run scenarios and their checks");
  run->add_option("scenarios", paths, "scenario JSON files")->required()->expected(-1);
  run->add_option("--budget", budget, "override the stage budget");
  run->add_option("--sim-budget", sim_budget, "override the simulation stage budget");
  run->add_option("--check", checks,
                  "check categories: labels, trees, procedure, truepath, simulation, all")
      ->check(CLI::IsMember({"labels", "trees", "procedure", "truepath", "simulation", "all"}));
  run->add_option("--emit", emits, "artifacts to write: dot, trace, report")
      ->check(CLI::IsMember({"dot", "trace", "report"}));
  run->add_option("--schedule", schedule, "override the expansionary schedule")
      ->check(CLI::IsMember({"paper", "compact"}));
  run->add_option("--outdir", outdir, "artifact output directory");
  run->add_flag("--parallel", parallel, "run scenarios concurrently (outputs stay ordered)");
  run->add_flag("-v,--verbose", verbose, "print passing check lines too");

  std::vector<std::string> cal_paths;
  CLI::App* cal = app.add_subcommand("calibrate", "measure cost constants for a scenario");
  cal->add_option("scenarios", cal_paths, "scenario JSON files")->required()->expected(-1);
  cal->add_option("--budget", budget, "override the stage budget");
  cal->add_option("--sim-budget", sim_budget, "override the simulation stage budget");

  CLI11_PARSE(app, argc, argv);

  lowspeed::RunOptions ropt;
  ropt.budget_override = budget;
  ropt.sim_budget_override = sim_budget;
  for (const auto& c : checks) ropt.categories.insert(c);
  if (schedule == "paper") ropt.schedule_override = lowspeed::Schedule::paper();
  if (schedule == "compact") ropt.schedule_override = lowspeed::Schedule::compact();

  if (run->parsed()) {
    std::set<std::string> emit_set(emits.begin(), emits.end());
    bool all_ok = true;
    if (parallel && paths.size() > 1) {
      std::vector<std::future<ScenarioOutput>> futs;
      futs.reserve(paths.size());
      for (const auto& p : paths)
        futs.push_back(std::async(std::launch::async, run_one, p, ropt, emit_set, outdir,
                                  verbose));
      for (auto& f : futs) {
        ScenarioOutput so = f.get();
        std::cout << so.text;
        all_ok = all_ok && so.ok;
      }
    } else {
      for (const auto& p : paths) {
        ScenarioOutput so = run_one(p, ropt, emit_set, outdir, verbose);
        std::cout << so.text;
        all_ok = all_ok && so.ok;
      }
    }
    return all_ok ? 0 : 1;
  }

  // calibrate
  for (const auto& p : cal_paths) {
    try {
      lowspeed::Scenario sc = lowspeed::load_scenario(p);
      lowspeed::Calibration c = lowspeed::calibrate_scenario(sc, ropt);
      std::cout << sc.name << ": sim_cost_coeff=" << c.sim_cost_coeff
                << " watch_coeff=" << c.watch_coeff << " watch_exp=" << c.watch_exp
                << "\nsuggested \"expected\" block:\n" << c.suggested << "\n";
    } catch (const std::exception& ex) {
      std::cout << p << ": error: " << ex.what() << "\n";
      return 1;
    }
  }
  return 0;
}
