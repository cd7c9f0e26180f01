#include "curvelab/cli.hpp"

#include <chrono>
#include <ctime>
#include <iostream>

#include "CLI11.hpp"
#include "curvelab/experiments.hpp"
#include "curvelab/parallel.hpp"

namespace curvelab {

namespace {

std::string utc_stamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"curvelab: numerical experiments for maximal operators and Hilbert transforms along variable curves"};
  app.require_subcommand(1);
  app.add_subcommand("list", "Print the experiment names");

  std::string config_path, out_dir, tag;
  std::uint64_t seed = 0;
  int threads = 0;
  bool check = false;
  std::vector<CLI::App*> runners;
  for (const auto& name : experiment_names()) {
    auto* sub = app.add_subcommand(name, "Run the " + name + " experiment");
    sub->add_option("--config", config_path, "Flat key = value configuration file");
    sub->add_option("--out", out_dir, "Output root (default: config key 'out' or ./results)");
    sub->add_option("--seed", seed, "Override the configured seed");
    sub->add_option("--tag", tag, "Run directory name (default: UTC timestamp)");
    sub->add_option("--threads", threads, "Worker threads; CURVELAB_THREADS takes precedence")->check(CLI::NonNegativeNumber);
    sub->add_flag("--check", check, "Exit with status 3 when an acceptance guard fails");
    runners.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (app.got_subcommand("list")) {
    for (const auto& name : experiment_names()) std::cout << name << "\n";
    return 0;
  }

  CLI::App* chosen = nullptr;
  for (auto* sub : runners)
    if (sub->parsed()) chosen = sub;
  const std::string name = chosen->get_name();

  try {
    ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(config_path);
    if (cfg.has("experiment") && cfg.text("experiment", "") != name)
      throw ConfigError("config names experiment '" + cfg.text("experiment", "") + "' but '" + name + "' was requested");
    cfg.set("experiment", name);
    if (chosen->count("--seed")) cfg.set("seed", std::to_string(seed));
    if (threads > 0) set_thread_count(threads);
    if (out_dir.empty()) out_dir = cfg.text("out", "results");
    if (tag.empty()) tag = cfg.text("tag", "");
    if (tag.empty()) tag = utc_stamp();

    auto started = std::chrono::steady_clock::now();
    SweepResult result = run_experiment(cfg);
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    std::filesystem::path dir = std::filesystem::path(out_dir) / name / tag;
    emit_csv(result, dir / "result.csv");
    emit_fit(result, dir / "fit.json");
    emit_plot(result, dir / "plot.svg");

    std::cout << name << ": " << result.rows.size() << " rows in " << format_real(std::round(seconds * 100) / 100)
              << " s -> " << dir.string() << "\n";
    if (result.fit)
      std::cout << "  fit: slope " << format_real(result.fit->slope) << ", R^2 " << format_real(result.fit->r_squared)
                << "\n";
    for (const auto& c : result.checks)
      std::cout << "  " << (c.passed ? "ok   " : "FAIL ") << c.name << ": " << format_real(c.value) << " "
                << c.relation << " " << format_real(c.bound) << "\n";
    if (check && !result.passed()) return 3;
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace curvelab
