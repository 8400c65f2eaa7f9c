#include "libra/builtin_systems.hpp"
#include "libra/scenario.hpp"

#include <CLI11.hpp>

#include <iomanip>
#include <iostream>

using namespace libra;

namespace {

int list_systems(bool as_json) {
  nlohmann::json cat = builtin_catalog();
  if (as_json) {
    std::cout << cat.dump(2) << '\n';
    return 0;
  }
  for (const auto& s : cat) {
    std::cout << s["name"].get<std::string>() << "  (n = " << s["dimension"].get<int>()
              << (s["reversible"].get<bool>() ? ", reversible" : ", not reversible") << ")\n"
              << "    " << s["description"].get<std::string>() << '\n';
    for (const auto& p : s["parameters"])
      std::cout << "    " << std::left << std::setw(10) << p["name"].get<std::string>() << std::setw(10)
                << p["default"].get<double>() << p["description"].get<std::string>() << '\n';
    std::cout << "    seed: " << s["recommended_seed"].get<std::string>() << "\n\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reversibility and reduced-dynamics experiments on built-in Hamiltonian systems"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string config_path, out_dir, plots = "none";
  std::uint64_t seed = 0;
  int jobs = 1;
  bool as_json = false;

  auto* run = app.add_subcommand("run", "run a scenario and write CSV artifacts");
  run->add_option("--config", config_path, "scenario file (JSON)")->required()->check(CLI::ExistingFile);
  auto* out_opt = run->add_option("--out", out_dir, "output directory (overrides the config)");
  auto* seed_opt = run->add_option("--seed", seed, "RNG seed (overrides the config)");
  run->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  run->add_option("--plots", plots, "static plot files")->check(CLI::IsMember({"none", "svg"}));

  auto* list = app.add_subcommand("list-systems", "list built-in systems and their parameters");
  list->add_flag("--json", as_json, "emit the catalog as JSON");

  auto* validate = app.add_subcommand("validate", "check a scenario file without running it");
  validate->add_option("--config", config_path, "scenario file (JSON)")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*list) return list_systems(as_json);

    ScenarioConfig cfg = load_scenario(config_path);
    if (*validate) {
      std::cout << "ok: " << cfg.tasks.size() << " task(s) in scenario '" << cfg.name << "'\n";
      return 0;
    }

    if (*seed_opt) cfg.seed = seed;
    RunOptions opt;
    opt.out_dir = *out_opt ? out_dir : cfg.output_dir;
    opt.jobs = jobs;
    opt.plots = plots == "svg" ? PlotMode::Svg : PlotMode::None;
    RunReport rep = run_scenario(cfg, opt);
    for (const auto& it : rep.items) {
      std::cout << std::left << std::setw(28) << it.id << std::setw(14) << to_string(it.status);
      int fails = 0;
      for (const auto& r : it.rows) fails += r.verdict == "fail";
      std::cout << it.rows.size() << " rows, " << fails << " failed";
      if (!it.message.empty()) std::cout << "  " << it.message;
      std::cout << '\n';
    }
    std::cout << "report: " << (opt.out_dir / "report.csv").string() << "  (" << std::fixed
              << std::setprecision(2) << rep.wall_clock_seconds << " s)\n";
    return rep.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
