#include "cli/config.hpp"
#include "cli/plot.hpp"
#include "cli/report.hpp"
#include "cli/runners.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

using namespace psichain::cli;

namespace {

void print_report(const Report& r) {
  std::cout << r.kind << "/" << r.mode << " seed=" << r.seed << " config=" << r.config_hash << " status=" << r.status
            << "\n";
  if (!r.message.empty()) std::cout << "  " << r.message << "\n";
  for (const auto& p : r.properties)
    std::cout << "  [" << (p.pass ? "PASS" : "FAIL") << "] " << p.name << (p.detail.empty() ? "" : ": " + p.detail)
              << "\n";
}

// Small fixed configs exercising nets and Orlicz norms.
const char* const kSelftests[] = {
    R"({"kind": "nets-selftest", "mode": "approx", "seed": 1,
        "grid": {"N": [16, 64], "m": [2, 4, 8]}, "params": {"instances": 200}})",
    R"({"kind": "orlicz-selftest", "mode": "analytic", "seed": 1})",
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"psichain: chaining bounds for empirical processes"};
  app.set_version_flag("--version", std::string(PSICHAIN_VERSION));
  app.require_subcommand(1);

  std::string config_path, out_dir, input;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::optional<double> budget;

  auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
  run->add_option("--config", config_path, "config file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "output directory (overrides output.dir)");
  run->add_option("--seed", seed, "master seed override");
  run->add_option("--threads", threads, "worker threads (0 = hardware)");
  run->add_option("--budget-secs", budget, "wall-clock budget override");

  auto* plot = app.add_subcommand("plot", "render SVG figures from a report");
  plot->add_option("--input", input, "summary JSON written by run")->required()->check(CLI::ExistingFile);
  plot->add_option("--out", out_dir, "figure directory (default: next to the input)");

  auto* self = app.add_subcommand("selftest", "fast internal consistency checks");
  self->add_option("--threads", threads, "worker threads (0 = hardware)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      auto cfg = load_config(config_path);
      if (seed) override_seed(cfg, *seed);
      RunOptions opt;
      opt.threads = threads;
      opt.budget_secs = budget;
      const auto report = run_experiment(cfg, opt);
      const auto dir = out_dir.empty() ? std::filesystem::path(cfg.out_dir) : std::filesystem::path(out_dir);
      const auto files = write_report(report, dir, cfg.prefix);
      print_report(report);
      std::cout << "wrote " << files.back().string() << "\n";
      return exit_status(report);
    }
    if (*plot) {
      const std::filesystem::path in(input);
      const auto dir = out_dir.empty() ? in.parent_path() : std::filesystem::path(out_dir);
      for (const auto& p : plot_report(in, dir)) std::cout << "wrote " << p.string() << "\n";
      return 0;
    }
    int status = 0;
    for (const char* text : kSelftests) {
      RunOptions opt;
      opt.threads = threads;
      const auto report = run_experiment(parse_config(text, "selftest"), opt);
      print_report(report);
      status = std::max(status, exit_status(report));
    }
    return status;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
