#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "uramac/harness.hpp"

namespace {

using uramac::harness::ExperimentConfig;

struct CommonFlags {
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<int> workers;
  std::optional<std::string> out;
  std::optional<std::string> scale;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_file, "JSON experiment config")->required();
  cmd->add_option("--seed", f.seed, "override config seed");
  cmd->add_option("--trials", f.trials, "override trial count");
  cmd->add_option("--workers", f.workers, "override worker count");
  cmd->add_option("--out", f.out, "override output prefix");
  cmd->add_option("--scale", f.scale, "desk or full");
}

int run_kind(const std::string& kind, const CommonFlags& f) {
  ExperimentConfig cfg = ExperimentConfig::load(f.config_file);
  if (cfg.kind != kind)
    throw uramac::harness::ConfigError("config kind '" + cfg.kind + "' does not match subcommand '" +
                                       kind + "'", "kind");
  if (f.seed) cfg.seed = *f.seed;
  if (f.trials) cfg.trials = *f.trials;
  if (f.workers) cfg.workers = *f.workers;
  if (f.out) cfg.out = *f.out;
  if (f.scale) cfg.scale = *f.scale;
  const auto rec = uramac::harness::run(cfg);
  std::printf("%s: wrote %zu data file(s), %.2f s\n", kind.c_str(), rec.data_files.size(),
              rec.wall_seconds);
  for (const auto& df : rec.data_files) std::printf("  %s\n", df.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uramac: unsourced random access over Rayleigh fading - simulator and bounds"};
  app.require_subcommand(1);

  const std::vector<std::string> kinds = {
      "simulate-slot", "simulate-frame", "bound-fbl-ach",  "bound-converse",
      "bound-asymptotic", "optimize-aloha", "ldpc-aloha", "bound-reference"};
  std::map<std::string, CommonFlags> flags;
  for (const auto& k : kinds) {
    auto* cmd = app.add_subcommand(k, "run a '" + k + "' experiment from a config file");
    add_common(cmd, flags[k]);
  }

  std::string fig_name, fig_scale = "desk", fig_out = "out", fig_codes = "codes";
  bool fig_plan_only = false;
  auto* fig = app.add_subcommand("reproduce-figure", "emit the data files behind a figure");
  fig->add_option("name", fig_name,
                  "fig1|fig2|figK2|figK3|figK4|fig_asymp1|fig_asymp2|fig_hard_decision")
      ->required();
  fig->add_option("--scale", fig_scale, "desk (reduced) or full (paper geometry, long-running)");
  fig->add_option("--out", fig_out, "output directory");
  fig->add_option("--codes", fig_codes, "directory with the shipped alist matrices");
  fig->add_flag("--plan-only", fig_plan_only, "print the job list without running");

  CLI11_PARSE(app, argc, argv);

  try {
    for (const auto& k : kinds)
      if (app.got_subcommand(k)) return run_kind(k, flags[k]);
    if (app.got_subcommand("reproduce-figure")) {
      const auto plan = uramac::harness::reproduce_figure(fig_name, fig_scale, fig_out, fig_codes);
      if (plan.scale == "full")
        std::fprintf(stderr, "note: full scale uses the paper geometry and can run for hours\n");
      std::printf("%s (%s): %zu jobs\n", plan.figure.c_str(), plan.scale.c_str(),
                  plan.jobs.size());
      for (const auto& job : plan.jobs)
        std::printf("  %-16s kind=%-18s out=%s\n", job.curve.c_str(), job.config.kind.c_str(),
                    job.config.out.c_str());
      if (!fig_plan_only) uramac::harness::run_figure(plan);
      return 0;
    }
  } catch (const uramac::harness::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const uramac::harness::InfeasibleError& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
