// Batch driver for the cavity, timing, convergence and predictability runs.
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ace/config.hpp"
#include "ace/experiments.hpp"

namespace {

struct Options {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::string scale = "full";
  std::optional<int> jobs;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config_path, "key=value config file")->check(CLI::ExistingFile);
  cmd->add_option("--out-dir", o.out_dir, "output directory")->capture_default_str();
  cmd->add_option("--seed", o.seed, "random seed (overrides run.seed)");
  cmd->add_option("--scale", o.scale, "full or desk")->check(CLI::IsMember({"full", "desk"}))->capture_default_str();
  cmd->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--set", o.overrides, "section.key=value override (repeatable)");
}

ace::RunConfig resolve(const Options& o) {
  ace::RunConfig cfg;
  if (!o.config_path.empty()) {
    ace::apply_config_file(cfg, o.config_path);
  }
  if (o.scale == "desk") {
    ace::apply_desk_scale(cfg);
  }
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("--set expects section.key=value, got '" + kv + "'");
    }
    ace::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.seed) cfg.sim.seed = *o.seed;
  if (o.jobs) cfg.sim.jobs = *o.jobs;
  cfg.sim.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Artificial compressibility ensemble solver for Boussinesq convection"};
  app.require_subcommand(1);
  Options o;
  auto* cavity = app.add_subcommand("cavity", "differentially heated cavity, Ra continuation");
  auto* timing = app.add_subcommand("timing", "ACE versus coupled BDF1 wall clock");
  auto* convergence = app.add_subcommand("convergence", "manufactured-solution convergence study");
  auto* predictability = app.add_subcommand("predictability", "energy, variance, Lyapunov and horizons");
  auto* show = app.add_subcommand("config", "print the resolved configuration");
  for (auto* cmd : {cavity, timing, convergence, predictability, show}) {
    add_common(cmd, o);
  }
  CLI11_PARSE(app, argc, argv);

  try {
    const auto cfg = resolve(o);
    const std::filesystem::path out = o.out_dir;
    std::clog << "run " << ace::run_id(cfg) << '\n';
    int status = 0;
    if (cavity->parsed()) {
      for (const auto& row : ace::run_cavity(cfg, out, std::clog)) {
        if (!row.converged) status = 2;
      }
    } else if (timing->parsed()) {
      ace::run_timing(cfg, out, std::clog);
    } else if (convergence->parsed()) {
      ace::run_convergence(cfg, out, std::clog);
    } else if (predictability->parsed()) {
      ace::run_predictability(cfg, out, std::clog);
    } else if (show->parsed()) {
      ace::write_config_header(std::cout, cfg);
    }
    return status;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
