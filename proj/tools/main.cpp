#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "wgf/config.hpp"
#include "wgf/errors.hpp"
#include "wgf/run.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string env_name;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::vector<std::string> checks;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool with_checks) {
  cmd->add_option("--config", flags.config_path, "Path to a key=value config file")
      ->check(CLI::ExistingFile);
  cmd->add_option("--env", flags.env_name,
                  "Environment: scalar, pendulum, or oscillators");
  cmd->add_option("--seed", flags.seed, "Random seed (all streams derive from it)");
  cmd->add_option("--out", flags.out_dir, "Output directory for CSV/JSON artifacts");
  if (with_checks) {
    cmd->add_option("--check", flags.checks,
                    "Check to run (repeatable): gradient, hessian, contraction, "
                    "doeblin, convexity, all");
  }
}

int execute(const std::string& command, const CommonFlags& flags) {
  wgf::RunConfig config;
  if (!flags.config_path.empty()) config = wgf::load_config(flags.config_path);
  config.command = command;
  if (!flags.env_name.empty()) config.env_name = flags.env_name;
  config.seed = flags.seed;
  config.out_dir = flags.out_dir;
  config.checks = flags.checks;
  wgf::resolve(config);
  return wgf::run(config);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Policy optimization over particle and neural policies with geometric "
      "verification checks"};
  app.require_subcommand(1);

  CommonFlags grid_flags, traj_flags, wm_flags, verify_flags;
  add_common(app.add_subcommand("grid", "Grid-based particle policy iteration"),
             grid_flags, false);
  add_common(app.add_subcommand("traj", "Differentiable trajectory optimization"),
             traj_flags, false);
  add_common(app.add_subcommand("wm", "Model-based training with a learned world model"),
             wm_flags, false);
  add_common(app.add_subcommand("verify", "Gradient/Hessian/contraction checks"),
             verify_flags, true);

  CLI11_PARSE(app, argc, argv);

  const CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  const CommonFlags& flags = name == "grid"    ? grid_flags
                             : name == "traj"  ? traj_flags
                             : name == "wm"    ? wm_flags
                                               : verify_flags;
  try {
    return execute(name, flags);
  } catch (const wgf::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const wgf::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 4;
  }
}
