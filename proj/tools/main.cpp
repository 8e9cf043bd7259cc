#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gpn/commands.hpp"

namespace {

struct Flags {
  std::string config;
  std::string data;
  std::string params;
  std::string out = ".";
  std::string task;
  std::uint64_t seed = 0;
  std::vector<std::string> overrides;
};

CLI::App* add_command(CLI::App& app, const std::string& name, const std::string& help, Flags& f,
                      bool needs_data, bool uses_params, bool uses_task) {
  CLI::App* sub = app.add_subcommand(name, help);
  sub->add_option("--config", f.config, "JSON run config")->check(CLI::ExistingFile);
  auto* data = sub->add_option("--data", f.data, "dataset directory");
  if (needs_data) data->required();
  sub->add_option("--out", f.out, "output directory")->capture_default_str();
  if (uses_params) sub->add_option("--params", f.params, "directory with params.bin (default: --out)");
  if (uses_task) sub->add_option("--task", f.task, "ood or misc")->check(CLI::IsMember({"ood", "misc"}));
  sub->add_option("--seed", f.seed, "seed for training, data generation and the split");
  sub->add_option("--set", f.overrides, "override a config key (key=value, repeatable)")
      ->allow_extra_args(false);
  return sub;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph posterior network: training, evaluation and experiments"};
  app.require_subcommand(1);
  Flags f;
  const std::vector<CLI::App*> commands = {
      add_command(app, "train", "train a model and write params, history and resolved config", f, true, false, false),
      add_command(app, "eval", "evaluate saved params and write report.json", f, true, true, true),
      add_command(app, "synth", "generate a synthetic dataset directory", f, false, false, false),
      add_command(app, "ablate", "run the regulariser/activation ablation grid", f, true, false, false),
      add_command(app, "export-latent", "write latent coordinates and evidence per node", f, true, true, false),
      add_command(app, "theory-check", "run the three-clique linear-encoder scenario", f, false, false, false),
  };
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : gpn::kExitError;
  }

  gpn::CommandOptions opts;
  if (!f.config.empty()) opts.config = f.config;
  if (!f.data.empty()) opts.data = f.data;
  if (!f.params.empty()) opts.params = f.params;
  opts.out = f.out;
  if (!f.task.empty()) opts.task = f.task;
  opts.overrides = f.overrides;
  for (CLI::App* sub : commands) {
    if (sub->parsed()) {
      if (sub->count("--seed") > 0) opts.seed = f.seed;
      return gpn::run_command(sub->get_name(), opts, std::cout, std::cerr);
    }
  }
  return gpn::kExitError;
}
