#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "zslcraft/config.hpp"
#include "zslcraft/errors.hpp"
#include "zslcraft/pipeline.hpp"

namespace zp = zslcraft::pipeline;

int main(int argc, char** argv) {
  CLI::App app{"zslcraft: zero-shot classifiers from crafted rules"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out;
  bool force = false;
  std::size_t threads = 1;
  std::vector<std::string> overrides;

  for (const char* name : {"synth", "craft", "train", "rebalance", "eval"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "run config file")->required();
    sub->add_option("--out", out, "output path (directory for synth)");
    sub->add_flag("--force", force, "overwrite existing outputs");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--set", overrides, "key=value override")->allow_extra_args(false);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const zp::RunConfig config = zp::apply_overrides(zp::load_config(config_path), overrides);
    zp::CommandOptions options;
    if (!out.empty()) options.out = out;
    options.force = force;
    options.threads = threads;

    zp::CommandResult result;
    if (command == "synth") result = zp::cmd_synth(config, options);
    else if (command == "craft") result = zp::cmd_craft(config, options);
    else if (command == "train") result = zp::cmd_train(config, options);
    else if (command == "rebalance") result = zp::cmd_rebalance(config, options);
    else result = zp::cmd_eval(config, options);

    for (const auto& path : result.outputs) std::cout << "wrote " << path.string() << '\n';
    return 0;
  } catch (const zslcraft::Error& e) {
    std::cerr << "zslcraft " << command << ": " << e.what() << '\n';
    return zp::exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "zslcraft " << command << ": " << e.what() << '\n';
    return 3;
  }
}
