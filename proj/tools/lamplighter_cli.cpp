#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "lamplighter/cli.hpp"
#include "lamplighter/config.hpp"

namespace {

struct Subcommand {
  CLI::App* app;
  std::string op;
  std::map<std::string, std::string> values;
  std::string config_path;
};

void add_options(Subcommand& sub) {
  sub.app->add_option("--config", sub.config_path, "flat key = value config file")->check(CLI::ExistingFile);
  for (const auto& opt : lamplighter::option_table())
    sub.app->add_option(std::string("--") + opt.key, sub.values[opt.key], opt.help);
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = lamplighter::cli;
  CLI::App app{"Stationary lamplighter walks: simulation, exact formulas, scans and oracles"};
  app.require_subcommand(1);

  std::map<std::string, Subcommand> subs;
  const std::pair<const char*, const char*> commands[] = {
      {"simulate", "Monte Carlo runs (returns, local-time, trajectories)"},
      {"exact", "closed forms and series"},
      {"scan", "phase scan over a lambda grid"},
      {"verify", "exhaustive and statistical oracle suites"},
  };
  for (const auto& [name, help] : commands) {
    auto& sub = subs[name];
    sub.app = app.add_subcommand(name, help);
    if (std::string(name) != "scan") {
      std::string ops;
      for (const auto& op : cli::operations(name)) ops += (ops.empty() ? "" : ", ") + op;
      sub.app->add_option("operation", sub.op, "one of: " + ops)->required();
    }
    add_options(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kExitOk : cli::kExitConfig;
  }

  for (auto& [name, sub] : subs) {
    if (!sub.app->parsed()) continue;
    lamplighter::ExperimentConfig config(name, cli::resolve_operation(name, sub.op));
    try {
      if (!sub.config_path.empty()) lamplighter::load_config_file(sub.config_path, config);
      for (const auto& opt : lamplighter::option_table())
        if (sub.app->count(std::string("--") + opt.key) > 0) config.set(opt.key, sub.values[opt.key]);
    } catch (const lamplighter::ConfigError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return cli::kExitConfig;
    }
    return cli::run_command(config, std::cout, std::cerr);
  }
  return cli::kExitConfig;
}
