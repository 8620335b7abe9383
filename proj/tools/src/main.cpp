#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "infodense_cli/commands.hpp"

namespace {

using infodense::cli::RunConfig;

struct Subcommand {
  const char* name;
  const char* help;
  void (*run)(const RunConfig&);
};

constexpr Subcommand kSubcommands[] = {
    {"ingest", "load, align and normalize raw CSV readings", infodense::cli::cmd_ingest},
    {"idfield", "pairwise information density fields (eigen phase and/or MI)", infodense::cli::cmd_idfield},
    {"select", "rank sensors and choose the physical subset", infodense::cli::cmd_select},
    {"train", "train virtual sensors on the selected subset", infodense::cli::cmd_train},
    {"evaluate", "score a checkpoint on the held-out rows", infodense::cli::cmd_evaluate},
    {"pipeline", "select, train and evaluate, optionally over a k sweep", infodense::cli::cmd_pipeline},
    {"cmi", "cross-modality density table and inference", infodense::cli::cmd_cmi},
    {"synth", "write a synthetic field with ground truth", infodense::cli::cmd_synth},
};

std::string flag_name(std::string key) {
  for (char& c : key) {
    if (c == '_') c = '-';
  }
  return "--" + key;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"infodense: information density measures and virtual sensing"};
  app.require_subcommand(1);

  const nlohmann::json defaults = infodense::cli::default_config_json();
  std::string config_path;
  std::map<std::string, std::string> values;
  std::map<std::string, std::vector<std::pair<std::string, CLI::Option*>>> options;
  for (const auto& sub : kSubcommands) {
    CLI::App* cmd = app.add_subcommand(sub.name, sub.help);
    cmd->add_option("--config", config_path, "JSON run configuration file");
    for (const auto& item : defaults.items()) {
      options[sub.name].emplace_back(
          item.key(), cmd->add_option(flag_name(item.key()), values[item.key()], "override '" + item.key() + "'"));
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  const std::string name = chosen->get_name();
  std::map<std::string, std::string> overrides;
  for (const auto& [key, option] : options.at(name)) {
    if (option->count() > 0) overrides[key] = values[key];
  }

  try {
    const RunConfig config = infodense::cli::load_config(config_path, overrides);
    for (const auto& sub : kSubcommands) {
      if (name == sub.name) sub.run(config);
    }
    std::cout << name << ": wrote " << config.output_dir << " (config " << config.hash << ")\n";
    return 0;
  } catch (const infodense::Error& e) {
    std::cerr << "infodense " << name << ": " << e.what() << '\n';
    return infodense::cli::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "infodense " << name << ": internal error: " << e.what() << '\n';
    return 1;
  }
}
