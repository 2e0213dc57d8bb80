// trafoid: oracle reconstruction, simulation, estimation, verification and
// Monte Carlo runs driven by a flat key = value config.

#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "trafoid/config.hpp"
#include "trafoid/error.hpp"
#include "trafoid/run.hpp"

namespace {

const char* type_name(trafoid::ValueType t)
{
  switch (t) {
    case trafoid::ValueType::text:
      return "TEXT";
    case trafoid::ValueType::real:
      return "REAL";
    case trafoid::ValueType::integer:
      return "INT";
    case trafoid::ValueType::boolean:
      return "BOOL";
    case trafoid::ValueType::real_list:
      return "REAL,...";
    case trafoid::ValueType::integer_list:
      return "INT,...";
  }
  return "VALUE";
}

struct Subcommand
{
  trafoid::Mode mode;
  CLI::App* app = nullptr;
  std::string config_path;
  std::map<std::string, std::optional<std::string>> flags;
};

void print_keys(std::ostream& out)
{
  for (const auto& k : trafoid::config_schema()) {
    out << k.key << " (" << type_name(k.type) << ")";
    if (!k.default_value.empty())
      out << " = " << k.default_value;
    out << "\n    " << k.help << "\n";
  }
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{ "Constructive identification of heteroscedastic transformation models" };
  app.set_version_flag("--version", trafoid::version());
  app.require_subcommand(1);

  bool list_keys = false;
  auto* keys_cmd = app.add_subcommand("keys", "List every config key with its type and default");
  keys_cmd->callback([&] { list_keys = true; });

  std::vector<Subcommand> subs;
  subs.reserve(5);
  const std::pair<trafoid::Mode, const char*> modes[] = {
    { trafoid::Mode::oracle, "Reconstruct h from the analytic lambda of a model" },
    { trafoid::Mode::simulate, "Draw a sample CSV from a model" },
    { trafoid::Mode::estimate, "Kernel plug-in estimate of lambda and h from a sample CSV" },
    { trafoid::Mode::verify, "Gronwall suite and closed-form versus IVP cross-check" },
    { trafoid::Mode::mc, "Monte Carlo convergence study of the plug-in estimator" },
  };
  for (const auto& [mode, help] : modes) {
    Subcommand& s = subs.emplace_back();
    s.mode = mode;
    s.app = app.add_subcommand(trafoid::to_string(mode), help);
    s.app->add_option("-c,--config", s.config_path, "Config file of key = value lines");
    for (const auto& k : trafoid::config_schema()) {
      auto& slot = s.flags[k.key];
      s.app->add_option("--" + k.key, slot, k.help)->type_name(type_name(k.type));
    }
    s.app->add_option("--model", s.flags["__model"], "Shorthand for --model.preset");
    s.app->add_option("-o,--output", s.flags["__output"], "Shorthand for --output.dir");
    s.app->add_option("-i,--input", s.flags["__input"], "Shorthand for --input.path");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? trafoid::exit_ok : trafoid::exit_config;
  }

  if (list_keys) {
    print_keys(std::cout);
    return trafoid::exit_ok;
  }

  for (Subcommand& s : subs) {
    if (!s.app->parsed())
      continue;
    try {
      trafoid::RunConfig cfg(s.mode);
      if (!s.config_path.empty())
        cfg = trafoid::RunConfig::parse(s.mode, trafoid::read_file(s.config_path), s.config_path);
      const std::pair<const char*, const char*> shorthands[] = {
        { "__model", "model.preset" }, { "__output", "output.dir" }, { "__input", "input.path" }
      };
      for (const auto& [alias, key] : shorthands)
        if (s.flags[alias])
          cfg.set(key, *s.flags[alias], std::string("--") + key);
      for (const auto& [key, value] : s.flags)
        if (value && key.rfind("__", 0) != 0)
          cfg.set(key, *value, "--" + key);
      return trafoid::run(cfg, std::cerr);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return trafoid::exit_code_for(e);
    }
  }
  return trafoid::exit_unexpected;
}
