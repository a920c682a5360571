// rgbdgeo command-line tool.
//
// Exit status: 0 success, 1 runtime error (one line "error: <kind>: <message>"
// on stderr), 2 usage error.
#include <iostream>

#include "common.h"
#include "rgbdgeo/config.h"
#include "rgbdgeo/errors.h"

namespace {

// Fills options the user did not pass from the config file. Keys are long
// flag names without the leading dashes.
void ApplyConfig(CLI::App* sub, const rgbdgeo::Config& config) {
  for (CLI::Option* opt : sub->get_options()) {
    if (opt->count() > 0 || opt->get_lnames().empty()) continue;
    const auto value = config.Get(opt->get_lnames().front());
    if (!value) continue;
    opt->add_result(*value);
    opt->run_callback();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geocentric RGB-D geometry, mask forests and evaluation"};
  app.name("rgbdgeo");
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path,
                 std::string("Flat key = value defaults; falls back to $") +
                     rgbdgeo::kConfigEnvVar);

  rgbdgeo::cli::Commands commands;
  rgbdgeo::cli::AddGeometryCommands(app, commands);
  rgbdgeo::cli::AddMaskCommands(app, commands);
  rgbdgeo::cli::AddEvalCommands(app, commands);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << '\n';
    const auto subs = app.get_subcommands();
    std::cerr << (subs.empty() ? app.help() : subs.front()->help());
    return 2;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    const rgbdgeo::Config config = config_path.empty()
                                       ? rgbdgeo::Config::FromEnvironment()
                                       : rgbdgeo::Config::Load(config_path);
    try {
      ApplyConfig(sub, config);
    } catch (const CLI::ParseError& e) {
      throw rgbdgeo::FormatError(std::string("config: ") + e.what());
    }
    commands.at(sub)();
  } catch (const rgbdgeo::cli::UsageError& e) {
    std::cerr << "error: usage: " << e.what() << '\n';
    return 2;
  } catch (const rgbdgeo::Error& e) {
    std::cerr << "error: " << e.kind() << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
