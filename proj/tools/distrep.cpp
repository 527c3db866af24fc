// Batch front end: simulate | represent | fit | crossval | biomarkers,
// driven by a JSON config with per-run overrides.
#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "distrep/commands.hpp"
#include "distrep/config.hpp"

namespace {

struct GlobalArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out;
};

int run(const std::string& command, const GlobalArgs& args) {
  distrep::RunConfig cfg = distrep::load_config(args.config_path);
  if (args.seed) {
    cfg.seed = *args.seed;
    cfg.cv.seed = *args.seed;
  }
  if (args.threads) cfg.threads = *args.threads;
  if (args.out) cfg.out = *args.out;

  if (command == "simulate") {
    distrep::cmd_simulate(cfg);
  } else if (command == "represent") {
    distrep::cmd_represent(cfg);
  } else if (command == "fit") {
    distrep::cmd_fit(cfg);
  } else if (command == "crossval") {
    const int failures = distrep::cmd_crossval(cfg);
    if (failures > 0) {
      std::fprintf(stderr, "crossval: %d cell(s) failed, partial results kept\n", failures);
      return 4;
    }
  } else if (command == "biomarkers") {
    distrep::cmd_biomarkers(cfg);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributional representation pipeline"};
  app.require_subcommand(1);

  GlobalArgs args;
  app.fallthrough();  // global flags parse in any position
  app.add_option("--config", args.config_path, "JSON config file")->required();
  app.add_option_function<std::uint64_t>(
      "--seed", [&](const std::uint64_t& v) { args.seed = v; }, "override config seed");
  app.add_option_function<int>(
      "--threads", [&](const int& v) { args.threads = v; }, "worker pool size");
  app.add_option_function<std::string>(
      "--out", [&](const std::string& v) { args.out = v; }, "output directory");

  for (const char* name : {"simulate", "represent", "fit", "crossval", "biomarkers"})
    app.add_subcommand(name);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, args);
  } catch (const distrep::config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const distrep::data_error& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 4;
  }
}
