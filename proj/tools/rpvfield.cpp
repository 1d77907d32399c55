#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>

#include "rpvfield/cli/commands.hpp"
#include "rpvfield/cli/run_config.hpp"
#include "rpvfield/common/error.hpp"

namespace {

using rpvfield::cli::ConfigError;
using rpvfield::cli::RunConfig;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Every config key as a flag on `sub`; given flags land in `flags`.
struct KeyFlags {
  std::string config_file;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;

  void attach(CLI::App& sub) {
    sub.add_option("--config", config_file, "key = value file; flags override it");
    const RunConfig defaults;
    for (const auto& key : rpvfield::cli::config_keys()) {
      options[key.name] =
          sub.add_option("--" + key.name, values[key.name], key.help + " [default: " + key.get(defaults) + "]");
    }
  }

  RunConfig resolve() const {
    RunConfig config;
    if (!config_file.empty()) rpvfield::cli::apply_values(config, rpvfield::cli::read_config_file(config_file));
    std::map<std::string, std::string> given;
    for (const auto& [name, option] : options) {
      if (option->count() > 0) given[name] = values.at(name);
    }
    rpvfield::cli::apply_values(config, given);
    config.finalize();
    return config;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radiance fields with RPV reflectance: scenes, training, rendering and evaluation"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen-scene", "generate a synthetic dataset");
  auto* train = app.add_subcommand("train", "train a field on a dataset");
  auto* render = app.add_subcommand("render", "render one view of a trained field");
  auto* brf = app.add_subcommand("brf-plot", "sweep RPV reflectance over the viewing hemisphere");
  auto* dsm = app.add_subcommand("dsm", "extract a surface model from a trained field");
  auto* eval = app.add_subcommand("eval", "score test views and the surface model");

  std::map<CLI::App*, KeyFlags> flags;
  for (CLI::App* sub : {gen, train, render, brf, dsm, eval}) flags[sub].attach(*sub);

  std::string view;
  render->add_option("--view", view, "view name [default: the scenario key]");

  std::string params, at, sun = "35,0";
  int zenith_steps = 90, azimuth_steps = 360;
  brf->add_option("--params", params, "r,g,b,k,theta,rhoc");
  brf->add_option("--at", at, "x,y,z in normalized field coordinates; queries --checkpoint");
  brf->add_option("--sun", sun, "zenith,azimuth in degrees")->capture_default_str();
  brf->add_option("--zenith-steps", zenith_steps, "zenith rows")->capture_default_str();
  brf->add_option("--azimuth-steps", azimuth_steps, "azimuth columns")->capture_default_str();

  bool against_self = false;
  eval->add_flag("--against-self", against_self, "score the ground truth against itself");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    const RunConfig config = flags.at(sub).resolve();
    if (sub == gen) {
      rpvfield::cli::gen_scene(config);
    } else if (sub == train) {
      rpvfield::cli::train(config);
    } else if (sub == render) {
      rpvfield::cli::render(config, view);
    } else if (sub == brf) {
      rpvfield::cli::BrfRequest request;
      if (!params.empty()) request.params = rpvfield::cli::parse_params(params);
      if (!at.empty()) {
        const auto v = rpvfield::cli::parse_list(at, 3, "--at");
        request.at = rpvfield::Vec3(v[0], v[1], v[2]);
      }
      const auto s = rpvfield::cli::parse_list(sun, 2, "--sun");
      request.sun_zenith_deg = s[0];
      request.sun_azimuth_deg = s[1];
      request.zenith_steps = zenith_steps;
      request.azimuth_steps = azimuth_steps;
      rpvfield::cli::brf_plot(config, request);
    } else if (sub == dsm) {
      rpvfield::cli::dsm(config);
    } else {
      rpvfield::cli::eval(config, against_self);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const rpvfield::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
