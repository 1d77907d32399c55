#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rpvfield/field/field.hpp"
#include "rpvfield/render/renderer.hpp"
#include "rpvfield/train/trainer.hpp"

namespace rpvfield::cli {

// Bad configuration: unknown key, malformed value, duplicate key.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Scenario { kEasy, kHard, kVhard };

struct RunConfig {
  std::uint64_t seed = 0;
  field::FieldConfig field;
  train::TrainConfig train;
  std::filesystem::path dataset = "dataset";
  std::filesystem::path out = "out";
  std::filesystem::path checkpoint;  // empty: start fresh
  render::ShadingMode mode = render::ShadingMode::kSurface;
  Scenario scenario = Scenario::kEasy;
  int dims = 64;  // generated image size in pixels
  double roughness = 0.5;
  int views = 3;  // generated training views
  int threads = 1;

  // Copies `seed` into the field and trainer configs and validates them.
  void finalize();
  render::SamplingConfig sampling() const { return train.sampling(); }
};

const char* scenario_name(Scenario s);
const char* mode_name(render::ShadingMode m);

struct ConfigKey {
  std::string name;
  std::string help;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

// Every key a config file or flag may set, in display order.
const std::vector<ConfigKey>& config_keys();

// Flat "key = value" lines; '#' starts a comment. Throws ConfigError naming
// the line for unknown or repeated keys and lines without '='.
std::map<std::string, std::string> parse_config_text(const std::string& text, const std::string& source);
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

// Applies values in key order; throws ConfigError for an unknown key or a
// value that does not parse.
void apply_values(RunConfig& config, const std::map<std::string, std::string>& values);

// "key = value" for every key, loadable by read_config_file.
std::string dump(const RunConfig& config);

}  // namespace rpvfield::cli
