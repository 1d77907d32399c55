#include "rpvfield/cli/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace rpvfield::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ConfigError("bad value for " + key + ": '" + text + "'");
  }
  return value;
}

template <typename T>
std::string format_number(T value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

template <typename T>
ConfigKey number_key(std::string name, std::string help, T RunConfig::*member) {
  return {name, std::move(help), [member, name](RunConfig& c, const std::string& v) {
            c.*member = parse_number<T>(name, v);
          },
          [member](const RunConfig& c) { return format_number(c.*member); }};
}

template <typename T, typename Owner>
ConfigKey nested_key(std::string name, std::string help, Owner RunConfig::*owner, T Owner::*member) {
  return {name, std::move(help),
          [owner, member, name](RunConfig& c, const std::string& v) { c.*owner.*member = parse_number<T>(name, v); },
          [owner, member](const RunConfig& c) { return format_number(c.*owner.*member); }};
}

ConfigKey path_key(std::string name, std::string help, std::filesystem::path RunConfig::*member) {
  return {std::move(name), std::move(help), [member](RunConfig& c, const std::string& v) { c.*member = v; },
          [member](const RunConfig& c) { return (c.*member).string(); }};
}

std::vector<ConfigKey> build_keys() {
  using F = field::FieldConfig;
  using T = train::TrainConfig;
  std::vector<ConfigKey> keys;
  keys.push_back(number_key("seed", "root of every random stream", &RunConfig::seed));
  keys.push_back(nested_key("layers", "trunk layers", &RunConfig::field, &F::trunk_layers));
  keys.push_back(nested_key("width", "trunk width", &RunConfig::field, &F::trunk_width));
  keys.push_back(nested_key("pe_frequencies", "positional encoding frequencies", &RunConfig::field,
                            &F::pe_frequencies));
  keys.push_back(nested_key("skip_at", "trunk layer re-fed the encoding (negative: none)", &RunConfig::field,
                            &F::skip_at));
  keys.push_back(nested_key("lambda", "depth loss weight", &RunConfig::train, &T::lambda));
  keys.push_back(nested_key("pretrain_fraction", "share of iterations with Lambertian shading",
                            &RunConfig::train, &T::pretrain_fraction));
  keys.push_back(nested_key("iterations", "training iterations", &RunConfig::train, &T::iterations));
  keys.push_back(nested_key("batch_rays", "rays per iteration", &RunConfig::train, &T::batch_rays));
  keys.push_back(nested_key("lr", "Adam learning rate", &RunConfig::train, &T::lr));
  keys.push_back(nested_key("lr_decay", "learning rate factor per lr_decay_steps", &RunConfig::train,
                            &T::lr_decay));
  keys.push_back(nested_key("lr_decay_steps", "steps per lr_decay factor", &RunConfig::train,
                            &T::lr_decay_steps));
  keys.push_back(nested_key("n_stratified", "stratified samples per ray", &RunConfig::train, &T::n_stratified));
  keys.push_back(nested_key("n_guided", "guided samples per ray", &RunConfig::train, &T::n_guided));
  keys.push_back(nested_key("guide_sigma", "guided sample spread, normalized units", &RunConfig::train,
                            &T::guide_sigma));
  keys.push_back(nested_key("clip_norm", "global gradient norm clip (0: off)", &RunConfig::train, &T::clip_norm));
  keys.push_back(nested_key("log_every", "steps between log records", &RunConfig::train, &T::log_every));
  keys.push_back(nested_key("checkpoint_every", "steps between checkpoints (0: final only)", &RunConfig::train,
                            &T::checkpoint_every));
  keys.push_back(path_key("dataset", "dataset directory", &RunConfig::dataset));
  keys.push_back(path_key("out", "output directory", &RunConfig::out));
  keys.push_back(path_key("checkpoint", "checkpoint to load (train: resume)", &RunConfig::checkpoint));
  keys.push_back({"mode", "shading after pretraining and for render: sur|vol",
                  [](RunConfig& c, const std::string& v) {
                    if (v == "sur") {
                      c.mode = render::ShadingMode::kSurface;
                    } else if (v == "vol") {
                      c.mode = render::ShadingMode::kVolume;
                    } else {
                      throw ConfigError("bad value for mode: '" + v + "' (expected sur or vol)");
                    }
                  },
                  [](const RunConfig& c) { return std::string(mode_name(c.mode)); }});
  keys.push_back({"scenario", "test view: easy|hard|vhard",
                  [](RunConfig& c, const std::string& v) {
                    if (v == "easy") {
                      c.scenario = Scenario::kEasy;
                    } else if (v == "hard") {
                      c.scenario = Scenario::kHard;
                    } else if (v == "vhard") {
                      c.scenario = Scenario::kVhard;
                    } else {
                      throw ConfigError("bad value for scenario: '" + v + "' (expected easy, hard or vhard)");
                    }
                  },
                  [](const RunConfig& c) { return std::string(scenario_name(c.scenario)); }});
  keys.push_back(number_key("dims", "generated image size, pixels", &RunConfig::dims));
  keys.push_back(number_key("roughness", "generated terrain roughness", &RunConfig::roughness));
  keys.push_back(number_key("views", "generated training views", &RunConfig::views));
  keys.push_back(number_key("threads", "worker cap", &RunConfig::threads));
  return keys;
}

}  // namespace

const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::kEasy:
      return "easy";
    case Scenario::kHard:
      return "hard";
    case Scenario::kVhard:
      return "vhard";
  }
  return "?";
}

const char* mode_name(render::ShadingMode m) {
  switch (m) {
    case render::ShadingMode::kSurface:
      return "sur";
    case render::ShadingMode::kVolume:
      return "vol";
    case render::ShadingMode::kLambertian:
      return "lambertian";
  }
  return "?";
}

void RunConfig::finalize() {
  field.seed = seed;
  train.seed = seed;
  train.mode = mode;
  if (dims < 16) throw ConfigError("dims must be at least 16");
  if (views < 1) throw ConfigError("views must be at least 1");
  if (!(roughness > 0.0 && roughness < 1.0)) throw ConfigError("roughness must lie in (0, 1)");
  if (threads < 1) throw ConfigError("threads must be at least 1");
  try {
    field.validate();
    train.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = build_keys();
  return keys;
}

std::map<std::string, std::string> parse_config_text(const std::string& text, const std::string& source) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(number) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(where + "empty key");
    if (!out.emplace(key, trim(line.substr(eq + 1))).second) throw ConfigError(where + "repeated key " + key);
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str(), path.string());
}

void apply_values(RunConfig& config, const std::map<std::string, std::string>& values) {
  const auto& keys = config_keys();
  for (const auto& [name, value] : values) {
    const auto it = std::find_if(keys.begin(), keys.end(), [&](const ConfigKey& k) { return k.name == name; });
    if (it == keys.end()) throw ConfigError("unknown config key " + name);
    it->set(config, value);
  }
}

std::string dump(const RunConfig& config) {
  std::string out;
  for (const ConfigKey& k : config_keys()) out += k.name + " = " + k.get(config) + "\n";
  return out;
}

}  // namespace rpvfield::cli
