#pragma once

#include <array>
#include <optional>
#include <string>

#include "rpvfield/cli/run_config.hpp"
#include "rpvfield/rpv/rpv.hpp"

// Command bodies behind the rpvfield executable. Each writes into
// config.out (created when missing) and throws on failure: ConfigError for
// usage mistakes, anything else for runtime failures.
namespace rpvfield::cli {

// Dataset directory in the layout of scene::save_dataset.
void gen_scene(const RunConfig& config);

// Writes checkpoint.rfld and train_log.csv. Resumes from config.checkpoint
// when set; periodic checkpoints go to out/checkpoints.
void train(const RunConfig& config);

// Writes <view>.pfm, <view>.ppm and <view>_depth.pfm. An empty view name
// selects config.scenario.
void render(const RunConfig& config, const std::string& view);

struct BrfRequest {
  std::optional<rpv::RpvParams> params;
  std::optional<Vec3> at;  // normalized field coordinates, needs config.checkpoint
  double sun_zenith_deg = 35.0;
  double sun_azimuth_deg = 0.0;
  int zenith_steps = 90;
  int azimuth_steps = 360;
};

// Writes brf.csv and brf.svg (luminance).
void brf_plot(const RunConfig& config, const BrfRequest& request);

// Writes dsm.pfm, dsm.ppm and report.csv with a single "dsm" row.
void dsm(const RunConfig& config);

// Renders every test view plus the DSM and writes report.csv. With
// against_self the ground truth stands in for the trained field.
void eval(const RunConfig& config, bool against_self);

// "r,g,b,k,theta,rhoc"
rpv::RpvParams parse_params(const std::string& text);
// Comma separated numbers, exactly `count` of them.
std::vector<double> parse_list(const std::string& text, std::size_t count, const std::string& what);

}  // namespace rpvfield::cli
