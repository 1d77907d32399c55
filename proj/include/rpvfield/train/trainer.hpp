#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rpvfield/diff/adam.hpp"
#include "rpvfield/field/checkpoint.hpp"
#include "rpvfield/field/field.hpp"
#include "rpvfield/render/renderer.hpp"
#include "rpvfield/scene/dataset.hpp"
#include "rpvfield/train/loss.hpp"

namespace rpvfield::train {

enum class Phase { kLambertian, kRpv };

const char* phase_name(Phase phase);

struct TrainConfig {
  double lambda = 10.0 / 3.0;
  double pretrain_fraction = 0.2;
  int iterations = 5000;
  int batch_rays = 1024;
  double lr = 5e-4;
  double lr_decay = 0.9;
  int lr_decay_steps = 1000;  // lr * lr_decay^(step / lr_decay_steps)
  int n_stratified = 64;
  int n_guided = 64;
  double guide_sigma = 0.05;  // normalized scene units
  render::ShadingMode mode = render::ShadingMode::kSurface;
  // Clip the global gradient norm to this value; 0 disables clipping.
  double clip_norm = 0.0;
  int log_every = 10;
  int checkpoint_every = 0;  // 0 disables periodic checkpoints
  std::filesystem::path checkpoint_dir;
  // Where a non-finite loss writes its batch dump; the system temp directory
  // when empty.
  std::filesystem::path dump_dir;
  std::uint64_t seed = 0;

  // Throws std::invalid_argument naming the first bad field.
  void validate() const;
  // floor(pretrain_fraction * iterations)
  int phase_flip_step() const;
  Phase phase_at(int step) const { return step < phase_flip_step() ? Phase::kLambertian : Phase::kRpv; }
  double lr_at(int step) const;
  render::SamplingConfig sampling() const { return {n_stratified, n_guided, guide_sigma}; }
};

struct TrainRecord {
  int step = 0;
  Phase phase = Phase::kLambertian;
  double colour_loss = 0.0;
  double depth_loss = 0.0;
  double rsub_fraction = 0.0;
  double lr = 0.0;
  double seconds = 0.0;
};

struct TrainLog {
  std::vector<TrainRecord> records;

  // Header: step,phase,colour_loss,depth_loss,rsub_frac,lr,seconds
  std::string csv() const;
  void write_csv(const std::filesystem::path& path) const;
};

// Everything needed to continue a run bit-for-bit.
struct TrainState {
  field::RadianceField field;
  diff::AdamState adam;
  int step = 0;

  static TrainState fresh(field::RadianceField field, const TrainConfig& config);
};

// Field weights plus Adam moments ("adam.m.<name>", "adam.v.<name>") and
// per-slot update counts ("adam.t.<name>").
field::Checkpoint to_checkpoint(const TrainState& state);
TrainState state_from(const field::Checkpoint& checkpoint, const TrainConfig& config);

// One supervised training ray.
struct TrainingRay {
  render::Ray ray;  // normalized coordinates, starting at the scene bounds
  Direction sun;
  std::array<double, 3> target{};
  DepthPrior prior{0.0, 0.0};  // scene units from ray.origin
};

// Every training pixel whose ray meets the scene bounds, view by view in row
// order. Prior depths stay in scene units.
std::vector<TrainingRay> training_rays(const scene::Dataset& dataset);

using TrainCallback = std::function<void(const TrainRecord&)>;

// Runs from state.step up to config.iterations. Each step draws batch_rays
// rays from a per-epoch shuffle of all training rays, renders them with the
// phase's shading (Lambertian first, config.mode after the flip), minimises
// colour + lambda * depth with Adam and keeps the RPV heads frozen before the
// flip. The R_sub rule compares depths in scene units so that the 1 - corr
// deadband is a length in metres; the depth loss uses normalized lengths so
// that its scale matches the colour term.
// Throws NumericalError after dumping the batch when the loss or a
// gradient is not finite.
TrainLog train(const scene::Dataset& dataset, TrainState& state, const TrainConfig& config,
               const TrainCallback& on_record = {});

}  // namespace rpvfield::train
