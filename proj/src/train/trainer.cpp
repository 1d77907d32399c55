#include "rpvfield/train/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "rpvfield/common/error.hpp"
#include "rpvfield/common/rng.hpp"
#include "rpvfield/diff/graph.hpp"
#include "rpvfield/diff/ops.hpp"

namespace rpvfield::train {

using diff::Tensor;

const char* phase_name(Phase phase) { return phase == Phase::kLambertian ? "lambertian" : "rpv"; }

void TrainConfig::validate() const {
  auto bad = [](const std::string& what) { throw std::invalid_argument("train config: " + what); };
  if (!(lambda >= 0.0)) bad("lambda must be >= 0");
  if (!(pretrain_fraction >= 0.0 && pretrain_fraction < 1.0)) bad("pretrain_fraction must lie in [0, 1)");
  if (iterations < 0) bad("iterations must be >= 0");
  if (batch_rays < 1) bad("batch_rays must be >= 1");
  if (!(lr > 0.0)) bad("lr must be positive");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) bad("lr_decay must lie in (0, 1]");
  if (lr_decay_steps < 1) bad("lr_decay_steps must be >= 1");
  if (n_stratified < 1 || n_guided < 0) bad("sample counts must be n_stratified >= 1, n_guided >= 0");
  if (!(guide_sigma >= 0.0)) bad("guide_sigma must be >= 0");
  if (!(clip_norm >= 0.0)) bad("clip_norm must be >= 0");
  if (log_every < 1) bad("log_every must be >= 1");
  if (checkpoint_every < 0) bad("checkpoint_every must be >= 0");
  if (checkpoint_every > 0 && checkpoint_dir.empty()) bad("checkpoint_every needs checkpoint_dir");
}

int TrainConfig::phase_flip_step() const {
  return static_cast<int>(std::floor(pretrain_fraction * static_cast<double>(iterations)));
}

double TrainConfig::lr_at(int step) const {
  return lr * std::pow(lr_decay, static_cast<double>(step) / static_cast<double>(lr_decay_steps));
}

// ---------------------------------------------------------------- log

std::string TrainLog::csv() const {
  std::string out = "step,phase,colour_loss,depth_loss,rsub_frac,lr,seconds\n";
  char buf[256];
  for (const TrainRecord& r : records) {
    std::snprintf(buf, sizeof buf, "%d,%s,%.17g,%.17g,%.17g,%.17g,%.3f\n", r.step, phase_name(r.phase), r.colour_loss,
                  r.depth_loss, r.rsub_fraction, r.lr, r.seconds);
    out += buf;
  }
  return out;
}

void TrainLog::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << csv();
}

// ---------------------------------------------------------------- state

TrainState TrainState::fresh(field::RadianceField field, const TrainConfig& config) {
  diff::AdamState adam = diff::AdamState::for_params(field.weights(), config.lr);
  return {std::move(field), std::move(adam), 0};
}

field::Checkpoint to_checkpoint(const TrainState& state) {
  field::Checkpoint c = field::to_checkpoint(state.field, static_cast<std::uint64_t>(state.step));
  const auto& names = state.field.names();
  for (std::size_t s = 0; s < names.size(); ++s) {
    c.names.push_back("adam.m." + names[s]);
    c.tensors.emplace_back(state.adam.shapes[s], state.adam.m[s]);
    c.names.push_back("adam.v." + names[s]);
    c.tensors.emplace_back(state.adam.shapes[s], state.adam.v[s]);
    c.names.push_back("adam.t." + names[s]);
    c.tensors.push_back(Tensor({1, 1}, {static_cast<double>(state.adam.slot_steps[s])}));
  }
  c.names.push_back("adam.step");
  c.tensors.push_back(Tensor({1, 1}, {static_cast<double>(state.adam.step)}));
  return c;
}

TrainState state_from(const field::Checkpoint& checkpoint, const TrainConfig& config) {
  TrainState s = TrainState::fresh(field::field_from(checkpoint), config);
  s.step = static_cast<int>(checkpoint.step);
  const auto& names = s.field.names();
  const bool has_moments = checkpoint.find("adam.step") != nullptr;
  if (!has_moments) return s;
  s.adam.step = static_cast<std::uint64_t>(checkpoint.find("adam.step")->item());
  for (std::size_t i = 0; i < names.size(); ++i) {
    const Tensor* m = checkpoint.find("adam.m." + names[i]);
    const Tensor* v = checkpoint.find("adam.v." + names[i]);
    const Tensor* t = checkpoint.find("adam.t." + names[i]);
    if (m == nullptr || v == nullptr || t == nullptr || m->shape() != s.adam.shapes[i] ||
        v->shape() != s.adam.shapes[i]) {
      throw ShapeError("checkpoint optimizer state is incomplete for " + names[i]);
    }
    s.adam.m[i].assign(m->values().begin(), m->values().end());
    s.adam.v[i].assign(v->values().begin(), v->values().end());
    s.adam.slot_steps[i] = static_cast<std::uint64_t>(t->item());
  }
  return s;
}

// ---------------------------------------------------------------- rays

std::vector<TrainingRay> training_rays(const scene::Dataset& dataset) {
  std::vector<TrainingRay> out;
  for (const scene::View* v : dataset.training_views()) {
    if (!v->prior) throw ValidationError("training view " + v->spec.name + " has no depth prior");
    for (int r = 0; r < v->spec.height; ++r) {
      for (int c = 0; c < v->spec.width; ++c) {
        const auto fr = dataset.field_ray(v->spec, r, c);
        if (!fr) continue;
        const double corr = std::clamp(static_cast<double>(v->prior->corr_at(r, c)), 0.0, 1.0);
        const double dbar = v->prior->dbar_at(r, c) - dataset.transform.length_to_scene(fr->offset);
        out.push_back({fr->ray,
                       v->spec.sun,
                       {v->image.at(r, c, 0), v->image.at(r, c, 1), v->image.at(r, c, 2)},
                       DepthPrior(dbar, corr)});
      }
    }
  }
  if (out.empty()) throw ValidationError("no training ray meets the scene bounds");
  return out;
}

namespace {

// Ray indices of every step follow one shuffle per pass over the data.
class RayScheduler {
 public:
  RayScheduler(std::size_t count, std::uint64_t seed) : count_(count), seed_(split_seed(seed, "shuffle")) {}

  std::vector<std::size_t> batch(int step, int size) {
    std::vector<std::size_t> out(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) {
      const std::uint64_t k = static_cast<std::uint64_t>(step) * static_cast<std::uint64_t>(size) + i;
      out[static_cast<std::size_t>(i)] = permutation(k / count_)[k % count_];
    }
    return out;
  }

 private:
  const std::vector<std::size_t>& permutation(std::uint64_t epoch) {
    if (epoch != epoch_ || perm_.empty()) {
      perm_.resize(count_);
      std::iota(perm_.begin(), perm_.end(), std::size_t{0});
      Rng rng(split_seed(seed_, epoch));
      std::shuffle(perm_.begin(), perm_.end(), rng);
      epoch_ = epoch;
    }
    return perm_;
  }

  std::size_t count_;
  std::uint64_t seed_;
  std::uint64_t epoch_ = 0;
  std::vector<std::size_t> perm_;
};

bool all_finite(const Tensor& t) {
  return std::all_of(t.values().begin(), t.values().end(), [](double v) { return std::isfinite(v); });
}

[[noreturn]] void abort_non_finite(const TrainConfig& config, int step, double colour, double depth,
                                   const std::vector<const TrainingRay*>& batch, const render::BatchRender* rendered,
                                   const std::string& what) {
  const std::filesystem::path dir = config.dump_dir.empty() ? std::filesystem::temp_directory_path() : config.dump_dir;
  const std::filesystem::path path = dir / ("nan_step_" + std::to_string(step) + ".txt");
  std::ofstream out(path, std::ios::trunc);
  char buf[512];
  out << "step " << step << ": " << what << "\n";
  std::snprintf(buf, sizeof buf, "colour_loss %.17g\ndepth_loss %.17g\n", colour, depth);
  out << buf;
  out << "ray,origin_x,origin_y,origin_z,dir_x,dir_y,dir_z,t_near,t_far,target_r,target_g,target_b,dbar,corr,"
         "render_r,render_g,render_b,depth,depth_std\n";
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const TrainingRay& r = *batch[i];
    const double nan = std::nan("");
    const bool have = rendered != nullptr;
    std::snprintf(buf, sizeof buf,
                  "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.9g,%.9g,%.9g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                  "%.17g,%.17g\n",
                  i, r.ray.origin.x, r.ray.origin.y, r.ray.origin.z, r.ray.dir.x(), r.ray.dir.y(), r.ray.dir.z(),
                  r.ray.t_near, r.ray.t_far, r.target[0], r.target[1], r.target[2], r.prior.dbar(), r.prior.corr(),
                  have ? rendered->color.at(i, 0) : nan, have ? rendered->color.at(i, 1) : nan,
                  have ? rendered->color.at(i, 2) : nan, have ? rendered->depth[i] : nan,
                  have ? rendered->depth_std[i] : nan);
    out << buf;
  }
  throw NumericalError("step " + std::to_string(step) + ": " + what + "; batch written to " + path.string());
}

}  // namespace

TrainLog train(const scene::Dataset& dataset, TrainState& state, const TrainConfig& config,
               const TrainCallback& on_record) {
  config.validate();
  const std::vector<TrainingRay> rays = training_rays(dataset);
  RayScheduler scheduler(rays.size(), config.seed);
  const std::uint64_t step_seed = split_seed(config.seed, "train");
  const auto start = std::chrono::steady_clock::now();
  const std::size_t slots = state.field.weights().size();
  const double scale = dataset.transform.scale;
  TrainLog log;

  while (state.step < config.iterations) {
    const int step = state.step;
    const Phase phase = config.phase_at(step);
    const render::ShadingMode mode = phase == Phase::kLambertian ? render::ShadingMode::kLambertian : config.mode;

    Rng rng(split_seed(step_seed, static_cast<std::uint64_t>(step)));
    std::vector<const TrainingRay*> batch_rays;
    render::RayBatch batch;
    std::vector<DepthPrior> priors, normalized_priors;
    std::vector<double> targets;
    for (std::size_t index : scheduler.batch(step, config.batch_rays)) {
      const TrainingRay& r = rays[index];
      batch_rays.push_back(&r);
      batch.rays.push_back(r.ray);
      batch.suns.push_back(r.sun);
      batch.samples.push_back(render::sample_ray(state.field, r.ray, dataset.transform.length_to_normalized(r.prior.dbar()),
                                                   config.sampling(), rng));
      priors.push_back(r.prior);
      normalized_priors.emplace_back(dataset.transform.length_to_normalized(r.prior.dbar()), r.prior.corr());
      targets.insert(targets.end(), r.target.begin(), r.target.end());
    }
    const std::size_t n = batch.size();

    diff::Graph graph;
    std::vector<Tensor> params;
    params.reserve(slots);
    for (const Tensor& w : state.field.weights()) params.push_back(graph.parameter(w));
    const double nan = std::nan("");
    std::optional<render::BatchRender> out;
    std::optional<Tensor> colour, depth, total;
    std::vector<char> subset(n);
    std::size_t supervised = 0;
    try {
      out = render::render_batch(state.field, params, batch, mode);
      const Tensor scene_depth = out->depth * scale;
      for (std::size_t r = 0; r < n; ++r) {
        subset[r] = in_rsub(scene_depth[r], priors[r].dbar(), scale * out->depth_std[r], priors[r].sigma()) ? 1 : 0;
        supervised += subset[r];
      }
      colour = colour_loss(out->color, Tensor({n, 3}, std::move(targets)));
      depth = depth_loss(out->depth, normalized_priors, subset, n);
      total = total_loss(*colour, *depth, config.lambda);
    } catch (const DomainError& e) {
      abort_non_finite(config, step, colour ? colour->item() : nan, depth ? depth->item() : nan, batch_rays,
                       out ? &*out : nullptr, e.what());
    }
    if (!std::isfinite(total->item())) {
      abort_non_finite(config, step, colour->item(), depth->item(), batch_rays, &*out, "non-finite loss");
    }

    const diff::Gradients g = graph.backward(*total, params);
    std::vector<Tensor> grads;
    grads.reserve(slots);
    std::vector<char> active(slots, 1);
    double norm2 = 0.0;
    for (std::size_t s = 0; s < slots; ++s) {
      grads.push_back(g.of(params[s]));
      if (phase == Phase::kLambertian && state.field.is_rpv_head(s)) active[s] = 0;
      if (!active[s]) continue;
      if (!all_finite(grads.back())) {
        abort_non_finite(config, step, colour->item(), depth->item(), batch_rays, &*out,
                         "non-finite gradient for " + state.field.names()[s]);
      }
      for (double v : grads.back().values()) norm2 += v * v;
    }
    if (config.clip_norm > 0.0 && std::sqrt(norm2) > config.clip_norm) {
      const double scale = config.clip_norm / std::sqrt(norm2);
      for (Tensor& t : grads) t = (t * scale).detached();
    }

    std::vector<Tensor> weights = state.field.weights();
    state.adam.lr = config.lr_at(step);
    diff::adam_step(weights, grads, state.adam, active);
    state.field.set_weights(std::move(weights));
    state.step = step + 1;

    if (step % config.log_every == 0 || state.step == config.iterations) {
      const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      log.records.push_back({step, phase, colour->item(), depth->item(),
                             static_cast<double>(supervised) / static_cast<double>(n), state.adam.lr, seconds});
      if (on_record) on_record(log.records.back());
    }
    if (config.checkpoint_every > 0 && state.step % config.checkpoint_every == 0) {
      std::filesystem::create_directories(config.checkpoint_dir);
      const field::Checkpoint c = to_checkpoint(state);
      field::save_checkpoint(config.checkpoint_dir / ("step_" + std::to_string(state.step) + ".rfld"), c);
      field::save_checkpoint(config.checkpoint_dir / "latest.rfld", c);
    }
  }
  return log;
}

}  // namespace rpvfield::train
