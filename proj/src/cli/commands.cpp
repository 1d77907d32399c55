#include "rpvfield/cli/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iostream>
#include <limits>

#include "rpvfield/common/rng.hpp"
#include "rpvfield/eval/dsm.hpp"
#include "rpvfield/eval/metrics.hpp"
#include "rpvfield/eval/view_render.hpp"
#include "rpvfield/field/checkpoint.hpp"
#include "rpvfield/rpv/brf.hpp"
#include "rpvfield/scene/dataset.hpp"
#include "rpvfield/train/trainer.hpp"

namespace rpvfield::cli {

namespace fs = std::filesystem;

namespace {

void make_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory " + dir.string());
}

field::RadianceField load_field(const RunConfig& config) {
  if (config.checkpoint.empty()) throw ConfigError("this command needs checkpoint = <file>");
  return field::field_from(field::load_checkpoint(config.checkpoint));
}

const scene::View& find_view(const scene::Dataset& dataset, const std::string& name) {
  try {
    return dataset.view(name);
  } catch (const std::out_of_range&) {
    std::string known;
    for (const scene::View& v : dataset.views) known += (known.empty() ? "" : ", ") + v.spec.name;
    throw ConfigError("unknown view '" + name + "' (dataset has " + known + ")");
  }
}

scene::Image dsm_image(const eval::Dsm& dsm) {
  scene::Image out(dsm.lattice.cols, dsm.lattice.rows, 1);
  for (int i = 0; i < dsm.lattice.rows; ++i) {
    for (int j = 0; j < dsm.lattice.cols; ++j) out.at(i, j) = static_cast<float>(dsm.at(i, j));
  }
  return out;
}

// Altitudes rescaled to [0, 1] by the ground-truth range, for previews and
// the image metrics of the DSM row.
scene::Image normalized_dsm(const eval::Dsm& dsm, const eval::Dsm& reference) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t c = 0; c < reference.z.size(); ++c) {
    if (!reference.valid[c]) continue;
    lo = std::min(lo, reference.z[c]);
    hi = std::max(hi, reference.z[c]);
  }
  const double span = hi > lo ? hi - lo : 1.0;
  scene::Image out(dsm.lattice.cols, dsm.lattice.rows, 1);
  for (int i = 0; i < dsm.lattice.rows; ++i) {
    for (int j = 0; j < dsm.lattice.cols; ++j) {
      const bool ok = dsm.valid_at(i, j) && reference.valid_at(i, j);
      const double z = ok ? dsm.at(i, j) : reference.at(i, j);
      out.at(i, j) = static_cast<float>((z - lo) / span);
    }
  }
  return out;
}

eval::EvalRow dsm_row(const eval::Dsm& dsm, const eval::Dsm& gt) {
  const scene::Image a = normalized_dsm(dsm, gt);
  const scene::Image b = normalized_dsm(gt, gt);
  return {"dsm", eval::psnr(a, b), eval::ssim(a, b), eval::mae(dsm, gt), eval::joint_valid_fraction(dsm, gt)};
}

eval::Dsm field_dsm(const field::RadianceField& field, const scene::Dataset& dataset, const RunConfig& config) {
  return eval::extract_dsm(field, dataset.transform, dataset.bounds_min, dataset.bounds_max, dataset.dsm_lattice,
                           config.sampling(), split_seed(config.seed, "dsm"));
}

void write_dsm(const eval::Dsm& dsm, const eval::Dsm& gt, const fs::path& dir) {
  scene::write_pfm(dir / "dsm.pfm", dsm_image(dsm));
  scene::write_ppm(dir / "dsm.ppm", normalized_dsm(dsm, gt));
}

double mean_abs_error(const scene::Image& a, const scene::Image& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) sum += std::abs(static_cast<double>(a.data[i]) - b.data[i]);
  return a.data.empty() ? 0.0 : sum / static_cast<double>(a.data.size());
}

}  // namespace

std::vector<double> parse_list(const std::string& text, std::size_t count, const std::string& what) {
  std::vector<double> out;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    const std::size_t end = std::min(text.find(',', begin), text.size());
    double v = 0.0;
    const char* first = text.data() + begin;
    const char* last = text.data() + end;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || first == last) throw ConfigError("bad number in " + what + ": " + text);
    out.push_back(v);
    begin = end + 1;
  }
  if (out.size() != count) {
    throw ConfigError(what + " needs " + std::to_string(count) + " comma separated numbers, got " + text);
  }
  return out;
}

rpv::RpvParams parse_params(const std::string& text) {
  const std::vector<double> v = parse_list(text, 6, "params (r,g,b,k,theta,rhoc)");
  rpv::RpvParams p{{v[0], v[1], v[2]}, v[3], v[4], v[5]};
  try {
    p.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return p;
}

void gen_scene(const RunConfig& config) {
  scene::SceneConfig sc;
  sc.seed = config.seed;
  sc.roughness = config.roughness;
  sc.layout.image_size = config.dims;
  sc.layout.n_train = config.views;
  const scene::GeneratedScene generated = scene::generate_scene(sc);
  make_out_dir(config.out);
  scene::save_dataset(generated.dataset, config.out);
  std::cout << "wrote " << generated.dataset.views.size() << " views to " << config.out.string() << "\n";
}

void train(const RunConfig& config) {
  const scene::Dataset dataset = scene::load_dataset(config.dataset);
  make_out_dir(config.out);
  train::TrainConfig tc = config.train;
  tc.dump_dir = config.out;
  if (tc.checkpoint_every > 0) {
    tc.checkpoint_dir = config.out / "checkpoints";
    make_out_dir(tc.checkpoint_dir);
  }
  train::TrainState state = config.checkpoint.empty()
                                ? train::TrainState::fresh(field::RadianceField(config.field), tc)
                                : train::state_from(field::load_checkpoint(config.checkpoint), tc);
  train::TrainLog log;
  const auto on_record = [&log](const train::TrainRecord& r) {
    log.records.push_back(r);
    std::cout << "step " << r.step << " " << train::phase_name(r.phase) << " colour " << r.colour_loss << " depth "
              << r.depth_loss << " rsub " << r.rsub_fraction << "\n";
  };
  try {
    train::train(dataset, state, tc, on_record);
  } catch (...) {
    log.write_csv(config.out / "train_log.csv");
    throw;
  }
  log.write_csv(config.out / "train_log.csv");
  field::save_checkpoint(config.out / "checkpoint.rfld", train::to_checkpoint(state));
  std::cout << "wrote " << (config.out / "checkpoint.rfld").string() << " at step " << state.step << "\n";
}

void render(const RunConfig& config, const std::string& view) {
  const scene::Dataset dataset = scene::load_dataset(config.dataset);
  const std::string name = view.empty() ? scenario_name(config.scenario) : view;
  const scene::View& v = find_view(dataset, name);
  const field::RadianceField field = load_field(config);
  const eval::RenderedView r =
      eval::render_view(field, dataset, v.spec, config.sampling(), config.mode, split_seed(config.seed, "render"),
                        v.prior ? &*v.prior : nullptr);
  make_out_dir(config.out);
  scene::write_pfm(config.out / (name + ".pfm"), r.color);
  scene::write_ppm(config.out / (name + ".ppm"), r.color);
  scene::write_pfm(config.out / (name + "_depth.pfm"), r.depth);
}

void brf_plot(const RunConfig& config, const BrfRequest& request) {
  if (request.params.has_value() == request.at.has_value()) {
    throw ConfigError("brf-plot needs exactly one of --params or --at");
  }
  rpv::RpvParams params;
  if (request.params) {
    params = *request.params;
  } else {
    params = field::query(load_field(config), *request.at).params;
  }
  if (request.zenith_steps < 2 || request.azimuth_steps < 2) throw ConfigError("sweep needs at least 2 steps");
  if (!(request.sun_zenith_deg >= 0.0 && request.sun_zenith_deg < 90.0)) {
    throw ConfigError("sun zenith must lie in [0, 90)");
  }
  const Direction sun =
      Direction::from_spherical(deg_to_rad(request.sun_zenith_deg), deg_to_rad(request.sun_azimuth_deg));
  const rpv::BrfGrid grid = rpv::brf_sweep(params, Direction::up(), sun, static_cast<std::size_t>(request.zenith_steps),
                                           static_cast<std::size_t>(request.azimuth_steps));
  make_out_dir(config.out);
  rpv::write_brf_csv(grid, config.out / "brf.csv");
  rpv::write_brf_svg(grid, rpv::BrfChannel::kLuminance, config.out / "brf.svg");
  std::cout << "params " << params.rho0[0] << "," << params.rho0[1] << "," << params.rho0[2] << "," << params.k << ","
            << params.theta << "," << params.rhoc << "\n";
}

void dsm(const RunConfig& config) {
  const scene::Dataset dataset = scene::load_dataset(config.dataset);
  const field::RadianceField field = load_field(config);
  const eval::Dsm gt = eval::Dsm::from_image(dataset.dsm_lattice, dataset.gt_dsm);
  const eval::Dsm pred = field_dsm(field, dataset, config);
  make_out_dir(config.out);
  write_dsm(pred, gt, config.out);
  eval::write_report_csv({dsm_row(pred, gt)}, config.out / "report.csv");
}

void eval(const RunConfig& config, bool against_self) {
  const scene::Dataset dataset = scene::load_dataset(config.dataset);
  std::optional<field::RadianceField> field;
  if (!against_self) field = load_field(config);
  make_out_dir(config.out);
  std::vector<eval::EvalRow> rows;
  for (const scene::View& v : dataset.views) {
    if (v.spec.is_training()) continue;
    scene::Image image = v.image;
    double valid = 1.0;
    if (field) {
      const eval::RenderedView r = eval::render_view(*field, dataset, v.spec, config.sampling(), config.mode,
                                                     split_seed(config.seed, "render"));
      image = r.color;
      valid = 1.0 - static_cast<double>(std::count(r.empty.begin(), r.empty.end(), 1)) /
                        static_cast<double>(r.empty.size());
    }
    scene::write_ppm(config.out / (v.spec.name + ".ppm"), image);
    rows.push_back({v.spec.name, eval::psnr(image, v.image), eval::ssim(image, v.image),
                    mean_abs_error(image, v.image), valid});
  }
  const eval::Dsm gt = eval::Dsm::from_image(dataset.dsm_lattice, dataset.gt_dsm);
  const eval::Dsm pred = field ? field_dsm(*field, dataset, config) : gt;
  write_dsm(pred, gt, config.out);
  rows.push_back(dsm_row(pred, gt));
  eval::write_report_csv(rows, config.out / "report.csv");
  std::cout << eval::report_csv(rows);
}

}  // namespace rpvfield::cli
