#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rpvfield/scene/image_io.hpp"

namespace rpvfield::eval {

// Reported instead of +infinity for identical images.
inline constexpr double kPsnrCap = 99.0;

// 10 log10(1 / MSE) over all channels, capped at kPsnrCap. Throws ShapeError
// on mismatched images.
double psnr(const scene::Image& a, const scene::Image& b);

struct SsimConfig {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

// Mean local SSIM of the channel-mean luminance over every position where
// the Gaussian window fits entirely. Throws ShapeError on mismatched images
// or images smaller than the window.
double ssim(const scene::Image& a, const scene::Image& b, const SsimConfig& config = {});

struct EvalRow {
  std::string name;
  double psnr_db = 0.0;
  double ssim = 0.0;
  double mae = 0.0;
  double valid_fraction = 0.0;
};

// Header: name,psnr_db,ssim,mae,valid_fraction. Numbers in %.17g.
std::string report_csv(const std::vector<EvalRow>& rows);
void write_report_csv(const std::vector<EvalRow>& rows, const std::filesystem::path& path);

}  // namespace rpvfield::eval
