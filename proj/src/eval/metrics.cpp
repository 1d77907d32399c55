#include "rpvfield/eval/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "rpvfield/common/error.hpp"

namespace rpvfield::eval {

using scene::Image;

namespace {

void require_same_shape(const Image& a, const Image& b, const char* what) {
  if (!a.same_shape(b) || a.data.empty()) {
    throw ShapeError(std::string(what) + ": images differ in shape or are empty");
  }
}

// Row-major luminance plane.
std::vector<double> luminance(const Image& img) {
  std::vector<double> out(static_cast<std::size_t>(img.width) * img.height);
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      double s = 0.0;
      for (int ch = 0; ch < img.channels; ++ch) s += img.at(r, c, ch);
      out[static_cast<std::size_t>(r) * img.width + c] = s / img.channels;
    }
  }
  return out;
}

// Separable Gaussian filter keeping only positions where the window fits.
std::vector<double> filter_valid(const std::vector<double>& in, int w, int h, const std::vector<double>& kernel) {
  const int n = static_cast<int>(kernel.size());
  const int ow = w - n + 1, oh = h - n + 1;
  std::vector<double> rows(static_cast<std::size_t>(h) * ow);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < ow; ++c) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += kernel[k] * in[static_cast<std::size_t>(r) * w + c + k];
      rows[static_cast<std::size_t>(r) * ow + c] = s;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  for (int r = 0; r < oh; ++r) {
    for (int c = 0; c < ow; ++c) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += kernel[k] * rows[static_cast<std::size_t>(r + k) * ow + c];
      out[static_cast<std::size_t>(r) * ow + c] = s;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double psnr(const Image& a, const Image& b) {
  require_same_shape(a, b, "psnr");
  double se = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
    se += d * d;
  }
  const double mse = se / static_cast<double>(a.data.size());
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, -10.0 * std::log10(mse));
}

double ssim(const Image& a, const Image& b, const SsimConfig& config) {
  require_same_shape(a, b, "ssim");
  if (config.window < 1 || a.width < config.window || a.height < config.window) {
    throw ShapeError("ssim: image smaller than the " + std::to_string(config.window) + "-pixel window");
  }
  std::vector<double> kernel(static_cast<std::size_t>(config.window));
  const double mid = 0.5 * (config.window - 1);
  double total = 0.0;
  for (int k = 0; k < config.window; ++k) {
    kernel[k] = std::exp(-(k - mid) * (k - mid) / (2.0 * config.sigma * config.sigma));
    total += kernel[k];
  }
  for (double& k : kernel) k /= total;

  const int w = a.width, h = a.height;
  const std::vector<double> la = luminance(a), lb = luminance(b);
  std::vector<double> aa(la.size()), bb(la.size()), ab(la.size());
  for (std::size_t i = 0; i < la.size(); ++i) {
    aa[i] = la[i] * la[i];
    bb[i] = lb[i] * lb[i];
    ab[i] = la[i] * lb[i];
  }
  const auto mu_a = filter_valid(la, w, h, kernel), mu_b = filter_valid(lb, w, h, kernel);
  const auto e_aa = filter_valid(aa, w, h, kernel), e_bb = filter_valid(bb, w, h, kernel);
  const auto e_ab = filter_valid(ab, w, h, kernel);
  const double c1 = std::pow(config.k1 * config.dynamic_range, 2);
  const double c2 = std::pow(config.k2 * config.dynamic_range, 2);
  double sum = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a[i], mb = mu_b[i];
    const double var_a = e_aa[i] - ma * ma, var_b = e_bb[i] - mb * mb, cov = e_ab[i] - ma * mb;
    sum += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
  }
  return sum / static_cast<double>(mu_a.size());
}

std::string report_csv(const std::vector<EvalRow>& rows) {
  std::string out = "name,psnr_db,ssim,mae,valid_fraction\n";
  for (const EvalRow& r : rows) {
    out += r.name + "," + num(r.psnr_db) + "," + num(r.ssim) + "," + num(r.mae) + "," + num(r.valid_fraction) + "\n";
  }
  return out;
}

void write_report_csv(const std::vector<EvalRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << report_csv(rows);
}

}  // namespace rpvfield::eval
