#include "rpvfield/scene/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "rpvfield/common/rng.hpp"

namespace rpvfield::scene {

void Lattice::validate() const {
  if (rows < 2 || cols < 2) throw std::invalid_argument("lattice needs at least 2x2 nodes");
  if (!(x_max > x_min) || !(y_max > y_min)) throw std::invalid_argument("lattice extent must be positive");
}

Heightfield::Heightfield(Lattice lattice, std::vector<double> z) : lattice_(lattice), z_(std::move(z)) {
  lattice_.validate();
  if (z_.size() != static_cast<std::size_t>(lattice_.rows) * lattice_.cols) {
    throw std::invalid_argument("heightfield size does not match lattice");
  }
  for (double v : z_) {
    if (!std::isfinite(v)) throw std::invalid_argument("heightfield contains a non-finite altitude");
  }
}

double Heightfield::min_height() const { return *std::min_element(z_.begin(), z_.end()); }
double Heightfield::max_height() const { return *std::max_element(z_.begin(), z_.end()); }

namespace {
struct Cell {
  int i, j;
  double u, v;  // local coordinates in [0, 1]
};

Cell locate(const Lattice& l, double x, double y) {
  const double fx = std::clamp((x - l.x_min) / l.dx(), 0.0, static_cast<double>(l.cols - 1));
  const double fy = std::clamp((y - l.y_min) / l.dy(), 0.0, static_cast<double>(l.rows - 1));
  const int j = std::min(static_cast<int>(fx), l.cols - 2);
  const int i = std::min(static_cast<int>(fy), l.rows - 2);
  return {i, j, fx - j, fy - i};
}
}  // namespace

double Heightfield::height(double x, double y) const {
  const Cell c = locate(lattice_, x, y);
  const double z00 = node(c.i, c.j), z01 = node(c.i, c.j + 1);
  const double z10 = node(c.i + 1, c.j), z11 = node(c.i + 1, c.j + 1);
  return (1 - c.v) * ((1 - c.u) * z00 + c.u * z01) + c.v * ((1 - c.u) * z10 + c.u * z11);
}

Vec3 Heightfield::gradient(double x, double y) const {
  const Cell c = locate(lattice_, x, y);
  const double z00 = node(c.i, c.j), z01 = node(c.i, c.j + 1);
  const double z10 = node(c.i + 1, c.j), z11 = node(c.i + 1, c.j + 1);
  const double dzdu = (1 - c.v) * (z01 - z00) + c.v * (z11 - z10);
  const double dzdv = (1 - c.u) * (z10 - z00) + c.u * (z11 - z01);
  return {dzdu / lattice_.dx(), dzdv / lattice_.dy(), 0.0};
}

Direction Heightfield::normal(double x, double y) const {
  const Vec3 g = gradient(x, y);
  return Direction::normalized(Vec3(-g.x, -g.y, 1.0));
}

Heightfield generate_heightfield(std::uint64_t seed, Lattice lattice, double roughness, double amplitude) {
  lattice.validate();
  if (roughness < 0.0) throw std::invalid_argument("roughness must be >= 0");
  int n = 1;
  while (n + 1 < std::max(lattice.rows, lattice.cols)) n *= 2;
  const int size = n + 1;
  std::vector<double> g(static_cast<std::size_t>(size) * size, 0.0);
  auto at = [&](int i, int j) -> double& { return g[static_cast<std::size_t>(i) * size + j]; };

  Rng rng(split_seed(seed, "terrain"));
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double scale = amplitude * roughness;
  for (int i : {0, n}) {
    for (int j : {0, n}) at(i, j) = scale * u(rng);
  }
  for (int step = n; step > 1; step /= 2) {
    const int half = step / 2;
    scale *= roughness;
    // Diamond: centres of squares.
    for (int i = half; i < size; i += step) {
      for (int j = half; j < size; j += step) {
        const double avg =
            0.25 * (at(i - half, j - half) + at(i - half, j + half) + at(i + half, j - half) + at(i + half, j + half));
        at(i, j) = avg + scale * u(rng);
      }
    }
    // Square: edge midpoints.
    for (int i = 0; i < size; i += half) {
      for (int j = (i / half) % 2 == 0 ? half : 0; j < size; j += step) {
        double sum = 0.0;
        int count = 0;
        if (i >= half) sum += at(i - half, j), ++count;
        if (i + half < size) sum += at(i + half, j), ++count;
        if (j >= half) sum += at(i, j - half), ++count;
        if (j + half < size) sum += at(i, j + half), ++count;
        at(i, j) = sum / count + scale * u(rng);
      }
    }
  }
  std::vector<double> z(static_cast<std::size_t>(lattice.rows) * lattice.cols);
  for (int i = 0; i < lattice.rows; ++i) {
    for (int j = 0; j < lattice.cols; ++j) z[static_cast<std::size_t>(i) * lattice.cols + j] = at(i, j);
  }
  return Heightfield(lattice, std::move(z));
}

MaterialMap::MaterialMap(std::vector<rpv::RpvParams> regions, double cx, double cy)
    : regions_(std::move(regions)), cx_(cx), cy_(cy) {
  if (regions_.size() != 4) throw std::invalid_argument("material map expects four quadrant materials");
  for (const auto& p : regions_) p.validate();
}

int MaterialMap::region(double x, double y) const { return (x >= cx_ ? 1 : 0) + (y >= cy_ ? 2 : 0); }

}  // namespace rpvfield::scene
