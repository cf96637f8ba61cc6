#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <unistd.h>

#include "rbfim/pc_model.hpp"

namespace rbfim::testing {

inline rgb8 smooth_color(const point3d& p, double period) {
  auto channel = [&](double phase, const point3d& dir) {
    double t = std::sin(dir.dot(p) * 2.0 * std::numbers::pi / period + phase);
    return static_cast<std::uint8_t>(std::lround(127.5 + 100.0 * t));
  };
  return {channel(0.0, {1.0, 0.3, 0.1}), channel(1.0, {0.2, 1.0, 0.4}), channel(2.0, {0.1, 0.5, 1.0})};
}

inline void paint(point_cloud& c, double period) {
  c.colors.emplace();
  for (const point3d& p : c.positions) {
    c.colors->push_back(smooth_color(p, period));
  }
}

// Uniform in [0, extent]^3.
inline point_cloud uniform_cloud(index_t n, std::uint64_t seed, double extent = 100.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, extent);
  point_cloud c;
  for (index_t i = 0; i < n; ++i) {
    c.positions.emplace_back(u(rng), u(rng), u(rng));
  }
  paint(c, extent / 2.0);
  return c;
}

// Points on a sphere surface.
inline point_cloud sphere_cloud(index_t n, std::uint64_t seed, double radius = 100.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  point_cloud c;
  for (index_t i = 0; i < n; ++i) {
    point3d d(g(rng), g(rng), g(rng));
    c.positions.push_back(radius * d.normalized());
  }
  paint(c, radius);
  return c;
}

// Gaussian blobs around a few random centers.
inline point_cloud clustered_cloud(index_t n, std::uint64_t seed, int clusters = 5, double extent = 100.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, extent);
  std::normal_distribution<double> g(0.0, extent / 30.0);
  std::vector<point3d> centers;
  for (int k = 0; k < clusters; ++k) {
    centers.emplace_back(u(rng), u(rng), u(rng));
  }
  point_cloud c;
  for (index_t i = 0; i < n; ++i) {
    const point3d& m = centers[static_cast<std::size_t>(i) % centers.size()];
    c.positions.push_back(m + point3d(g(rng), g(rng), g(rng)));
  }
  paint(c, extent / 3.0);
  return c;
}

// Thin slab z in [0, thickness].
inline point_cloud slab_cloud(index_t n, std::uint64_t seed, double extent = 100.0, double thickness = 0.5) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, extent);
  std::uniform_real_distribution<double> t(0.0, thickness);
  point_cloud c;
  for (index_t i = 0; i < n; ++i) {
    c.positions.emplace_back(u(rng), u(rng), t(rng));
  }
  paint(c, extent / 2.0);
  return c;
}

inline point_cloud with_luma_shift(point_cloud c, int shift) {
  for (rgb8& px : *c.colors) {
    for (auto& ch : px) {
      ch = static_cast<std::uint8_t>(int(ch) + shift);
    }
  }
  return c;
}

// Fresh directory under the system temp dir, removed on destruction.
class temp_dir {
 public:
  explicit temp_dir(const std::string& name) {
    path_ = std::filesystem::temp_directory_path() / ("rbfim_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~temp_dir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  temp_dir(const temp_dir&) = delete;
  temp_dir& operator=(const temp_dir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  std::filesystem::path path_;
};

}  // namespace rbfim::testing
