// Copyright 2026 The depthcomp Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "depthcomp/scene.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace depthcomp {
namespace {

using Vec3 = Eigen::Vector3d;

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double lattice_value(std::uint64_t key, std::int64_t i, std::int64_t j) {
  std::uint64_t h = splitmix64(key ^ splitmix64(static_cast<std::uint64_t>(i) ^
                                                splitmix64(static_cast<std::uint64_t>(j))));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double smooth(double t) { return t * t * (3.0 - 2.0 * t); }

// Value noise in [0, 1] with smoothstep interpolation.
double value_noise(std::uint64_t key, double u, double v) {
  const double fu = std::floor(u), fv = std::floor(v);
  const auto i = static_cast<std::int64_t>(fu);
  const auto j = static_cast<std::int64_t>(fv);
  const double a = smooth(u - fu), b = smooth(v - fv);
  const double v00 = lattice_value(key, i, j);
  const double v10 = lattice_value(key, i + 1, j);
  const double v01 = lattice_value(key, i, j + 1);
  const double v11 = lattice_value(key, i + 1, j + 1);
  return (1 - b) * ((1 - a) * v00 + a * v10) + b * ((1 - a) * v01 + a * v11);
}

double texture(std::uint64_t key, double u, double v) {
  return 0.7 * value_noise(key, u, v) +
         0.3 * value_noise(key + 1, 2.0 * u + 17.0, 2.0 * v + 5.0);
}

struct Material {
  std::array<double, 3> base{};
  std::uint64_t key = 0;
  double cell = 1.0;  // world units per texture cell
};

struct Box {
  Vec3 lo, hi;
  Material mat;
};

struct Cylinder {
  double cx = 0, cz = 0, radius = 1, top = 0;
  Material mat;
};

struct World {
  double ground_y = -1.65;
  double wall_z = 60.0;
  double focal = 96.0;
  Material ground, wall;
  std::vector<Box> boxes;
  std::vector<Cylinder> cylinders;
};

struct Hit {
  double t = kInf;  // ray parameter; equals depth for rays with dir.z() == 1
  Vec3 normal = Vec3::Zero();
  const Material* mat = nullptr;
  double u = 0, v = 0;  // texture coordinates in cells
};

void hit_box(const Box& b, const Vec3& o, const Vec3& d, Hit& best) {
  double t0 = -kInf, t1 = kInf;
  int axis = -1;
  double sign = 0;
  for (int k = 0; k < 3; ++k) {
    if (std::abs(d[k]) < 1e-15) {
      if (o[k] < b.lo[k] || o[k] > b.hi[k]) return;
      continue;
    }
    double ta = (b.lo[k] - o[k]) / d[k];
    double tb = (b.hi[k] - o[k]) / d[k];
    double s = -1.0;  // entering through the lo face
    if (ta > tb) {
      std::swap(ta, tb);
      s = 1.0;
    }
    if (ta > t0) {
      t0 = ta;
      axis = k;
      sign = s;
    }
    t1 = std::min(t1, tb);
  }
  if (axis < 0 || t0 > t1 || t0 <= 1e-9 || t0 >= best.t) return;
  best.t = t0;
  best.normal = Vec3::Zero();
  best.normal[axis] = sign;
  best.mat = &b.mat;
  const Vec3 p = o + t0 * d;
  const double c = b.mat.cell;
  if (axis == 0) {
    best.u = p.z() / c, best.v = p.y() / c;
  } else if (axis == 1) {
    best.u = p.x() / c, best.v = p.z() / c;
  } else {
    best.u = p.x() / c, best.v = p.y() / c;
  }
}

void hit_cylinder(const Cylinder& cy, double ground_y, const Vec3& o,
                  const Vec3& d, Hit& best) {
  const double ox = o.x() - cy.cx, oz = o.z() - cy.cz;
  const double a = d.x() * d.x() + d.z() * d.z();
  const double b = 2.0 * (ox * d.x() + oz * d.z());
  const double c = ox * ox + oz * oz - cy.radius * cy.radius;
  const double disc = b * b - 4 * a * c;
  if (a > 0 && disc >= 0) {
    const double t = (-b - std::sqrt(disc)) / (2 * a);
    if (t > 1e-9 && t < best.t) {
      const Vec3 p = o + t * d;
      if (p.y() >= ground_y && p.y() <= cy.top) {
        best.t = t;
        best.normal = Vec3(p.x() - cy.cx, 0, p.z() - cy.cz) / cy.radius;
        best.mat = &cy.mat;
        const double ang = std::atan2(p.x() - cy.cx, -(p.z() - cy.cz));
        best.u = ang * cy.radius / cy.mat.cell;
        best.v = p.y() / cy.mat.cell;
      }
    }
  }
  if (std::abs(d.y()) > 1e-15) {
    const double t = (cy.top - o.y()) / d.y();
    if (t > 1e-9 && t < best.t) {
      const Vec3 p = o + t * d;
      const double rx = p.x() - cy.cx, rz = p.z() - cy.cz;
      if (rx * rx + rz * rz <= cy.radius * cy.radius) {
        best.t = t;
        best.normal = Vec3(0, 1, 0);
        best.mat = &cy.mat;
        best.u = p.x() / cy.mat.cell;
        best.v = p.z() / cy.mat.cell;
      }
    }
  }
}

// `d` must have d.z() == 1 so that the returned t is the z coordinate
// offset from the origin.
Hit cast(const World& w, const Vec3& o, const Vec3& d) {
  Hit best;
  // Wall; every forward ray reaches it.
  best.t = (w.wall_z - o.z()) / d.z();
  best.normal = Vec3(0, 0, -1);
  best.mat = &w.wall;
  {
    const Vec3 p = o + best.t * d;
    best.u = p.x() / w.wall.cell;
    best.v = p.y() / w.wall.cell;
  }
  if (d.y() < 0) {
    const double t = (w.ground_y - o.y()) / d.y();
    if (t > 1e-9 && t < best.t) {
      const Vec3 p = o + t * d;
      best.t = t;
      best.normal = Vec3(0, 1, 0);
      best.mat = &w.ground;
      // Cell size grows with distance so texture frequency in the image
      // stays roughly constant; still a function of the 3D point only.
      best.u = w.focal * p.x() / (p.z() * w.ground.cell);
      best.v = w.focal * -w.ground_y / (p.z() * w.ground.cell);
    }
  }
  for (const auto& b : w.boxes) hit_box(b, o, d, best);
  for (const auto& c : w.cylinders) hit_cylinder(c, w.ground_y, o, d, best);
  return best;
}

std::array<double, 3> shade(const Hit& h) {
  static const Vec3 light = Vec3(-0.4, 0.8, -0.45).normalized();
  const double lambert = std::max(0.0, h.normal.dot(light));
  const double s = 0.35 + 0.65 * lambert;
  const double t = texture(h.mat->key, h.u, h.v);
  std::array<double, 3> rgb{};
  for (int c = 0; c < 3; ++c) {
    rgb[c] = std::clamp(h.mat->base[c] * (0.45 + 1.1 * t) * s, 0.0, 1.0);
  }
  return rgb;
}

Material random_material(std::mt19937_64& rng, double cell) {
  std::uniform_real_distribution<double> col(0.2, 0.85);
  Material m;
  for (auto& c : m.base) c = col(rng);
  m.key = rng();
  m.cell = cell;
  return m;
}

World build_world(std::mt19937_64& rng, const SceneConfig& cfg) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  World w;
  w.focal = cfg.resolved_focal();
  w.ground_y = -cfg.camera_height;
  w.wall_z = uniform(0.55, 0.9) * cfg.max_depth;
  // A texture cell spans about `px` pixels at distance z.
  const double px = 5.0;
  w.ground = random_material(rng, px);
  w.wall = random_material(rng, px * w.wall_z / w.focal);

  std::uniform_int_distribution<int> count(cfg.min_objects, cfg.max_objects);
  const int n = count(rng);
  const double near = std::max(cfg.min_depth + 2.0, 5.0);
  const double far = std::max(near + 1.0, 0.5 * w.wall_z);
  for (int i = 0; i < n; ++i) {
    const double z = uniform(near, far);
    const double half_fov = 0.5 * cfg.width / w.focal;
    const double x = uniform(-0.9, 0.9) * half_fov * z;
    const double height = uniform(0.8, 4.0);
    const double cell = px * z / w.focal;
    if (unit(rng) < 0.6) {
      Box b;
      const double sx = uniform(0.8, 4.0), sz = uniform(0.8, 4.0);
      b.lo = Vec3(x - sx / 2, w.ground_y, z);
      b.hi = Vec3(x + sx / 2, w.ground_y + height, z + sz);
      b.mat = random_material(rng, cell);
      w.boxes.push_back(b);
    } else {
      Cylinder c;
      c.radius = uniform(0.4, 1.8);
      c.cx = x;
      c.cz = z + c.radius;
      c.top = w.ground_y + height;
      c.mat = random_material(rng, cell);
      w.cylinders.push_back(c);
    }
  }
  return w;
}

void render(const World& w, const SceneConfig& cfg, double cam_x,
            Tensor& image, Tensor* depth) {
  const int H = cfg.height, W = cfg.width, ss = cfg.supersample;
  const double f = w.focal, cx = 0.5 * W, cy = 0.5 * H;
  const Vec3 origin(cam_x, 0, 0);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      std::array<double, 3> acc{};
      for (int sy = 0; sy < ss; ++sy) {
        for (int sx = 0; sx < ss; ++sx) {
          const double px = x + (sx + 0.5) / ss;
          const double py = y + (sy + 0.5) / ss;
          const Vec3 dir((px - cx) / f, -(py - cy) / f, 1.0);
          const auto rgb = shade(cast(w, origin, dir));
          for (int c = 0; c < 3; ++c) acc[c] += rgb[c];
        }
      }
      for (int c = 0; c < 3; ++c) image.at(0, c, y, x) = acc[c] / (ss * ss);
      if (depth) {
        const Vec3 dir((x + 0.5 - cx) / f, -(y + 0.5 - cy) / f, 1.0);
        depth->at(0, 0, y, x) = cast(w, origin, dir).t;
      }
    }
  }
}

}  // namespace

double SceneConfig::resolved_focal() const {
  return focal_px > 0.0 ? focal_px : 0.5 * width;
}

void SceneConfig::validate() const {
  if (height < 1 || width < 1) {
    throw std::invalid_argument("scene extent must be positive, got " +
                                std::to_string(height) + "x" +
                                std::to_string(width));
  }
  if (!(min_depth > 0.0) || !(max_depth > min_depth)) {
    throw std::invalid_argument("scene depth range must satisfy 0 < min < max");
  }
  if (!(camera_height > 0.0) || !(baseline_m > 0.0) || focal_px < 0.0) {
    throw std::invalid_argument("scene camera parameters must be positive");
  }
  if (min_objects < 0 || max_objects < min_objects) {
    throw std::invalid_argument("scene object count range is empty");
  }
  if (supersample < 1) throw std::invalid_argument("supersample must be >= 1");
  // Nearest ground point is at the bottom image row.
  const double nearest = camera_height * resolved_focal() / (0.5 * height);
  if (!(nearest > min_depth)) {
    throw std::invalid_argument("camera too low: ground reaches depth " +
                                std::to_string(nearest) +
                                " below min_depth");
  }
}

std::uint64_t scene_seed(std::uint64_t seed, std::size_t index) {
  return splitmix64(splitmix64(seed) + index);
}

Scene generate_scene(std::uint64_t seed, const SceneConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  const World w = build_world(rng, cfg);

  Scene s;
  s.seed = seed;
  s.image = Tensor({1, 3, cfg.height, cfg.width});
  s.depth = Tensor({1, 1, cfg.height, cfg.width});
  render(w, cfg, 0.0, s.image, &s.depth);
  for (std::size_t i = 0; i < s.depth.size(); ++i) {
    s.depth[i] = std::clamp(s.depth[i], cfg.min_depth, cfg.max_depth);
  }
  s.validity = Tensor(s.depth.shape(), 1.0);
  if (!cfg.stereo) return s;

  const StereoRig rig{w.focal, cfg.baseline_m};
  s.rig = rig;
  s.stereo_image = Tensor({1, 3, cfg.height, cfg.width});
  render(w, cfg, -cfg.baseline_m, s.stereo_image, nullptr);

  // A reference pixel is occluded when the stereo camera's ray towards its
  // surface point stops earlier.
  s.occlusion = Tensor({1, 1, cfg.height, cfg.width});
  const double f = w.focal, cx = 0.5 * cfg.width, cy = 0.5 * cfg.height;
  const Vec3 eye(-cfg.baseline_m, 0, 0);
  for (int y = 0; y < cfg.height; ++y) {
    for (int x = 0; x < cfg.width; ++x) {
      const double z = s.depth.at(0, 0, y, x);
      const Vec3 p(z * (x + 0.5 - cx) / f, -z * (y + 0.5 - cy) / f, z);
      const Vec3 dir = (p - eye) / z;
      const double t = cast(w, eye, dir).t;
      if (t < z * (1.0 - 1e-9)) s.occlusion.at(0, 0, y, x) = 1.0;
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Sparse sampling

SparseSample make_sparse(std::vector<std::size_t> omega, std::vector<double> z,
                         int height, int width) {
  if (omega.size() != z.size()) {
    throw std::invalid_argument("make_sparse: omega and z differ in length");
  }
  SparseSample s;
  s.z_map = Tensor({1, 1, height, width});
  s.validity = Tensor({1, 1, height, width});
  std::vector<std::size_t> order(omega.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return omega[a] < omega[b]; });
  for (std::size_t i : order) {
    if (omega[i] >= s.z_map.size()) {
      throw std::out_of_range("make_sparse: index outside lattice");
    }
    if (s.validity[omega[i]] != 0.0) {
      throw std::invalid_argument("make_sparse: duplicate index " +
                                  std::to_string(omega[i]));
    }
    s.omega.push_back(omega[i]);
    s.z.push_back(z[i]);
    s.z_map[omega[i]] = z[i];
    s.validity[omega[i]] = 1.0;
  }
  s.density = static_cast<double>(s.omega.size()) /
              (static_cast<double>(height) * width);
  return s;
}

SparseSample sample_sparse(const Tensor& depth, double density,
                           std::uint64_t seed, const Tensor& valid,
                           double noise_std) {
  const Shape sh = depth.shape();
  if (sh.n != 1 || sh.c != 1) {
    throw std::invalid_argument("sample_sparse expects a (1,1,h,w) depth map, got " +
                                to_string(sh));
  }
  if (!(density > 0.0 && density <= 1.0)) {
    throw std::invalid_argument("density must lie in (0, 1], got " +
                                std::to_string(density));
  }
  if (!valid.empty()) require_same_shape(sh, valid.shape(), "sample_sparse mask");
  if (noise_std < 0.0) throw std::invalid_argument("noise_std must be >= 0");
  const std::size_t hw = sh.plane();
  const auto k = static_cast<std::size_t>(
      std::floor(density * static_cast<double>(hw) + 0.5));
  if (k == 0) {
    throw std::invalid_argument("density " + std::to_string(density) +
                                " selects no pixels on a " + std::to_string(sh.h) +
                                "x" + std::to_string(sh.w) + " lattice");
  }
  std::vector<std::size_t> pool;
  pool.reserve(hw);
  for (std::size_t i = 0; i < hw; ++i) {
    if (valid.empty() || valid[i] != 0.0) pool.push_back(i);
  }
  if (pool.size() < k) {
    throw std::invalid_argument("only " + std::to_string(pool.size()) +
                                " valid pixels for " + std::to_string(k) +
                                " samples");
  }
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  std::vector<double> z(k);
  std::normal_distribution<double> noise(0.0, noise_std > 0 ? noise_std : 1.0);
  for (std::size_t i = 0; i < k; ++i) {
    z[i] = depth[pool[i]];
    if (noise_std > 0) z[i] = std::max(1e-3, z[i] + noise(rng));
  }
  return make_sparse(std::move(pool), std::move(z), sh.h, sh.w);
}

SparseSample sample_sparse(const Scene& scene, double density,
                           std::uint64_t seed) {
  return sample_sparse(scene.depth, density, seed, scene.validity);
}

// ---------------------------------------------------------------------------
// Augmentation

void AugmentationConfig::validate() const {
  if (crop_height < 0 || crop_width < 0) {
    throw std::invalid_argument("crop size must be non-negative");
  }
  if (!(flip_h >= 0.0 && flip_h <= 1.0) || !(flip_v >= 0.0 && flip_v <= 1.0)) {
    throw std::invalid_argument("flip probabilities must lie in [0, 1]");
  }
}

namespace {

template <typename Fn>
Tensor remap(const Tensor& t, int height, int width, Fn src) {
  if (t.empty()) return t;
  const Shape s = t.shape();
  Tensor out({s.n, s.c, height, width});
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
          const auto [sy, sx] = src(y, x);
          out.at(n, c, y, x) = t.at(n, c, sy, sx);
        }
      }
    }
  }
  return out;
}

// Applies a pixel map to every per-pixel field of the scene. `dst` maps a
// source pixel to its destination, or (-1, -1) when it is dropped.
template <typename Src, typename Dst>
Augmented transform(const Scene& scene, const SparseSample& sample, int height,
                    int width, Src src, Dst dst) {
  Augmented out;
  out.scene = scene;
  out.scene.image = remap(scene.image, height, width, src);
  out.scene.depth = remap(scene.depth, height, width, src);
  out.scene.validity = remap(scene.validity, height, width, src);
  out.scene.stereo_image = remap(scene.stereo_image, height, width, src);
  out.scene.occlusion = remap(scene.occlusion, height, width, src);
  const int w0 = scene.depth.shape().w;
  std::vector<std::size_t> omega;
  std::vector<double> z;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const int y = static_cast<int>(sample.omega[i] / w0);
    const int x = static_cast<int>(sample.omega[i] % w0);
    const auto [ny, nx] = dst(y, x);
    if (ny < 0) continue;
    omega.push_back(static_cast<std::size_t>(ny) * width + nx);
    z.push_back(sample.z[i]);
  }
  out.sample = make_sparse(std::move(omega), std::move(z), height, width);
  return out;
}

}  // namespace

Augmented crop(const Scene& scene, const SparseSample& sample, int top,
               int left, int height, int width) {
  const Shape s = scene.depth.shape();
  if (height < 1 || width < 1 || top < 0 || left < 0 || top + height > s.h ||
      left + width > s.w) {
    throw std::invalid_argument("crop " + std::to_string(height) + "x" +
                                std::to_string(width) + " at (" +
                                std::to_string(top) + "," + std::to_string(left) +
                                ") exceeds scene " + std::to_string(s.h) + "x" +
                                std::to_string(s.w));
  }
  return transform(
      scene, sample, height, width,
      [&](int y, int x) { return std::pair{y + top, x + left}; },
      [&](int y, int x) {
        const int ny = y - top, nx = x - left;
        if (ny < 0 || nx < 0 || ny >= height || nx >= width) return std::pair{-1, -1};
        return std::pair{ny, nx};
      });
}

Augmented flip_horizontal(const Scene& scene, const SparseSample& sample) {
  const Shape s = scene.depth.shape();
  auto mirror = [&](int y, int x) { return std::pair{y, s.w - 1 - x}; };
  Augmented out = transform(scene, sample, s.h, s.w, mirror, mirror);
  out.scene.warp_sign = -scene.warp_sign;
  return out;
}

Augmented flip_vertical(const Scene& scene, const SparseSample& sample) {
  const Shape s = scene.depth.shape();
  auto mirror = [&](int y, int x) { return std::pair{s.h - 1 - y, x}; };
  return transform(scene, sample, s.h, s.w, mirror, mirror);
}

Scene equalize_histogram(const Scene& scene) {
  constexpr int kBins = 256;
  const Shape s = scene.image.shape();
  auto luma = [](const Tensor& t, int y, int x) {
    return 0.299 * t.at(0, 0, y, x) + 0.587 * t.at(0, 1, y, x) +
           0.114 * t.at(0, 2, y, x);
  };
  auto bin = [](double l) {
    return std::clamp(static_cast<int>(l * kBins), 0, kBins - 1);
  };
  std::array<double, kBins> cdf{};
  for (int y = 0; y < s.h; ++y) {
    for (int x = 0; x < s.w; ++x) cdf[bin(luma(scene.image, y, x))] += 1.0;
  }
  std::partial_sum(cdf.begin(), cdf.end(), cdf.begin());
  const double total = static_cast<double>(s.plane());
  for (auto& c : cdf) c /= total;

  auto apply = [&](Tensor& t) {
    if (t.empty()) return;
    for (int y = 0; y < s.h; ++y) {
      for (int x = 0; x < s.w; ++x) {
        const double l = luma(t, y, x);
        const double gain = l > 1e-6 ? cdf[bin(l)] / l : 1.0;
        for (int c = 0; c < 3; ++c) {
          t.at(0, c, y, x) = std::clamp(t.at(0, c, y, x) * gain, 0.0, 1.0);
        }
      }
    }
  };
  Scene out = scene;
  apply(out.image);
  apply(out.stereo_image);
  return out;
}

SparseSample shift_sparse(const SparseSample& sample, int height, int width,
                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> step(-1, 1);
  std::vector<double> best(static_cast<std::size_t>(height) * width, -1.0);
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const int y = static_cast<int>(sample.omega[i] / width) + step(rng);
    const int x = static_cast<int>(sample.omega[i] % width) + step(rng);
    if (y < 0 || x < 0 || y >= height || x >= width) continue;
    double& slot = best[static_cast<std::size_t>(y) * width + x];
    slot = std::max(slot, sample.z[i]);
  }
  std::vector<std::size_t> omega;
  std::vector<double> z;
  for (std::size_t i = 0; i < best.size(); ++i) {
    if (best[i] < 0.0) continue;
    omega.push_back(i);
    z.push_back(best[i]);
  }
  return make_sparse(std::move(omega), std::move(z), height, width);
}

Augmented augment(const Scene& scene, const SparseSample& sample,
                  const AugmentationConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const Shape s = scene.depth.shape();
  const int ch = cfg.crop_height > 0 ? cfg.crop_height : s.h;
  const int cw = cfg.crop_width > 0 ? cfg.crop_width : s.w;
  if (ch > s.h || cw > s.w) {
    throw std::invalid_argument("crop " + std::to_string(ch) + "x" +
                                std::to_string(cw) + " larger than scene " +
                                std::to_string(s.h) + "x" + std::to_string(s.w));
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> top_d(0, s.h - ch), left_d(0, s.w - cw);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const int top = top_d(rng), left = left_d(rng);
  const bool fh = coin(rng) < cfg.flip_h;
  const bool fv = coin(rng) < cfg.flip_v;
  const std::uint64_t shift_seed = rng();

  Augmented out{scene, sample};
  if (ch != s.h || cw != s.w) out = crop(out.scene, out.sample, top, left, ch, cw);
  if (fh) out = flip_horizontal(out.scene, out.sample);
  if (fv) out = flip_vertical(out.scene, out.sample);
  if (cfg.hist_eq) out.scene = equalize_histogram(out.scene);
  if (cfg.sparse_shift) out.sample = shift_sparse(out.sample, ch, cw, shift_seed);
  return out;
}

// ---------------------------------------------------------------------------

Tensor nearest_fill(const SparseSample& sample, int height, int width) {
  if (sample.size() == 0) throw std::invalid_argument("nearest_fill: no samples");
  Tensor out({1, 1, height, width});
  std::vector<int> sy(sample.size()), sx(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    sy[i] = static_cast<int>(sample.omega[i] / width);
    sx[i] = static_cast<int>(sample.omega[i] % width);
  }
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      long best = std::numeric_limits<long>::max();
      std::size_t arg = 0;
      for (std::size_t i = 0; i < sample.size(); ++i) {
        const long dy = sy[i] - y, dx = sx[i] - x;
        const long d2 = dy * dy + dx * dx;
        if (d2 < best) {
          best = d2;
          arg = i;
        }
      }
      out.at(0, 0, y, x) = sample.z[arg];
    }
  }
  return out;
}

}  // namespace depthcomp
