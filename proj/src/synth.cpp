#include "aqua/synth.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <random>

namespace aqua {

Raster speckle_field(int width, int height, int looks, uint64_t seed) {
  if (looks < 1) throw BadConfig("speckle_field: looks must be >= 1");
  Raster out(width, height, 1);
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> gamma(static_cast<double>(looks), 1.0 / looks);
  for (auto& v : out.data) v = static_cast<float>(gamma(rng));
  return out;
}

namespace {

// Bilinearly interpolated value noise on a coarse lattice.
std::vector<float> value_noise(int width, int height, int cell, std::mt19937_64& rng) {
  int gw = width / cell + 2, gh = height / cell + 2;
  std::vector<float> grid(static_cast<size_t>(gw) * gh);
  std::uniform_real_distribution<float> uni(0.0f, 1.0f);
  for (auto& g : grid) g = uni(rng);

  std::vector<float> field(static_cast<size_t>(width) * height);
  for (int y = 0; y < height; ++y) {
    float fy = static_cast<float>(y) / cell;
    int gy = static_cast<int>(fy);
    float ty = fy - gy;
    for (int x = 0; x < width; ++x) {
      float fx = static_cast<float>(x) / cell;
      int gx = static_cast<int>(fx);
      float tx = fx - gx;
      float v00 = grid[static_cast<size_t>(gy) * gw + gx];
      float v01 = grid[static_cast<size_t>(gy) * gw + gx + 1];
      float v10 = grid[static_cast<size_t>(gy + 1) * gw + gx];
      float v11 = grid[static_cast<size_t>(gy + 1) * gw + gx + 1];
      float top = v00 * (1 - tx) + v01 * tx;
      float bot = v10 * (1 - tx) + v11 * tx;
      field[static_cast<size_t>(y) * width + x] = top * (1 - ty) + bot * ty;
    }
  }
  return field;
}

enum class PixelClass : uint8_t { soil, vegetation, open_water, vegetated_water };

void validate(const SceneSpec& spec) {
  if (spec.width < 1 || spec.height < 1) throw BadConfig("generate_scene: bad dimensions");
  if (spec.water_cover_target < 0.0 || spec.water_cover_target > 1.0)
    throw BadConfig("generate_scene: water_cover_target out of [0,1]");
  if (spec.vegetated_water_fraction < 0.0 || spec.vegetated_water_fraction > 1.0)
    throw BadConfig("generate_scene: vegetated_water_fraction out of [0,1]");
  if (spec.speckle_looks < 1) throw BadConfig("generate_scene: speckle_looks must be >= 1");
  for (const ClassStats* c : {&spec.stats.open_water, &spec.stats.vegetated_water,
                              &spec.stats.soil, &spec.stats.vegetation})
    if (!std::isfinite(c->green_mean) || !std::isfinite(c->nir_mean) ||
        !std::isfinite(c->sar_mean))
      throw BadConfig("generate_scene: non-finite class stats");
}

}  // namespace

SynthScene generate_scene(const SceneSpec& spec) {
  validate(spec);
  const int W = spec.width, H = spec.height;
  const size_t N = static_cast<size_t>(W) * H;

  std::mt19937_64 rng_geom(spec.seed * 0x9e3779b97f4a7c15ULL + 1);
  std::mt19937_64 rng_optical(spec.seed * 0x9e3779b97f4a7c15ULL + 2);

  // Water geometry: two-octave value noise, top-k pixels become water.
  std::vector<float> field = value_noise(W, H, 32, rng_geom);
  std::vector<float> detail = value_noise(W, H, 8, rng_geom);
  for (size_t i = 0; i < N; ++i) field[i] += 0.35f * detail[i];

  size_t n_water = static_cast<size_t>(std::llround(spec.water_cover_target * static_cast<double>(N)));
  std::vector<uint8_t> is_water(N, 0);
  if (n_water > 0) {
    std::vector<size_t> order(N);
    std::iota(order.begin(), order.end(), size_t{0});
    std::nth_element(order.begin(), order.begin() + n_water - 1, order.end(),
                     [&](size_t a, size_t b) { return field[a] > field[b]; });
    for (size_t i = 0; i < n_water; ++i) is_water[order[i]] = 1;
  }
  double achieved = static_cast<double>(n_water) / static_cast<double>(N);
  if (std::abs(achieved - spec.water_cover_target) > 0.05)
    throw InfeasibleSpec("generate_scene: water cover target unreachable");

  // Vegetated water: contiguous patches grown inward from the water margin.
  std::vector<uint8_t> is_vegetated(N, 0);
  size_t n_veg_target = static_cast<size_t>(
      std::llround(spec.vegetated_water_fraction * static_cast<double>(n_water)));
  if (n_veg_target > 0) {
    auto idx = [&](int y, int x) { return static_cast<size_t>(y) * W + x; };
    std::vector<size_t> boundary;
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        size_t i = idx(y, x);
        if (!is_water[i]) continue;
        bool edge = (y == 0 || !is_water[idx(y - 1, x)]) ||
                    (y == H - 1 || !is_water[idx(y + 1, x)]) ||
                    (x == 0 || !is_water[idx(y, x - 1)]) ||
                    (x == W - 1 || !is_water[idx(y, x + 1)]);
        if (edge) boundary.push_back(i);
      }
    std::shuffle(boundary.begin(), boundary.end(), rng_geom);
    std::uniform_int_distribution<int> patch_size(40, 160);

    size_t n_veg = 0;
    for (size_t seed_px : boundary) {
      if (n_veg >= n_veg_target) break;
      if (is_vegetated[seed_px]) continue;
      size_t budget = std::min<size_t>(patch_size(rng_geom), n_veg_target - n_veg);
      std::deque<size_t> frontier{seed_px};
      while (!frontier.empty() && budget > 0) {
        size_t i = frontier.front();
        frontier.pop_front();
        if (is_vegetated[i]) continue;
        is_vegetated[i] = 1;
        ++n_veg;
        --budget;
        int y = static_cast<int>(i / W), x = static_cast<int>(i % W);
        if (y > 0 && is_water[idx(y - 1, x)] && !is_vegetated[idx(y - 1, x)]) frontier.push_back(idx(y - 1, x));
        if (y < H - 1 && is_water[idx(y + 1, x)] && !is_vegetated[idx(y + 1, x)]) frontier.push_back(idx(y + 1, x));
        if (x > 0 && is_water[idx(y, x - 1)] && !is_vegetated[idx(y, x - 1)]) frontier.push_back(idx(y, x - 1));
        if (x < W - 1 && is_water[idx(y, x + 1)] && !is_vegetated[idx(y, x + 1)]) frontier.push_back(idx(y, x + 1));
      }
    }
  }

  // Land split between soil and vegetation from an independent smooth field.
  std::vector<float> land_field = value_noise(W, H, 24, rng_geom);
  std::vector<PixelClass> cls(N);
  for (size_t i = 0; i < N; ++i) {
    if (is_water[i])
      cls[i] = is_vegetated[i] ? PixelClass::vegetated_water : PixelClass::open_water;
    else
      cls[i] = land_field[i] > 0.5f ? PixelClass::vegetation : PixelClass::soil;
  }

  auto stats_of = [&](PixelClass c) -> const ClassStats& {
    switch (c) {
      case PixelClass::open_water: return spec.stats.open_water;
      case PixelClass::vegetated_water: return spec.stats.vegetated_water;
      case PixelClass::soil: return spec.stats.soil;
      default: return spec.stats.vegetation;
    }
  };

  SynthScene scene;
  scene.optical = Raster(W, H, 2, spec.pixel_size_m);
  scene.optical.band_names = {"green", "nir"};
  scene.sar = Raster(W, H, 1, spec.pixel_size_m);
  scene.truth = WaterMask(W, H);
  scene.open_truth = WaterMask(W, H);

  std::normal_distribution<float> noise(0.0f, 1.0f);
  float* green = scene.optical.band(0);
  float* nir = scene.optical.band(1);
  for (size_t i = 0; i < N; ++i) {
    const ClassStats& s = stats_of(cls[i]);
    float g = s.green_mean, n = s.nir_mean;
    if (s.optical_sigma > 0.0f) {
      g += s.optical_sigma * noise(rng_optical);
      n += s.optical_sigma * noise(rng_optical);
    }
    green[i] = std::max(0.0f, g);
    nir[i] = std::max(0.0f, n);
  }

  Raster speckle = speckle_field(W, H, spec.speckle_looks,
                                 spec.seed * 0x9e3779b97f4a7c15ULL + 3);
  for (size_t i = 0; i < N; ++i)
    scene.sar.data[i] = stats_of(cls[i]).sar_mean * speckle.data[i];

  for (size_t i = 0; i < N; ++i) {
    scene.truth.values[i] = is_water[i];
    scene.open_truth.values[i] = (is_water[i] && !is_vegetated[i]) ? 1 : 0;
  }
  return scene;
}

}  // namespace aqua
