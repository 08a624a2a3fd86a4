#pragma once

#include <cstdint>

#include "aqua/raster.hpp"

namespace aqua {

// Per-class reflectance / backscatter statistics.
struct ClassStats {
  float green_mean = 0.0f;
  float nir_mean = 0.0f;
  float optical_sigma = 0.0f;  // shared additive noise sigma for both bands
  float sar_mean = 0.0f;       // multiplied by gamma speckle
};

struct BandStats {
  ClassStats open_water{0.10f, 0.04f, 0.015f, 0.05f};
  ClassStats vegetated_water{0.07f, 0.30f, 0.015f, 0.05f};
  ClassStats soil{0.12f, 0.22f, 0.015f, 0.35f};
  ClassStats vegetation{0.06f, 0.36f, 0.015f, 0.45f};
};

struct SceneSpec {
  uint64_t seed = 0;
  int width = 256;
  int height = 256;
  double water_cover_target = 0.3;
  double vegetated_water_fraction = 0.0;
  int speckle_looks = 4;
  BandStats stats;
  float pixel_size_m = 10.0f;
};

struct SynthScene {
  Raster optical;        // bands: green, nir
  Raster sar;            // 1 band, VH-like backscatter
  WaterMask truth;       // all water, vegetated included
  WaterMask open_truth;  // open water only
};

// Multiplicative multilook speckle: i.i.d. gamma(shape=L, scale=1/L),
// mean 1, variance 1/L.
Raster speckle_field(int width, int height, int looks, uint64_t seed);

// Seeded procedural scene: smoothed random field thresholded to the water
// target, vegetated patches grown at water margins, per-class optical
// reflectances, gamma-speckled SAR backscatter.
SynthScene generate_scene(const SceneSpec& spec);

}  // namespace aqua
