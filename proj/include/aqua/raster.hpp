#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aqua/errors.hpp"

namespace aqua {

// Single- or multi-band 2D float grid with a per-pixel validity mask.
// Data is band-major, row-major within each band.
struct Raster {
  int width = 0;
  int height = 0;
  int bands = 1;
  float pixel_size_m = 10.0f;
  std::vector<float> data;           // width * height * bands
  std::vector<uint8_t> valid;        // width * height, 1 = observed
  std::vector<std::string> band_names;  // optional, used for index lookup

  Raster() = default;
  Raster(int w, int h, int b, float px = 10.0f)
      : width(w), height(h), bands(b), pixel_size_m(px),
        data(static_cast<size_t>(w) * h * b, 0.0f),
        valid(static_cast<size_t>(w) * h, 1) {}

  size_t pixels() const { return static_cast<size_t>(width) * height; }

  float& at(int b, int y, int x) {
    return data[(static_cast<size_t>(b) * height + y) * width + x];
  }
  float at(int b, int y, int x) const {
    return data[(static_cast<size_t>(b) * height + y) * width + x];
  }
  uint8_t& valid_at(int y, int x) {
    return valid[static_cast<size_t>(y) * width + x];
  }
  uint8_t valid_at(int y, int x) const {
    return valid[static_cast<size_t>(y) * width + x];
  }

  const float* band(int b) const { return data.data() + static_cast<size_t>(b) * pixels(); }
  float* band(int b) { return data.data() + static_cast<size_t>(b) * pixels(); }

  // Index of a named band, -1 if absent.
  int band_index(const std::string& name) const;
};

// Binary water grid: 0 = ground, 1 = water.
struct WaterMask {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> values;

  WaterMask() = default;
  WaterMask(int w, int h) : width(w), height(h), values(static_cast<size_t>(w) * h, 0) {}

  uint8_t& at(int y, int x) { return values[static_cast<size_t>(y) * width + x]; }
  uint8_t at(int y, int x) const { return values[static_cast<size_t>(y) * width + x]; }
  size_t count_water() const;
};

enum class Split { train, val, test };

std::string to_string(Split s);
Split split_from_string(const std::string& s);

// Co-registered optical + SAR tile, the unit of training.
struct TilePair {
  Raster optical;
  Raster sar;
  std::string tile_id;
  std::string site;
  std::string date;  // ISO-8601
  double cloud_fraction = 0.0;
  Split split = Split::train;
};

struct NormalizeResult {
  Raster raster;
  bool degenerate = false;  // P1 == P99, output forced to zero
};

// Percentile over valid pixels, linear interpolation between order statistics.
// p in [0, 100].
float percentile(const Raster& r, int band, double p);

// Clip a 1-band raster to [P1, P99] of its valid pixels, then min-max scale
// to [0, 1]. Invalid pixels are left untouched.
NormalizeResult normalize_sar(const Raster& r);

// Cut a co-registered scene into non-overlapping tile_size x tile_size pairs,
// row-major scan order. Tiles with any invalid pixel are dropped, as is the
// whole scene when cloud_fraction > 0.01. Edge remainders are dropped.
std::vector<TilePair> tile_scene(const Raster& optical, const Raster& sar,
                                 int tile_size, double cloud_fraction);

// Seeded shuffle-then-cut assignment: round(train_fraction * N) tiles get
// split=train, the rest split=val.
void split_dataset(std::vector<TilePair>& tiles, double train_fraction, uint64_t seed);

}  // namespace aqua
