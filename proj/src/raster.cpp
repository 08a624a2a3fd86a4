#include "aqua/raster.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace aqua {

int Raster::band_index(const std::string& name) const {
  for (size_t i = 0; i < band_names.size(); ++i)
    if (band_names[i] == name) return static_cast<int>(i);
  return -1;
}

size_t WaterMask::count_water() const {
  return static_cast<size_t>(std::count(values.begin(), values.end(), uint8_t{1}));
}

std::string to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "train";
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  throw DataError("unknown split: " + s);
}

float percentile(const Raster& r, int band, double p) {
  std::vector<float> vals;
  vals.reserve(r.pixels());
  const float* d = r.band(band);
  for (size_t i = 0; i < r.pixels(); ++i)
    if (r.valid[i]) vals.push_back(d[i]);
  if (vals.empty()) throw AllInvalid("percentile: no valid pixels");
  std::sort(vals.begin(), vals.end());
  if (vals.size() == 1) return vals[0];
  double rank = p / 100.0 * (vals.size() - 1);
  size_t lo = static_cast<size_t>(std::floor(rank));
  size_t hi = std::min(lo + 1, vals.size() - 1);
  double frac = rank - static_cast<double>(lo);
  return static_cast<float>(vals[lo] * (1.0 - frac) + vals[hi] * frac);
}

NormalizeResult normalize_sar(const Raster& r) {
  if (r.bands != 1) throw ShapeMismatch("normalize_sar: expected 1 band");
  size_t n_valid = 0;
  for (auto v : r.valid) n_valid += v;
  if (n_valid == 0) throw AllInvalid("normalize_sar: all pixels invalid");

  float p1 = percentile(r, 0, 1.0);
  float p99 = percentile(r, 0, 99.0);

  NormalizeResult out;
  out.raster = r;
  if (p99 <= p1) {
    out.degenerate = true;
    for (size_t i = 0; i < r.pixels(); ++i)
      if (r.valid[i]) out.raster.data[i] = 0.0f;
    return out;
  }
  float inv = 1.0f / (p99 - p1);
  for (size_t i = 0; i < r.pixels(); ++i) {
    if (!r.valid[i]) continue;
    float v = (r.data[i] - p1) * inv;
    out.raster.data[i] = std::clamp(v, 0.0f, 1.0f);
  }
  return out;
}

namespace {

bool block_all_valid(const Raster& r, int x0, int y0, int ts) {
  for (int y = y0; y < y0 + ts; ++y)
    for (int x = x0; x < x0 + ts; ++x)
      if (!r.valid_at(y, x)) return false;
  return true;
}

Raster crop(const Raster& r, int x0, int y0, int ts) {
  Raster out(ts, ts, r.bands, r.pixel_size_m);
  out.band_names = r.band_names;
  for (int b = 0; b < r.bands; ++b)
    for (int y = 0; y < ts; ++y)
      for (int x = 0; x < ts; ++x)
        out.at(b, y, x) = r.at(b, y0 + y, x0 + x);
  for (int y = 0; y < ts; ++y)
    for (int x = 0; x < ts; ++x)
      out.valid_at(y, x) = r.valid_at(y0 + y, x0 + x);
  return out;
}

}  // namespace

std::vector<TilePair> tile_scene(const Raster& optical, const Raster& sar,
                                 int tile_size, double cloud_fraction) {
  if (optical.width != sar.width || optical.height != sar.height)
    throw ShapeMismatch("tile_scene: optical and sar dimensions differ");

  std::vector<TilePair> out;
  if (cloud_fraction > 0.01) return out;

  int ny = optical.height / tile_size;
  int nx = optical.width / tile_size;
  for (int ty = 0; ty < ny; ++ty) {
    for (int tx = 0; tx < nx; ++tx) {
      int x0 = tx * tile_size, y0 = ty * tile_size;
      if (!block_all_valid(optical, x0, y0, tile_size)) continue;
      if (!block_all_valid(sar, x0, y0, tile_size)) continue;
      TilePair p;
      p.optical = crop(optical, x0, y0, tile_size);
      p.sar = crop(sar, x0, y0, tile_size);
      p.tile_id = "r" + std::to_string(ty) + "c" + std::to_string(tx);
      p.cloud_fraction = cloud_fraction;
      out.push_back(std::move(p));
    }
  }
  return out;
}

void split_dataset(std::vector<TilePair>& tiles, double train_fraction, uint64_t seed) {
  if (tiles.empty()) throw EmptyInput("split_dataset: no tiles");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw BadConfig("split_dataset: train_fraction must be in (0,1)");

  std::vector<size_t> order(tiles.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  size_t n_train = static_cast<size_t>(std::llround(train_fraction * tiles.size()));
  for (size_t i = 0; i < order.size(); ++i)
    tiles[order[i]].split = i < n_train ? Split::train : Split::val;
}

}  // namespace aqua
