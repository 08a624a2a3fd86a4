#pragma once

#include <array>
#include <cstdint>

#include "aqua/raster.hpp"

namespace aqua {

// 256-bin intensity histogram over the normalized [0,1] range.
struct Histogram {
  std::array<uint64_t, 256> bins{};
  uint64_t total = 0;

  void add(float v) {
    int b = static_cast<int>(v * 256.0f);
    if (b < 0) b = 0;
    if (b > 255) b = 255;
    ++bins[b];
    ++total;
  }

  static Histogram from(const Raster& r);
};

struct OtsuResult {
  float threshold = 0.0f;  // bin edge in [0,1]
  bool degenerate = false; // all mass in a single bin
};

// Threshold maximizing between-class variance w0*w1*(mu0-mu1)^2 over all
// 255 bin-edge candidates; ties break to the smallest threshold.
OtsuResult otsu_threshold(const Histogram& h);

// Gaussian blur with edge replication. Invalid pixels are excluded from the
// weighted sum and the remaining weights renormalized.
Raster gaussian_filter(const Raster& r, int kernel_size, float sigma);

struct OtsuSegmentOptions {
  bool use_filter = false;
  int kernel_size = 5;
  float sigma = 1.0f;
};

// Unsupervised baseline: water = low backscatter, i.e. intensity <= t*.
WaterMask otsu_segment(const Raster& sar, const OtsuSegmentOptions& opt,
                       float* threshold_out = nullptr);

}  // namespace aqua
