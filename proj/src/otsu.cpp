#include "aqua/otsu.hpp"

#include <cmath>
#include <vector>

namespace aqua {

Histogram Histogram::from(const Raster& r) {
  Histogram h;
  for (size_t i = 0; i < r.pixels(); ++i)
    if (r.valid[i]) h.add(r.data[i]);
  return h;
}

OtsuResult otsu_threshold(const Histogram& h) {
  if (h.total == 0) throw EmptyInput("otsu_threshold: empty histogram");

  int occupied = 0, last_bin = 0;
  for (int b = 0; b < 256; ++b)
    if (h.bins[b] > 0) { ++occupied; last_bin = b; }
  if (occupied == 1)
    return {static_cast<float>(last_bin + 1) / 256.0f, true};

  // Cumulative zeroth and first moments; split k puts bins [0,k] in class 0.
  double total = static_cast<double>(h.total);
  double mu_total = 0.0;
  for (int b = 0; b < 256; ++b) mu_total += b * static_cast<double>(h.bins[b]);

  double w0 = 0.0, m0 = 0.0;
  double best_var = -1.0;
  int best_k = 0;
  for (int k = 0; k < 255; ++k) {
    w0 += static_cast<double>(h.bins[k]);
    m0 += k * static_cast<double>(h.bins[k]);
    double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    double mu0 = m0 / w0;
    double mu1 = (mu_total - m0) / w1;
    double var = (w0 / total) * (w1 / total) * (mu0 - mu1) * (mu0 - mu1);
    if (var > best_var) {
      best_var = var;
      best_k = k;
    }
  }
  return {static_cast<float>(best_k + 1) / 256.0f, false};
}

Raster gaussian_filter(const Raster& r, int kernel_size, float sigma) {
  if (r.bands != 1) throw ShapeMismatch("gaussian_filter: expected 1 band");
  if (kernel_size < 1 || kernel_size % 2 == 0)
    throw BadKernel("gaussian_filter: kernel size must be odd and positive");
  if (!(sigma > 0.0f)) throw BadKernel("gaussian_filter: sigma must be positive");

  int half = kernel_size / 2;
  std::vector<float> kernel(static_cast<size_t>(kernel_size) * kernel_size);
  float sum = 0.0f;
  for (int dy = -half; dy <= half; ++dy)
    for (int dx = -half; dx <= half; ++dx) {
      float w = std::exp(-(dx * dx + dy * dy) / (2.0f * sigma * sigma));
      kernel[static_cast<size_t>(dy + half) * kernel_size + (dx + half)] = w;
      sum += w;
    }
  for (auto& w : kernel) w /= sum;

  Raster out(r.width, r.height, 1, r.pixel_size_m);
  out.valid = r.valid;
  #pragma omp parallel for schedule(static)
  for (int y = 0; y < r.height; ++y) {
    for (int x = 0; x < r.width; ++x) {
      if (!r.valid_at(y, x)) {
        out.at(0, y, x) = r.at(0, y, x);
        continue;
      }
      float acc = 0.0f, wsum = 0.0f;
      for (int dy = -half; dy <= half; ++dy) {
        int yy = std::clamp(y + dy, 0, r.height - 1);
        for (int dx = -half; dx <= half; ++dx) {
          int xx = std::clamp(x + dx, 0, r.width - 1);
          if (!r.valid_at(yy, xx)) continue;
          float w = kernel[static_cast<size_t>(dy + half) * kernel_size + (dx + half)];
          acc += w * r.at(0, yy, xx);
          wsum += w;
        }
      }
      out.at(0, y, x) = wsum > 0.0f ? acc / wsum : 0.0f;
    }
  }
  return out;
}

WaterMask otsu_segment(const Raster& sar, const OtsuSegmentOptions& opt,
                       float* threshold_out) {
  const Raster* input = &sar;
  Raster filtered;
  if (opt.use_filter) {
    filtered = gaussian_filter(sar, opt.kernel_size, opt.sigma);
    input = &filtered;
  }
  OtsuResult res = otsu_threshold(Histogram::from(*input));
  if (threshold_out) *threshold_out = res.threshold;

  WaterMask m(sar.width, sar.height);
  for (size_t i = 0; i < sar.pixels(); ++i)
    m.values[i] = (input->valid[i] && input->data[i] <= res.threshold) ? 1 : 0;
  return m;
}

}  // namespace aqua
