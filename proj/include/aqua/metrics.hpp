#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "aqua/raster.hpp"

namespace aqua {

struct ConfusionCounts {
  uint64_t tp = 0, tn = 0, fp = 0, fn = 0;

  uint64_t total() const { return tp + tn + fp + fn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp; tn += o.tn; fp += o.fp; fn += o.fn;
    return *this;
  }
};

struct MetricsReport {
  ConfusionCounts counts;
  double pa = 0.0, iou = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;
  std::string site;
  uint64_t n_pixels = 0;
};

// Positive class = water; counts over valid pixels only (pass nullptr to
// treat every pixel as valid).
ConfusionCounts confusion(const WaterMask& pred, const WaterMask& truth,
                          const std::vector<uint8_t>* valid = nullptr);

// PA, IoU, Precision, Recall, F1 from raw counts. 0/0 metrics define to 1
// when no positives exist and none were predicted, else 0.
MetricsReport metrics(const ConfusionCounts& counts);

// Size-weighted aggregation: pool raw counts, recompute metrics.
MetricsReport aggregate_weighted(const std::vector<MetricsReport>& reports);

enum class ConfusionNorm { all, per_class };

// Row-major 2x2 grid {TN, FP, FN, TP} normalized by grand total or by
// actual-class totals.
std::array<double, 4> normalized_confusion(const ConfusionCounts& counts,
                                           ConfusionNorm mode);

// Water area in hectares.
double water_extent(const WaterMask& mask, float pixel_size_m);

}  // namespace aqua
