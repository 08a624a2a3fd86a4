#include "aqua/metrics.hpp"

namespace aqua {

ConfusionCounts confusion(const WaterMask& pred, const WaterMask& truth,
                          const std::vector<uint8_t>* valid) {
  if (pred.width != truth.width || pred.height != truth.height)
    throw ShapeMismatch("confusion: mask shapes differ");
  ConfusionCounts c;
  for (size_t i = 0; i < pred.values.size(); ++i) {
    if (valid && !(*valid)[i]) continue;
    bool p = pred.values[i] != 0;
    bool t = truth.values[i] != 0;
    if (p && t) ++c.tp;
    else if (p && !t) ++c.fp;
    else if (!p && t) ++c.fn;
    else ++c.tn;
  }
  return c;
}

namespace {
double ratio(uint64_t num, uint64_t den, double vacuous) {
  return den == 0 ? vacuous : static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace

MetricsReport metrics(const ConfusionCounts& c) {
  if (c.total() == 0) throw EmptyInput("metrics: zero evaluated pixels");
  MetricsReport r;
  r.counts = c;
  r.n_pixels = c.total();
  bool vacuous = c.tp == 0 && c.fp == 0 && c.fn == 0;  // no water, none predicted
  double empty = vacuous ? 1.0 : 0.0;
  r.pa = ratio(c.tp + c.tn, c.total(), 1.0);
  r.iou = ratio(c.tp, c.tp + c.fp + c.fn, empty);
  r.precision = ratio(c.tp, c.tp + c.fp, empty);
  r.recall = ratio(c.tp, c.tp + c.fn, empty);
  r.f1 = (r.precision + r.recall) > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : empty;
  return r;
}

MetricsReport aggregate_weighted(const std::vector<MetricsReport>& reports) {
  if (reports.empty()) throw EmptyInput("aggregate_weighted: no reports");
  ConfusionCounts pooled;
  for (const auto& r : reports) pooled += r.counts;
  MetricsReport agg = metrics(pooled);
  agg.site = "aggregate";
  return agg;
}

std::array<double, 4> normalized_confusion(const ConfusionCounts& c,
                                           ConfusionNorm mode) {
  if (c.total() == 0) throw EmptyInput("normalized_confusion: zero pixels");
  auto d = [](uint64_t n, uint64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(n) / static_cast<double>(den);
  };
  if (mode == ConfusionNorm::all) {
    uint64_t t = c.total();
    return {d(c.tn, t), d(c.fp, t), d(c.fn, t), d(c.tp, t)};
  }
  uint64_t actual_neg = c.tn + c.fp;
  uint64_t actual_pos = c.fn + c.tp;
  return {d(c.tn, actual_neg), d(c.fp, actual_neg),
          d(c.fn, actual_pos), d(c.tp, actual_pos)};
}

double water_extent(const WaterMask& mask, float pixel_size_m) {
  double area_m2 = static_cast<double>(mask.count_water()) *
                   static_cast<double>(pixel_size_m) * pixel_size_m;
  return area_m2 / 10000.0;
}

}  // namespace aqua
