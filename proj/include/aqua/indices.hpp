#pragma once

#include <map>
#include <string>

#include "aqua/raster.hpp"

namespace aqua {

enum class IndexName { NDWI, MNDWI, AWEI, HRWI };

IndexName index_from_string(const std::string& s);
std::string to_string(IndexName n);

// Spectral water index selector. NDWI and MNDWI are fixed normalized
// differences; AWEI and HRWI are opaque linear/rational forms whose
// coefficients come from the config presets:
//   "num.<band>" / "num.const"  -> numerator term
//   "den.<band>" / "den.const"  -> denominator term (absent = pure linear)
struct IndexSpec {
  IndexName name = IndexName::NDWI;
  float threshold = 0.0f;
  std::map<std::string, float> coefficients;
};

// (G - NIR) / (G + NIR); zero-denominator pixels output 0 and are flagged
// invalid.
Raster ndwi(const Raster& optical);

Raster apply_index(const Raster& optical, const IndexSpec& spec);

// Teacher of the distillation pipeline: 1 where index > threshold
// (strict), 0 elsewhere; invalid pixels are ground.
WaterMask teacher_mask(const Raster& optical, const IndexSpec& spec);

}  // namespace aqua
