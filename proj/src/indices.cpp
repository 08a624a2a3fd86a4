#include "aqua/indices.hpp"

#include <cmath>

namespace aqua {

IndexName index_from_string(const std::string& s) {
  if (s == "NDWI" || s == "ndwi") return IndexName::NDWI;
  if (s == "MNDWI" || s == "mndwi") return IndexName::MNDWI;
  if (s == "AWEI" || s == "awei") return IndexName::AWEI;
  if (s == "HRWI" || s == "hrwi") return IndexName::HRWI;
  throw UnknownIndex("unknown water index: " + s);
}

std::string to_string(IndexName n) {
  switch (n) {
    case IndexName::NDWI: return "NDWI";
    case IndexName::MNDWI: return "MNDWI";
    case IndexName::AWEI: return "AWEI";
    case IndexName::HRWI: return "HRWI";
  }
  return "NDWI";
}

namespace {

int require_band(const Raster& r, const std::string& name) {
  int i = r.band_index(name);
  if (i < 0) throw MissingBand("index requires band '" + name + "'");
  return i;
}

Raster normalized_difference(const Raster& r, int a, int b) {
  Raster out(r.width, r.height, 1, r.pixel_size_m);
  out.valid = r.valid;
  const float* pa = r.band(a);
  const float* pb = r.band(b);
  for (size_t i = 0; i < r.pixels(); ++i) {
    float denom = pa[i] + pb[i];
    if (denom == 0.0f) {
      out.data[i] = 0.0f;
      out.valid[i] = 0;
    } else {
      out.data[i] = (pa[i] - pb[i]) / denom;
    }
  }
  return out;
}

// Evaluate the "num.*" / "den.*" coefficient form pixelwise.
Raster rational_form(const Raster& r, const IndexSpec& spec) {
  struct Term { int band; float coef; };
  std::vector<Term> num, den;
  float num_const = 0.0f, den_const = 0.0f;
  bool has_den = false;
  for (const auto& [key, coef] : spec.coefficients) {
    if (key.rfind("num.", 0) == 0) {
      std::string b = key.substr(4);
      if (b == "const") num_const = coef;
      else num.push_back({require_band(r, b), coef});
    } else if (key.rfind("den.", 0) == 0) {
      has_den = true;
      std::string b = key.substr(4);
      if (b == "const") den_const = coef;
      else den.push_back({require_band(r, b), coef});
    } else {
      throw BadConfig("index coefficient key must start with num./den.: " + key);
    }
  }

  Raster out(r.width, r.height, 1, r.pixel_size_m);
  out.valid = r.valid;
  for (size_t i = 0; i < r.pixels(); ++i) {
    float n = num_const;
    for (const auto& t : num) n += t.coef * r.band(t.band)[i];
    if (!has_den) {
      out.data[i] = n;
      continue;
    }
    float d = den_const;
    for (const auto& t : den) d += t.coef * r.band(t.band)[i];
    if (d == 0.0f) {
      out.data[i] = 0.0f;
      out.valid[i] = 0;
    } else {
      out.data[i] = n / d;
    }
  }
  return out;
}

}  // namespace

Raster ndwi(const Raster& optical) {
  int g = require_band(optical, "green");
  int n = require_band(optical, "nir");
  return normalized_difference(optical, g, n);
}

Raster apply_index(const Raster& optical, const IndexSpec& spec) {
  switch (spec.name) {
    case IndexName::NDWI:
      return ndwi(optical);
    case IndexName::MNDWI: {
      int g = require_band(optical, "green");
      int s = require_band(optical, "swir1");
      return normalized_difference(optical, g, s);
    }
    case IndexName::AWEI:
    case IndexName::HRWI:
      return rational_form(optical, spec);
  }
  throw UnknownIndex("apply_index: unhandled index");
}

WaterMask teacher_mask(const Raster& optical, const IndexSpec& spec) {
  Raster idx = apply_index(optical, spec);
  WaterMask m(idx.width, idx.height);
  for (size_t i = 0; i < idx.pixels(); ++i)
    m.values[i] = (idx.valid[i] && idx.data[i] > spec.threshold) ? 1 : 0;
  return m;
}

}  // namespace aqua
