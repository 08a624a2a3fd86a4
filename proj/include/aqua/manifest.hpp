#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "aqua/raster.hpp"

namespace aqua {

struct ManifestEntry {
  std::string tile_id;
  std::string site;
  std::string date;  // ISO-8601
  double cloud_fraction = 0.0;
  Split split = Split::train;
  std::string optical_path;
  std::string sar_path;
  // Optional artifacts; empty when absent.
  std::string truth_path;
  std::string open_truth_path;
  std::string teacher_path;
  std::string prob_path;
  std::string mask_path;
};

struct Manifest {
  int version = 1;
  std::vector<std::string> optical_bands{"green", "nir"};
  std::vector<ManifestEntry> tiles;
};

void save_manifest(const Manifest& m, const std::filesystem::path& path);
Manifest load_manifest(const std::filesystem::path& path);

}  // namespace aqua
