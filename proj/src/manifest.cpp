#include "aqua/manifest.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

namespace aqua {

using nlohmann::json;

void save_manifest(const Manifest& m, const std::filesystem::path& path) {
  json tiles = json::array();
  for (const auto& t : m.tiles) {
    json j{{"tile_id", t.tile_id},
           {"site", t.site},
           {"date", t.date},
           {"cloud_fraction", t.cloud_fraction},
           {"split", to_string(t.split)},
           {"optical_path", t.optical_path},
           {"sar_path", t.sar_path}};
    if (!t.truth_path.empty()) j["truth_path"] = t.truth_path;
    if (!t.open_truth_path.empty()) j["open_truth_path"] = t.open_truth_path;
    if (!t.teacher_path.empty()) j["teacher_path"] = t.teacher_path;
    if (!t.prob_path.empty()) j["prob_path"] = t.prob_path;
    if (!t.mask_path.empty()) j["mask_path"] = t.mask_path;
    tiles.push_back(std::move(j));
  }
  json doc{{"manifest_version", m.version},
           {"optical_bands", m.optical_bands},
           {"tiles", std::move(tiles)}};
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DataError("save_manifest: cannot open " + path.string());
  os << doc.dump(2) << "\n";
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("load_manifest: cannot open " + path.string());
  json doc;
  try {
    is >> doc;
  } catch (const json::exception& e) {
    throw DataError("load_manifest: bad JSON in " + path.string() + ": " + e.what());
  }
  Manifest m;
  m.version = doc.at("manifest_version").get<int>();
  if (m.version != 1)
    throw UnsupportedVersion("load_manifest: manifest_version " + std::to_string(m.version));
  m.optical_bands = doc.at("optical_bands").get<std::vector<std::string>>();
  for (const auto& j : doc.at("tiles")) {
    ManifestEntry t;
    t.tile_id = j.at("tile_id").get<std::string>();
    t.site = j.at("site").get<std::string>();
    t.date = j.at("date").get<std::string>();
    t.cloud_fraction = j.at("cloud_fraction").get<double>();
    t.split = split_from_string(j.at("split").get<std::string>());
    t.optical_path = j.at("optical_path").get<std::string>();
    t.sar_path = j.at("sar_path").get<std::string>();
    t.truth_path = j.value("truth_path", "");
    t.open_truth_path = j.value("open_truth_path", "");
    t.teacher_path = j.value("teacher_path", "");
    t.prob_path = j.value("prob_path", "");
    t.mask_path = j.value("mask_path", "");
    m.tiles.push_back(std::move(t));
  }
  return m;
}

}  // namespace aqua
