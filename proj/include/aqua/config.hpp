#pragma once

#include <filesystem>
#include <string>

#include "aqua/indices.hpp"
#include "aqua/otsu.hpp"
#include "aqua/synth.hpp"
#include "aqua/train.hpp"
#include "aqua/unet.hpp"

namespace aqua {

// All pipeline knobs in one flat, commented key=value file. Unknown keys and
// malformed values fail up front with the offending line number.
struct PipelineConfig {
  std::filesystem::path data_root = "data";
  std::filesystem::path checkpoint_dir = "checkpoints";
  std::filesystem::path report_dir = "reports";
  uint64_t seed = 42;
  int threads = 1;

  int tile_size = 64;
  double train_fraction = 0.8;

  // Synthetic scene generation.
  int scene_count = 100;
  int test_scene_count = 20;
  int scene_width = 256;
  int scene_height = 256;
  double water_cover = 0.3;
  double vegetated_fraction = 0.0;
  int speckle_looks = 4;
  double cloud_fraction = 0.0;
  int site_count = 3;
  std::string start_date = "2020-06-01";
  BandStats stats;

  IndexSpec index;
  UNetConfig unet;
  TrainConfig train_cfg;
  OtsuSegmentOptions baseline;
  float binarize_cut = 0.5f;
};

PipelineConfig load_pipeline_config(const std::filesystem::path& path);

// The shipped default config text (also what `aqua synth` uses when no
// --config is given).
std::string default_config_text();

}  // namespace aqua
