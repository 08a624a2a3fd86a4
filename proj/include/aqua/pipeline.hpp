#pragma once

#include <filesystem>

#include "aqua/config.hpp"
#include "aqua/manifest.hpp"
#include "aqua/metrics.hpp"

namespace aqua {

struct PipelineOptions {
  bool force = false;
};

// Each stage is idempotent: when its primary output already exists the stage
// is a no-op unless force is set. All stages log line-delimited JSON events
// to stderr.

// Generates scenes, tiles them, filters, splits, writes .dqt tiles plus the
// dataset manifest. Returns the manifest path.
std::filesystem::path cmd_synth(const PipelineConfig& cfg, const PipelineOptions& opt = {});

// Tiles pre-registered full-scene rasters listed in a scene manifest.
std::filesystem::path cmd_tile(const PipelineConfig& cfg,
                               const std::filesystem::path& scene_manifest,
                               const PipelineOptions& opt = {});

// Teacher masks for every tile in the manifest.
std::filesystem::path cmd_teacher(const PipelineConfig& cfg, const PipelineOptions& opt = {});

// Distillation training; returns the checkpoint path.
std::filesystem::path cmd_train(const PipelineConfig& cfg, const PipelineOptions& opt = {});

// Student probability + binary mask tiles for the test split.
std::filesystem::path cmd_predict(const PipelineConfig& cfg, const PipelineOptions& opt = {});

// Otsu baseline masks (plain or Gaussian-filtered) for the test split.
std::filesystem::path cmd_baseline(const PipelineConfig& cfg, const PipelineOptions& opt = {});

struct EvaluateResult {
  std::vector<MetricsReport> per_site;
  MetricsReport aggregate;
  std::filesystem::path json_path;
  std::filesystem::path markdown_path;
};

// Scores a prediction manifest against the truth masks it references.
EvaluateResult cmd_evaluate(const PipelineConfig& cfg,
                            const std::filesystem::path& prediction_manifest,
                            const std::string& label,
                            const PipelineOptions& opt = {});

// Per-date, per-site water extent CSV from student predictions.
std::filesystem::path cmd_timeseries(const PipelineConfig& cfg, const PipelineOptions& opt = {});

}  // namespace aqua
