#include "aqua/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>

#include "aqua/tile_io.hpp"

namespace aqua {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void log_event(const std::string& stage, json fields) {
  fields["stage"] = stage;
  std::cerr << fields.dump() << "\n";
}

bool stage_done(const fs::path& output, const std::string& stage,
                const PipelineOptions& opt) {
  if (!opt.force && fs::exists(output)) {
    log_event(stage, {{"event", "skip"}, {"output", output.string()}});
    return true;
  }
  return false;
}

std::string iso_date_plus(const std::string& start, int days) {
  int y = 0, m = 0, d = 0;
  if (std::sscanf(start.c_str(), "%d-%d-%d", &y, &m, &d) != 3)
    throw BadConfig("bad ISO date: " + start);
  using namespace std::chrono;
  sys_days base = year_month_day{year{y}, month{static_cast<unsigned>(m)},
                                 day{static_cast<unsigned>(d)}};
  year_month_day ymd{base + std::chrono::days{days}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

WaterMask crop_mask(const WaterMask& m, int x0, int y0, int ts) {
  WaterMask out(ts, ts);
  for (int y = 0; y < ts; ++y)
    for (int x = 0; x < ts; ++x)
      out.at(y, x) = m.at(y0 + y, x0 + x);
  return out;
}

kernels::Tensor raster_to_tensor(const Raster& r) {
  kernels::Tensor t(r.bands, r.height, r.width);
  std::copy(r.data.begin(), r.data.end(), t.v.begin());
  return t;
}

kernels::Tensor mask_to_tensor(const WaterMask& m) {
  kernels::Tensor t(1, m.height, m.width);
  for (size_t i = 0; i < m.values.size(); ++i)
    t.v[i] = static_cast<float>(m.values[i]);
  return t;
}

fs::path teacher_mask_path(const PipelineConfig& cfg, const std::string& tile_id) {
  return cfg.data_root / "teacher" / (tile_id + ".dqt");
}

// Computes (or reuses) the cached teacher mask for one manifest entry.
WaterMask ensure_teacher_mask(const PipelineConfig& cfg, const ManifestEntry& e,
                              const std::vector<std::string>& bands, bool force) {
  fs::path p = teacher_mask_path(cfg, e.tile_id);
  if (!force && fs::exists(p)) return read_mask_tile(p);
  Raster optical = read_tile(e.optical_path);
  optical.band_names = bands;
  WaterMask m = teacher_mask(optical, cfg.index);
  fs::create_directories(p.parent_path());
  write_mask_tile(m, p);
  return m;
}

json report_to_json(const MetricsReport& r) {
  auto nc_all = normalized_confusion(r.counts, ConfusionNorm::all);
  auto nc_cls = normalized_confusion(r.counts, ConfusionNorm::per_class);
  return json{{"site", r.site},
              {"n_pixels", r.n_pixels},
              {"counts", {{"tp", r.counts.tp}, {"tn", r.counts.tn},
                          {"fp", r.counts.fp}, {"fn", r.counts.fn}}},
              {"pa", r.pa},
              {"iou", r.iou},
              {"precision", r.precision},
              {"recall", r.recall},
              {"f1", r.f1},
              {"confusion_normalized_all",
               {{"tn", nc_all[0]}, {"fp", nc_all[1]}, {"fn", nc_all[2]}, {"tp", nc_all[3]}}},
              {"confusion_normalized_per_class",
               {{"tn", nc_cls[0]}, {"fp", nc_cls[1]}, {"fn", nc_cls[2]}, {"tp", nc_cls[3]}}}};
}

}  // namespace

fs::path cmd_synth(const PipelineConfig& cfg, const PipelineOptions& opt) {
  fs::path manifest_path = cfg.data_root / "manifest.json";
  if (stage_done(manifest_path, "synth", opt)) return manifest_path;
  if (cfg.scene_count < 1) throw EmptyDataset("synth: scene.count must be >= 1");

  auto t0 = std::chrono::steady_clock::now();
  fs::path tiles_dir = cfg.data_root / "tiles";
  fs::create_directories(tiles_dir);

  Manifest manifest;
  std::vector<TilePair> trainval_pool;
  std::vector<size_t> trainval_idx;  // into manifest.tiles

  int total_scenes = cfg.scene_count + cfg.test_scene_count;
  for (int si = 0; si < total_scenes; ++si) {
    SceneSpec spec;
    spec.seed = cfg.seed * 1000003ULL + static_cast<uint64_t>(si);
    spec.width = cfg.scene_width;
    spec.height = cfg.scene_height;
    spec.water_cover_target = cfg.water_cover;
    spec.vegetated_water_fraction = cfg.vegetated_fraction;
    spec.speckle_looks = cfg.speckle_looks;
    spec.stats = cfg.stats;
    SynthScene scene = generate_scene(spec);
    Raster sar_norm = normalize_sar(scene.sar).raster;

    bool is_test = si >= cfg.scene_count;
    std::string site = "site" + std::to_string(si % cfg.site_count);
    std::string date = iso_date_plus(cfg.start_date, si);

    auto pairs = tile_scene(scene.optical, sar_norm, cfg.tile_size, cfg.cloud_fraction);
    pairs = filter_training_pairs(pairs);
    for (auto& p : pairs) {
      std::string id = "scene" + std::to_string(si) + "_" + p.tile_id;
      // Recover the tile origin from the scan-order id is fragile; recompute
      // from the tile grid instead.
      ManifestEntry e;
      e.tile_id = id;
      e.site = site;
      e.date = date;
      e.cloud_fraction = cfg.cloud_fraction;
      e.split = is_test ? Split::test : Split::train;
      e.optical_path = (tiles_dir / (id + "_opt.dqt")).string();
      e.sar_path = (tiles_dir / (id + "_sar.dqt")).string();
      e.truth_path = (tiles_dir / (id + "_truth.dqt")).string();
      e.open_truth_path = (tiles_dir / (id + "_opentruth.dqt")).string();
      write_tile(p.optical, e.optical_path);
      write_tile(p.sar, e.sar_path);

      // p.tile_id is "r<ty>c<tx>" from tile_scene's scan order.
      int ty = 0, tx = 0;
      std::sscanf(p.tile_id.c_str(), "r%dc%d", &ty, &tx);
      WaterMask truth_tile = crop_mask(scene.truth, tx * cfg.tile_size, ty * cfg.tile_size, cfg.tile_size);
      WaterMask open_tile = crop_mask(scene.open_truth, tx * cfg.tile_size, ty * cfg.tile_size, cfg.tile_size);
      write_mask_tile(truth_tile, e.truth_path);
      write_mask_tile(open_tile, e.open_truth_path);

      manifest.tiles.push_back(e);
      if (!is_test) {
        trainval_idx.push_back(manifest.tiles.size() - 1);
        trainval_pool.push_back(p);
      }
    }
  }
  if (manifest.tiles.empty()) throw EmptyDataset("synth: no tiles produced");

  if (!trainval_pool.empty()) {
    split_dataset(trainval_pool, cfg.train_fraction, cfg.seed);
    for (size_t i = 0; i < trainval_pool.size(); ++i)
      manifest.tiles[trainval_idx[i]].split = trainval_pool[i].split;
  }

  save_manifest(manifest, manifest_path);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  log_event("synth", {{"event", "done"}, {"tiles", manifest.tiles.size()},
                      {"scenes", total_scenes}, {"seconds", secs}});
  return manifest_path;
}

fs::path cmd_tile(const PipelineConfig& cfg, const fs::path& scene_manifest,
                  const PipelineOptions& opt) {
  fs::path manifest_path = cfg.data_root / "manifest.json";
  if (stage_done(manifest_path, "tile", opt)) return manifest_path;

  Manifest scenes = load_manifest(scene_manifest);
  fs::path tiles_dir = cfg.data_root / "tiles";
  fs::create_directories(tiles_dir);

  Manifest manifest;
  manifest.optical_bands = scenes.optical_bands;
  std::vector<TilePair> pool;
  for (const auto& se : scenes.tiles) {
    Raster optical = read_tile(se.optical_path);
    Raster sar_norm = normalize_sar(read_tile(se.sar_path)).raster;
    auto pairs = tile_scene(optical, sar_norm, cfg.tile_size, se.cloud_fraction);
    pairs = filter_training_pairs(pairs);
    for (auto& p : pairs) {
      std::string id = se.tile_id + "_" + p.tile_id;
      ManifestEntry e;
      e.tile_id = id;
      e.site = se.site;
      e.date = se.date;
      e.cloud_fraction = se.cloud_fraction;
      e.split = se.split;
      e.optical_path = (tiles_dir / (id + "_opt.dqt")).string();
      e.sar_path = (tiles_dir / (id + "_sar.dqt")).string();
      write_tile(p.optical, e.optical_path);
      write_tile(p.sar, e.sar_path);
      manifest.tiles.push_back(e);
      if (se.split != Split::test) pool.push_back(p);
    }
  }
  if (manifest.tiles.empty()) throw EmptyDataset("tile: no tiles produced");
  save_manifest(manifest, manifest_path);
  log_event("tile", {{"event", "done"}, {"tiles", manifest.tiles.size()}});
  return manifest_path;
}

fs::path cmd_teacher(const PipelineConfig& cfg, const PipelineOptions& opt) {
  fs::path out_path = cfg.data_root / "teacher_manifest.json";
  if (stage_done(out_path, "teacher", opt)) return out_path;

  Manifest m = load_manifest(cfg.data_root / "manifest.json");
  for (auto& e : m.tiles) {
    ensure_teacher_mask(cfg, e, m.optical_bands, opt.force);
    e.teacher_path = teacher_mask_path(cfg, e.tile_id).string();
  }
  save_manifest(m, out_path);
  log_event("teacher", {{"event", "done"}, {"tiles", m.tiles.size()},
                        {"index", to_string(cfg.index.name)}});
  return out_path;
}

fs::path cmd_train(const PipelineConfig& cfg, const PipelineOptions& opt) {
  fs::path ckpt_path = cfg.checkpoint_dir / "model.daqw";
  if (stage_done(ckpt_path, "train", opt)) return ckpt_path;

  Manifest m = load_manifest(cfg.data_root / "manifest.json");
  std::vector<TrainSample> train_set, val_set;
  for (const auto& e : m.tiles) {
    if (e.split == Split::test) continue;
    if (e.cloud_fraction > 0.01) continue;
    Raster sar = read_tile(e.sar_path);
    WaterMask teacher = ensure_teacher_mask(cfg, e, m.optical_bands, false);
    TrainSample s{raster_to_tensor(sar), mask_to_tensor(teacher)};
    (e.split == Split::train ? train_set : val_set).push_back(std::move(s));
  }
  if (train_set.empty()) throw EmptyDataset("train: manifest has no train tiles");
  log_event("train", {{"event", "start"}, {"train_tiles", train_set.size()},
                      {"val_tiles", val_set.size()}});

  auto [model, report] = train(train_set, val_set, cfg.unet, cfg.train_cfg);

  fs::create_directories(cfg.checkpoint_dir);
  save_checkpoint(model, ckpt_path);
  fs::create_directories(cfg.report_dir);
  report.checkpoint_path = ckpt_path.string();

  json jr{{"train_loss", report.train_loss}, {"val_loss", report.val_loss},
          {"seconds", report.seconds}, {"checkpoint", report.checkpoint_path},
          {"reduction", report.reduction}, {"epochs", cfg.train_cfg.epochs},
          {"learning_rate", cfg.train_cfg.learning_rate},
          {"batch_size", cfg.train_cfg.batch_size}};
  std::ofstream(cfg.report_dir / "train_report.json") << jr.dump(2) << "\n";
  std::ofstream csv(cfg.report_dir / "loss_curve.csv");
  csv << "epoch,train_loss,val_loss\n";
  for (size_t i = 0; i < report.train_loss.size(); ++i)
    csv << i << "," << report.train_loss[i] << "," << report.val_loss[i] << "\n";

  log_event("train", {{"event", "done"}, {"seconds", report.seconds},
                      {"final_train_loss", report.train_loss.back()}});
  return ckpt_path;
}

fs::path cmd_predict(const PipelineConfig& cfg, const PipelineOptions& opt) {
  fs::path out_path = cfg.data_root / "pred_manifest.json";
  if (stage_done(out_path, "predict", opt)) return out_path;

  ModelCheckpoint model = load_checkpoint(cfg.checkpoint_dir / "model.daqw");
  Manifest m = load_manifest(cfg.data_root / "manifest.json");
  fs::path pred_dir = cfg.data_root / "pred";
  fs::create_directories(pred_dir);

  Manifest out;
  out.optical_bands = m.optical_bands;
  for (const auto& e : m.tiles) {
    if (e.split != Split::test) continue;
    Raster sar = read_tile(e.sar_path);
    Raster prob = forward(model, sar);
    WaterMask mask = binarize(prob, cfg.binarize_cut);
    ManifestEntry pe = e;
    pe.prob_path = (pred_dir / (e.tile_id + "_prob.dqt")).string();
    pe.mask_path = (pred_dir / (e.tile_id + "_mask.dqt")).string();
    write_tile(prob, pe.prob_path);
    write_mask_tile(mask, pe.mask_path);
    out.tiles.push_back(std::move(pe));
  }
  if (out.tiles.empty()) throw EmptyDataset("predict: manifest has no test tiles");
  save_manifest(out, out_path);
  log_event("predict", {{"event", "done"}, {"tiles", out.tiles.size()}});
  return out_path;
}

fs::path cmd_baseline(const PipelineConfig& cfg, const PipelineOptions& opt) {
  fs::path out_path = cfg.data_root / "baseline_manifest.json";
  if (stage_done(out_path, "baseline", opt)) return out_path;

  Manifest m = load_manifest(cfg.data_root / "manifest.json");
  fs::path base_dir = cfg.data_root / "baseline";
  fs::create_directories(base_dir);

  Manifest out;
  out.optical_bands = m.optical_bands;
  std::ofstream csv(base_dir / "thresholds.csv");
  csv << "tile_id,threshold,filtered\n";
  for (const auto& e : m.tiles) {
    if (e.split != Split::test) continue;
    Raster sar = read_tile(e.sar_path);
    float threshold = 0.0f;
    WaterMask mask = otsu_segment(sar, cfg.baseline, &threshold);
    ManifestEntry pe = e;
    pe.mask_path = (base_dir / (e.tile_id + "_mask.dqt")).string();
    write_mask_tile(mask, pe.mask_path);
    csv << e.tile_id << "," << threshold << "," << (cfg.baseline.use_filter ? 1 : 0) << "\n";
    out.tiles.push_back(std::move(pe));
  }
  if (out.tiles.empty()) throw EmptyDataset("baseline: manifest has no test tiles");
  save_manifest(out, out_path);
  log_event("baseline", {{"event", "done"}, {"tiles", out.tiles.size()}});
  return out_path;
}

EvaluateResult cmd_evaluate(const PipelineConfig& cfg, const fs::path& prediction_manifest,
                            const std::string& label, const PipelineOptions& opt) {
  EvaluateResult res;
  res.json_path = cfg.report_dir / (label + "_metrics.json");
  res.markdown_path = cfg.report_dir / (label + "_metrics.md");

  Manifest preds = load_manifest(prediction_manifest);
  std::map<std::string, ConfusionCounts> per_site;
  for (const auto& e : preds.tiles) {
    if (e.mask_path.empty())
      throw DataError("evaluate: entry " + e.tile_id + " has no mask_path");
    if (e.truth_path.empty())
      throw DataError("evaluate: entry " + e.tile_id + " has no truth_path");
    WaterMask pred = read_mask_tile(e.mask_path);
    WaterMask truth = read_mask_tile(e.truth_path);
    per_site[e.site] += confusion(pred, truth);
  }
  if (per_site.empty()) throw EmptyDataset("evaluate: no tiles in " + prediction_manifest.string());

  for (const auto& [site, counts] : per_site) {
    MetricsReport r = metrics(counts);
    r.site = site;
    res.per_site.push_back(r);
  }
  res.aggregate = aggregate_weighted(res.per_site);

  fs::create_directories(cfg.report_dir);
  json j{{"label", label}, {"per_site", json::array()},
         {"aggregate", report_to_json(res.aggregate)}};
  for (const auto& r : res.per_site) j["per_site"].push_back(report_to_json(r));
  std::ofstream(res.json_path) << j.dump(2) << "\n";

  std::ofstream md(res.markdown_path);
  md << "| Model | Site | PA | IoU | Prec | Recall | F1 |\n";
  md << "|---|---|---|---|---|---|---|\n";
  char buf[256];
  auto row = [&](const MetricsReport& r) {
    std::snprintf(buf, sizeof buf, "| %s | %s | %.2f | %.2f | %.2f | %.2f | %.2f |\n",
                  label.c_str(), r.site.c_str(), r.pa, r.iou, r.precision, r.recall, r.f1);
    md << buf;
  };
  for (const auto& r : res.per_site) row(r);
  row(res.aggregate);

  log_event("evaluate", {{"event", "done"}, {"label", label},
                         {"aggregate_iou", res.aggregate.iou}});
  (void)opt;
  return res;
}

fs::path cmd_timeseries(const PipelineConfig& cfg, const PipelineOptions& opt) {
  fs::path out_path = cfg.report_dir / "water_extent.csv";
  if (stage_done(out_path, "timeseries", opt)) return out_path;

  ModelCheckpoint model = load_checkpoint(cfg.checkpoint_dir / "model.daqw");
  Manifest m = load_manifest(cfg.data_root / "manifest.json");

  std::map<std::pair<std::string, std::string>, double> extent;  // (date, site)
  for (const auto& e : m.tiles) {
    Raster sar = read_tile(e.sar_path);
    WaterMask mask = binarize(forward(model, sar), cfg.binarize_cut);
    extent[{e.date, e.site}] += water_extent(mask, sar.pixel_size_m);
  }
  if (extent.empty()) throw EmptyDataset("timeseries: empty manifest");

  fs::create_directories(cfg.report_dir);
  std::ofstream csv(out_path);
  csv << "date,site,hectares\n";
  for (const auto& [key, ha] : extent)
    csv << key.first << "," << key.second << "," << ha << "\n";
  log_event("timeseries", {{"event", "done"}, {"rows", extent.size()}});
  return out_path;
}

}  // namespace aqua
