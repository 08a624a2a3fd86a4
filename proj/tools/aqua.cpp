#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "aqua/pipeline.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  long seed = -1;
  int threads = -1;
  bool force = false;
};

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("--config", args.config_path, "pipeline config file")->required();
  sub->add_option("--seed", args.seed, "override the config seed");
  sub->add_option("--threads", args.threads, "worker threads (1 = bit-exact)");
  sub->add_flag("--force", args.force, "rerun even if outputs exist");
}

aqua::PipelineConfig load(const CommonArgs& args) {
  aqua::PipelineConfig cfg = aqua::load_pipeline_config(args.config_path);
  if (args.seed >= 0) {
    cfg.seed = static_cast<uint64_t>(args.seed);
    cfg.train_cfg.seed = cfg.seed;
  }
  if (args.threads >= 1) {
    cfg.threads = args.threads;
    cfg.train_cfg.threads = args.threads;
  }
  return cfg;
}

void emit_error(const std::string& kind, const std::string& what) {
  nlohmann::json j{{"error", kind}, {"message", what}};
  std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-supervised SAR water segmentation pipeline"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string scene_manifest, pred_manifest, eval_label = "student";

  auto* synth = app.add_subcommand("synth", "generate synthetic scenes and tiles");
  auto* tile = app.add_subcommand("tile", "tile pre-registered scene rasters");
  tile->add_option("--scenes", scene_manifest, "scene-level manifest")->required();
  auto* teacher = app.add_subcommand("teacher", "write water-index teacher masks");
  auto* train = app.add_subcommand("train", "train the student U-Net");
  auto* predict = app.add_subcommand("predict", "run the student on the test split");
  auto* baseline = app.add_subcommand("baseline", "run the Otsu baseline on the test split");
  auto* evaluate = app.add_subcommand("evaluate", "score a prediction manifest");
  evaluate->add_option("--pred", pred_manifest, "prediction manifest (default: student)");
  evaluate->add_option("--label", eval_label, "report label");
  auto* timeseries = app.add_subcommand("timeseries", "water-extent CSV over dates");

  for (auto* sub : {synth, tile, teacher, train, predict, baseline, evaluate, timeseries})
    add_common(sub, args);

  CLI11_PARSE(app, argc, argv);

  try {
    aqua::PipelineConfig cfg = load(args);
    aqua::PipelineOptions opt{args.force};
    if (synth->parsed()) {
      aqua::cmd_synth(cfg, opt);
    } else if (tile->parsed()) {
      aqua::cmd_tile(cfg, scene_manifest, opt);
    } else if (teacher->parsed()) {
      aqua::cmd_teacher(cfg, opt);
    } else if (train->parsed()) {
      aqua::cmd_train(cfg, opt);
    } else if (predict->parsed()) {
      aqua::cmd_predict(cfg, opt);
    } else if (baseline->parsed()) {
      aqua::cmd_baseline(cfg, opt);
    } else if (evaluate->parsed()) {
      if (pred_manifest.empty())
        pred_manifest = (cfg.data_root / "pred_manifest.json").string();
      aqua::cmd_evaluate(cfg, pred_manifest, eval_label, opt);
    } else if (timeseries->parsed()) {
      aqua::cmd_timeseries(cfg, opt);
    }
  } catch (const aqua::ConfigError& e) {
    emit_error("config", e.what());
    return 2;
  } catch (const aqua::DataError& e) {
    emit_error("data", e.what());
    return 3;
  } catch (const aqua::NumericError& e) {
    emit_error("numeric", e.what());
    return 4;
  } catch (const std::exception& e) {
    emit_error("internal", e.what());
    return 1;
  }
  return 0;
}
