#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "aqua/indices.hpp"
#include "aqua/kernels.hpp"
#include "aqua/raster.hpp"
#include "aqua/unet.hpp"

namespace aqua {

struct TrainConfig {
  double learning_rate = 5e-5;
  int batch_size = 32;
  int epochs = 20;
  double epsilon = 1e-6;  // Dice guard
  double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  uint64_t seed = 0;
  int threads = 1;
  IndexSpec index_spec;
};

struct TrainReport {
  std::vector<double> train_loss;  // per epoch
  std::vector<double> val_loss;
  double seconds = 0.0;
  std::string checkpoint_path;
  std::string reduction = "per_sample_mean";
};

// 1 - (2|yt*ys| + eps) / (|yt| + |ys| + eps), sums over all elements.
double dice_loss(const kernels::Tensor& yt, const kernels::Tensor& ys, double eps);

// dL/dys, written into dys_grad (resized to match).
void dice_loss_grad(const kernels::Tensor& yt, const kernels::Tensor& ys,
                    double eps, kernels::Tensor& dys_grad);

// Adaptive-moment descent with bias correction; update arithmetic in double.
class Adam {
 public:
  Adam(size_t n, double lr, double beta1, double beta2, double eps);
  void step(float* params, const float* grads);

 private:
  double lr_, b1_, b2_, eps_;
  long t_ = 0;
  std::vector<double> m_, v_;
};

struct TrainSample {
  kernels::Tensor sar;      // 1 x H x W, normalized
  kernels::Tensor teacher;  // 1 x H x W, 0/1 floats
};

// Keeps pairs with cloud_fraction <= 0.01 and fully valid optical + SAR.
std::vector<TilePair> filter_training_pairs(const std::vector<TilePair>& candidates);

// Minibatch distillation loop: per batch, forward the student, Dice against
// the teacher, backprop, Adam step. Deterministic for fixed seed and thread
// count; threads == 1 is bit-exact across runs.
std::pair<ModelCheckpoint, TrainReport> train(
    const std::vector<TrainSample>& train_set,
    const std::vector<TrainSample>& val_set, const UNetConfig& ucfg,
    const TrainConfig& tc);

struct GridPoint {
  double learning_rate;
  int batch_size;
  double final_val_loss;
};

// Thin sweep over train(), one full run per (lr, batch) combination.
std::vector<GridPoint> grid_search(const std::vector<TrainSample>& train_set,
                                   const std::vector<TrainSample>& val_set,
                                   const UNetConfig& ucfg, const TrainConfig& base,
                                   const std::vector<double>& learning_rates,
                                   const std::vector<int>& batch_sizes);

}  // namespace aqua
