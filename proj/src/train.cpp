#include "aqua/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace aqua {

using kernels::Tensor;

double dice_loss(const Tensor& yt, const Tensor& ys, double eps) {
  if (yt.c != ys.c || yt.h != ys.h || yt.w != ys.w)
    throw ShapeMismatch("dice_loss: grid shapes differ");
  double inter = 0.0, sum_t = 0.0, sum_s = 0.0;
  for (size_t i = 0; i < yt.size(); ++i) {
    inter += static_cast<double>(yt.v[i]) * ys.v[i];
    sum_t += yt.v[i];
    sum_s += ys.v[i];
  }
  return 1.0 - (2.0 * inter + eps) / (sum_t + sum_s + eps);
}

void dice_loss_grad(const Tensor& yt, const Tensor& ys, double eps,
                    Tensor& dys) {
  if (yt.c != ys.c || yt.h != ys.h || yt.w != ys.w)
    throw ShapeMismatch("dice_loss_grad: grid shapes differ");
  double inter = 0.0, sum_t = 0.0, sum_s = 0.0;
  for (size_t i = 0; i < yt.size(); ++i) {
    inter += static_cast<double>(yt.v[i]) * ys.v[i];
    sum_t += yt.v[i];
    sum_s += ys.v[i];
  }
  double denom = sum_t + sum_s + eps;
  double num = 2.0 * inter + eps;
  dys.resize(ys.c, ys.h, ys.w);
  for (size_t i = 0; i < ys.size(); ++i)
    dys.v[i] = static_cast<float>(-(2.0 * yt.v[i] * denom - num) / (denom * denom));
}

Adam::Adam(size_t n, double lr, double beta1, double beta2, double eps)
    : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

void Adam::step(float* params, const float* grads) {
  ++t_;
  double bc1 = 1.0 - std::pow(b1_, t_);
  double bc2 = 1.0 - std::pow(b2_, t_);
  for (size_t i = 0; i < m_.size(); ++i) {
    double g = grads[i];
    m_[i] = b1_ * m_[i] + (1.0 - b1_) * g;
    v_[i] = b2_ * v_[i] + (1.0 - b2_) * g * g;
    double mhat = m_[i] / bc1;
    double vhat = v_[i] / bc2;
    params[i] = static_cast<float>(params[i] - lr_ * mhat / (std::sqrt(vhat) + eps_));
  }
}

std::vector<TilePair> filter_training_pairs(const std::vector<TilePair>& candidates) {
  std::vector<TilePair> out;
  for (const auto& p : candidates) {
    if (p.cloud_fraction > 0.01) continue;
    auto all_valid = [](const Raster& r) {
      return std::all_of(r.valid.begin(), r.valid.end(), [](uint8_t v) { return v != 0; });
    };
    if (!all_valid(p.optical) || !all_valid(p.sar)) continue;
    out.push_back(p);
  }
  return out;
}

namespace {

double mean_val_loss(const UNet& net, const float* params,
                     const std::vector<TrainSample>& val_set, double eps) {
  if (val_set.empty()) return 0.0;
  double acc = 0.0;
  Tensor prob;
  for (const auto& s : val_set) {
    net.forward(params, s.sar, prob);
    acc += dice_loss(s.teacher, prob, eps);
  }
  return acc / static_cast<double>(val_set.size());
}

}  // namespace

std::pair<ModelCheckpoint, TrainReport> train(
    const std::vector<TrainSample>& train_set,
    const std::vector<TrainSample>& val_set, const UNetConfig& ucfg,
    const TrainConfig& tc) {
  if (train_set.empty()) throw EmptyDataset("train: no training samples");
  if (tc.batch_size < 1 || !(tc.learning_rate >= 0.0) || !(tc.epsilon > 0.0))
    throw BadConfig("train: bad hyperparameters");

  auto t_start = std::chrono::steady_clock::now();

  ModelCheckpoint model = init_model(ucfg, tc.seed);
  UNet net(ucfg, kernels::Exec::fast);
  Adam opt(model.params.size(), tc.learning_rate, tc.beta1, tc.beta2, tc.adam_eps);

  int n_threads = std::max(1, tc.threads);
  TrainReport report;

  std::vector<size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), size_t{0});

  std::vector<std::vector<float>> thread_grads(n_threads);
  std::vector<float> grads(model.params.size());

  for (int epoch = 0; epoch < tc.epochs; ++epoch) {
    std::mt19937_64 rng(tc.seed + static_cast<uint64_t>(epoch) + 1);
    std::shuffle(order.begin(), order.end(), rng);

    double epoch_loss = 0.0;
    size_t n_seen = 0;

    for (size_t start = 0; start < order.size(); start += tc.batch_size) {
      size_t end = std::min(order.size(), start + tc.batch_size);
      int bn = static_cast<int>(end - start);
      std::fill(grads.begin(), grads.end(), 0.0f);
      double batch_loss = 0.0;

      if (n_threads == 1) {
        UNet::Cache cache;
        Tensor prob, dprob;
        for (size_t k = start; k < end; ++k) {
          const TrainSample& s = train_set[order[k]];
          net.forward_cached(model.params.data(), s.sar, cache, prob);
          batch_loss += dice_loss(s.teacher, prob, tc.epsilon);
          dice_loss_grad(s.teacher, prob, tc.epsilon, dprob);
          net.backward(model.params.data(), cache, dprob, grads.data());
        }
      } else {
        std::vector<double> thread_loss(n_threads, 0.0);
        #pragma omp parallel num_threads(n_threads)
        {
#ifdef _OPENMP
          int tid = omp_get_thread_num();
#else
          int tid = 0;
#endif
          auto& tg = thread_grads[tid];
          tg.assign(model.params.size(), 0.0f);
          UNet::Cache cache;
          Tensor prob, dprob;
          #pragma omp for schedule(static)
          for (long k = static_cast<long>(start); k < static_cast<long>(end); ++k) {
            const TrainSample& s = train_set[order[k]];
            net.forward_cached(model.params.data(), s.sar, cache, prob);
            thread_loss[tid] += dice_loss(s.teacher, prob, tc.epsilon);
            dice_loss_grad(s.teacher, prob, tc.epsilon, dprob);
            net.backward(model.params.data(), cache, dprob, tg.data());
          }
        }
        // Merge in thread order: deterministic for a fixed thread count.
        for (int t = 0; t < n_threads; ++t) {
          batch_loss += thread_loss[t];
          const auto& tg = thread_grads[t];
          for (size_t i = 0; i < grads.size(); ++i) grads[i] += tg[i];
        }
      }

      float inv = 1.0f / static_cast<float>(bn);
      for (auto& gv : grads) gv *= inv;
      opt.step(model.params.data(), grads.data());

      epoch_loss += batch_loss;
      n_seen += bn;
    }

    double train_loss = epoch_loss / static_cast<double>(n_seen);
    double val_loss = mean_val_loss(net, model.params.data(), val_set, tc.epsilon);
    if (!std::isfinite(train_loss) || !std::isfinite(val_loss))
      throw DivergenceDetected("train: loss went non-finite at epoch " +
                               std::to_string(epoch));
    report.train_loss.push_back(train_loss);
    report.val_loss.push_back(val_loss);
    model.loss_history.push_back(static_cast<float>(train_loss));
  }

  model.trained_epochs = tc.epochs;
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return {std::move(model), std::move(report)};
}

std::vector<GridPoint> grid_search(const std::vector<TrainSample>& train_set,
                                   const std::vector<TrainSample>& val_set,
                                   const UNetConfig& ucfg, const TrainConfig& base,
                                   const std::vector<double>& learning_rates,
                                   const std::vector<int>& batch_sizes) {
  std::vector<GridPoint> out;
  for (double lr : learning_rates) {
    for (int bs : batch_sizes) {
      TrainConfig tc = base;
      tc.learning_rate = lr;
      tc.batch_size = bs;
      auto [model, report] = train(train_set, val_set, ucfg, tc);
      out.push_back({lr, bs, report.val_loss.empty() ? 0.0 : report.val_loss.back()});
    }
  }
  return out;
}

}  // namespace aqua
