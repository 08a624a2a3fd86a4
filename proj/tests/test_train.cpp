#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "aqua/train.hpp"

using namespace aqua;
using kernels::Tensor;

namespace {

Tensor const_tensor(int n, float v) {
  Tensor t(1, n, n);
  std::fill(t.v.begin(), t.v.end(), v);
  return t;
}

std::vector<TrainSample> toy_dataset(int count, int n, uint64_t seed) {
  // Left-half water, right-half land, with noisy SAR: low values over water.
  std::vector<TrainSample> out;
  std::mt19937 rng(seed);
  std::normal_distribution<float> noise(0.0f, 0.05f);
  for (int k = 0; k < count; ++k) {
    TrainSample s;
    s.sar.resize(1, n, n);
    s.teacher.resize(1, n, n);
    int split = n / 4 + int(rng() % (n / 2));
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) {
        bool water = x < split;
        s.teacher.v[y * n + x] = water ? 1.0f : 0.0f;
        float base = water ? 0.15f : 0.75f;
        s.sar.v[y * n + x] = std::clamp(base + noise(rng), 0.0f, 1.0f);
      }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

TEST_CASE("dice_loss: closed-form values") {
  // Perfect overlap of a 0/1 mask: L = 1 - (2s+eps)/(2s+eps) = 0.
  Tensor a = const_tensor(4, 1.0f);
  CHECK(dice_loss(a, a, 1e-6) == doctest::Approx(0.0).epsilon(1e-9));

  // Disjoint: intersection 0, L = 1 - eps/(16+eps) ~ 1.
  Tensor b = const_tensor(4, 0.0f);
  double l = dice_loss(a, b, 1e-6);
  CHECK(l == doctest::Approx(1.0 - 1e-6 / (16.0 + 1e-6)).epsilon(1e-12));

  // Empty vs empty is the guarded 0-loss case.
  CHECK(dice_loss(b, b, 1e-6) == doctest::Approx(0.0).epsilon(1e-9));

  // Half overlap with constant prediction 0.5 over an all-water target:
  // inter = 0.5*N, sums = N + 0.5N -> L = 1 - (N+eps)/(1.5N+eps).
  Tensor half = const_tensor(4, 0.5f);
  double expect = 1.0 - (16.0 + 1e-6) / (24.0 + 1e-6);
  CHECK(dice_loss(a, half, 1e-6) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("dice_loss_grad matches finite differences") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<float> uni(0.05f, 0.95f);
  Tensor yt(1, 6, 6), ys(1, 6, 6);
  for (auto& v : yt.v) v = rng() % 2 ? 1.0f : 0.0f;
  for (auto& v : ys.v) v = uni(rng);

  Tensor g;
  dice_loss_grad(yt, ys, 1e-6, g);
  REQUIRE(g.v.size() == ys.v.size());

  const double eps = 1e-4;
  for (size_t i = 0; i < ys.v.size(); i += 3) {
    Tensor p = ys, m = ys;
    p.v[i] += eps;
    m.v[i] -= eps;
    double fd = (dice_loss(yt, p, 1e-6) - dice_loss(yt, m, 1e-6)) / (2 * eps);
    CHECK(g.v[i] == doctest::Approx(fd).epsilon(1e-3));
  }
}

TEST_CASE("dice_loss: shape mismatch throws") {
  Tensor a = const_tensor(4, 1.0f), b = const_tensor(8, 1.0f);
  CHECK_THROWS_AS(dice_loss(a, b, 1e-6), ShapeMismatch);
}

TEST_CASE("Adam: first step equals -lr * sign(g) after bias correction") {
  // With constant gradient g, m_hat = g and v_hat = g^2 at t=1, so the step is
  // -lr * g / (|g| + eps) ~ -lr * sign(g).
  Adam opt(3, 0.01, 0.9, 0.999, 1e-8);
  std::vector<float> p = {1.0f, 2.0f, 3.0f};
  std::vector<float> g = {0.5f, -2.0f, 0.0f};
  opt.step(p.data(), g.data());
  CHECK(p[0] == doctest::Approx(1.0 - 0.01 * 0.5 / (0.5 + 1e-8)).epsilon(1e-6));
  CHECK(p[1] == doctest::Approx(2.0 + 0.01 * 2.0 / (2.0 + 1e-8)).epsilon(1e-6));
  CHECK(p[2] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("Adam: matches a closed-form two-step trace within 1e-10") {
  // Single parameter, gradients g1=1, g2=-0.5; recompute the reference update
  // with independent double arithmetic.
  const double lr = 0.001, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  Adam opt(1, lr, b1, b2, eps);
  float p = 0.25f;
  float g1 = 1.0f, g2 = -0.5f;

  double ref = 0.25f;
  double m = 0, v = 0;
  for (int t = 1; t <= 2; ++t) {
    double g = (t == 1) ? 1.0 : -0.5;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    double mh = m / (1 - std::pow(b1, t));
    double vh = v / (1 - std::pow(b2, t));
    ref = double(float(ref - lr * mh / (std::sqrt(vh) + eps)));
  }
  opt.step(&p, &g1);
  opt.step(&p, &g2);
  CHECK(std::abs(double(p) - ref) < 1e-10);
}

TEST_CASE("Adam: converges on a quadratic bowl") {
  Adam opt(2, 0.05, 0.9, 0.999, 1e-8);
  std::vector<float> p = {3.0f, -2.0f};
  for (int i = 0; i < 500; ++i) {
    std::vector<float> g = {2 * p[0], 2 * p[1]};
    opt.step(p.data(), g.data());
  }
  CHECK(std::abs(p[0]) < 0.05f);
  CHECK(std::abs(p[1]) < 0.05f);
}

TEST_CASE("train: loss decreases and the student learns the toy rule") {
  auto train_set = toy_dataset(48, 16, 1);
  auto val_set = toy_dataset(12, 16, 2);

  UNetConfig uc;
  uc.depth = 1;
  uc.base_channels = 4;
  uc.tile_size = 16;
  TrainConfig tc;
  tc.learning_rate = 3e-3;
  tc.batch_size = 8;
  tc.epochs = 12;
  tc.seed = 5;

  auto [model, report] = train(train_set, val_set, uc, tc);
  REQUIRE(report.train_loss.size() == 12);
  REQUIRE(report.val_loss.size() == 12);
  CHECK(report.train_loss.back() < report.train_loss.front());
  CHECK(report.val_loss.back() < 0.25);
  CHECK(report.reduction == "per_sample_mean");
  CHECK(model.trained_epochs == 12);

  // Predictions on a fresh sample should beat chance comfortably.
  auto probe = toy_dataset(1, 16, 9)[0];
  Raster tile(16, 16, 1);
  std::copy(probe.sar.v.begin(), probe.sar.v.end(), tile.data.begin());
  Raster prob = forward(model, tile);
  WaterMask pred = binarize(prob);
  int agree = 0;
  for (int i = 0; i < 256; ++i)
    if ((pred.values[i] == 1) == (probe.teacher.v[i] > 0.5f)) ++agree;
  CHECK(agree > 230);
}

TEST_CASE("train: bit-exact determinism with one thread") {
  auto train_set = toy_dataset(16, 16, 3);
  auto val_set = toy_dataset(4, 16, 4);
  UNetConfig uc;
  uc.depth = 1;
  uc.base_channels = 2;
  uc.tile_size = 16;
  TrainConfig tc;
  tc.learning_rate = 1e-3;
  tc.batch_size = 4;
  tc.epochs = 2;
  tc.seed = 11;
  tc.threads = 1;

  auto [m1, r1] = train(train_set, val_set, uc, tc);
  auto [m2, r2] = train(train_set, val_set, uc, tc);
  CHECK(m1.params == m2.params);
  CHECK(r1.train_loss == r2.train_loss);
  CHECK(r1.val_loss == r2.val_loss);

  TrainConfig tc2 = tc;
  tc2.seed = 12;
  auto [m3, r3] = train(train_set, val_set, uc, tc2);
  CHECK(m1.params != m3.params);
}

TEST_CASE("train: empty training set throws") {
  UNetConfig uc;
  uc.depth = 1;
  uc.base_channels = 2;
  uc.tile_size = 16;
  TrainConfig tc;
  CHECK_THROWS_AS(train({}, {}, uc, tc), EmptyDataset);
}

TEST_CASE("filter_training_pairs drops cloudy and partially invalid tiles") {
  std::vector<TilePair> pairs(3);
  for (auto& p : pairs) {
    p.optical = Raster(8, 8, 2);
    p.sar = Raster(8, 8, 1);
    p.cloud_fraction = 0.0;
  }
  pairs[1].cloud_fraction = 0.5;
  pairs[2].sar.valid[0] = 0;
  auto kept = filter_training_pairs(pairs);
  CHECK(kept.size() == 1);
}

TEST_CASE("grid_search returns one point per combination with finite losses") {
  auto train_set = toy_dataset(8, 16, 6);
  auto val_set = toy_dataset(4, 16, 7);
  UNetConfig uc;
  uc.depth = 1;
  uc.base_channels = 2;
  uc.tile_size = 16;
  TrainConfig base;
  base.epochs = 1;
  base.seed = 2;
  auto pts = grid_search(train_set, val_set, uc, base, {1e-3, 1e-4}, {4, 8});
  REQUIRE(pts.size() == 4);
  for (auto& p : pts) {
    CHECK(std::isfinite(p.final_val_loss));
    CHECK(p.final_val_loss >= 0.0);
    CHECK(p.final_val_loss <= 1.0);
  }
}
