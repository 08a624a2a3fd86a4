// Times the serial reference kernels against the im2col/GEMM fast path on
// U-Net-shaped workloads, plus a whole forward+backward pass per variant.

#include <chrono>
#include <cstdio>
#include <random>

#include "aqua/kernels.hpp"
#include "aqua/train.hpp"
#include "aqua/unet.hpp"

using namespace aqua;
using kernels::Exec;
using kernels::Tensor;

namespace {

Tensor random_tensor(int c, int h, int w, std::mt19937_64& rng) {
  Tensor t(c, h, w);
  std::uniform_real_distribution<float> uni(-1.0f, 1.0f);
  for (auto& v : t.v) v = uni(rng);
  return t;
}

double time_loop(int iters, const auto& fn) {
  auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < iters; ++i) fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() /
         iters;
}

void bench_conv(int cin, int cout, int hw, int iters) {
  std::mt19937_64 rng(7);
  Tensor in = random_tensor(cin, hw, hw, rng);
  std::vector<float> W(static_cast<size_t>(cout) * cin * 9), b(cout);
  std::uniform_real_distribution<float> uni(-0.1f, 0.1f);
  for (auto& v : W) v = uni(rng);
  for (auto& v : b) v = uni(rng);
  Tensor out;

  double ts = time_loop(iters, [&] {
    kernels::conv3x3_forward(Exec::serial, in, W.data(), b.data(), cout, out);
  });
  double tf = time_loop(iters, [&] {
    kernels::conv3x3_forward(Exec::fast, in, W.data(), b.data(), cout, out);
  });
  double gflop = 2.0 * 9.0 * cin * cout * hw * hw / 1e9;
  std::printf("conv3x3 %3dx%-3d @%3dx%-3d  serial %8.3f ms (%5.1f GFLOPS)   fast %8.3f ms (%5.1f GFLOPS)   speedup %.1fx\n",
              cin, cout, hw, hw, ts * 1e3, gflop / ts, tf * 1e3, gflop / tf, ts / tf);
}

void bench_train_step(Exec exec, const char* name) {
  UNetConfig cfg{1, 3, 8, 64};
  UNet net(cfg, exec);
  ModelCheckpoint model = init_model(cfg, 11);
  std::mt19937_64 rng(13);
  Tensor in = random_tensor(1, 64, 64, rng);
  Tensor teacher(1, 64, 64);
  for (auto& v : teacher.v) v = rng() % 2 ? 1.0f : 0.0f;

  std::vector<float> grads(model.params.size(), 0.0f);
  UNet::Cache cache;
  Tensor prob, dprob;
  double t = time_loop(exec == Exec::serial ? 3 : 20, [&] {
    net.forward_cached(model.params.data(), in, cache, prob);
    dice_loss_grad(teacher, prob, 1e-6, dprob);
    net.backward(model.params.data(), cache, dprob, grads.data());
  });
  std::printf("unet fwd+bwd (depth 3, base 8, 64x64)  %-6s  %8.3f ms/sample\n", name, t * 1e3);
}

}  // namespace

int main() {
  bench_conv(1, 32, 64, 20);
  bench_conv(32, 32, 64, 10);
  bench_conv(64, 64, 32, 10);
  bench_conv(128, 128, 16, 10);
  bench_train_step(Exec::serial, "serial");
  bench_train_step(Exec::fast, "fast");
  return 0;
}
