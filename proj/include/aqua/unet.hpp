#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "aqua/kernels.hpp"
#include "aqua/raster.hpp"

namespace aqua {

struct UNetConfig {
  int input_channels = 1;
  int depth = 4;          // down/up levels
  int base_channels = 32; // doubles per level
  int tile_size = 64;     // expected input spatial size

  bool operator==(const UNetConfig&) const = default;
};

// Throws BadConfig when channel counts are non-positive or tile_size is not
// divisible by 2^depth.
void validate_config(const UNetConfig& cfg);

size_t param_count(const UNetConfig& cfg);

struct ModelCheckpoint {
  UNetConfig config;
  std::vector<float> params;  // flat, deterministic layer order
  uint64_t seed = 0;
  int trained_epochs = 0;
  std::vector<float> loss_history;
};

// Fan-in-scaled uniform initialization, deterministic per seed.
ModelCheckpoint init_model(const UNetConfig& cfg, uint64_t seed);

// Inference on a normalized 1-band SAR tile; output is a same-size
// probability raster with every value in (0,1).
Raster forward(const ModelCheckpoint& model, const Raster& sar_tile,
               kernels::Exec exec = kernels::Exec::fast);

WaterMask binarize(const Raster& prob, float cut = 0.5f);

// "DAQW" | version u8 | u32 LE JSON length | JSON config | float32 LE params.
void save_checkpoint(const ModelCheckpoint& model, const std::filesystem::path& path);
ModelCheckpoint load_checkpoint(const std::filesystem::path& path);

// Training-facing engine: forward with activation caches and explicit
// backward producing a flat gradient aligned with the parameter vector.
class UNet {
 public:
  UNet(const UNetConfig& cfg, kernels::Exec exec);

  size_t n_params() const { return n_params_; }
  const UNetConfig& config() const { return cfg_; }

  void forward(const float* params, const kernels::Tensor& in,
               kernels::Tensor& prob) const;

  struct Cache {
    kernels::Tensor input;
    std::vector<kernels::Tensor> enc_a1, enc_a2, pooled;
    std::vector<std::vector<int>> argmax;
    kernels::Tensor bott_a1, bott_a2;
    std::vector<kernels::Tensor> up_out, cat, dec_a1, dec_a2;
    kernels::Tensor prob;
  };

  void forward_cached(const float* params, const kernels::Tensor& in,
                      Cache& cache, kernels::Tensor& prob) const;

  // dprob = dL/d(output probability); grads are accumulated in place.
  void backward(const float* params, const Cache& cache,
                const kernels::Tensor& dprob, float* grads) const;

 private:
  struct Layer {
    size_t w_off = 0, b_off = 0;
    int cin = 0, cout = 0;
  };

  UNetConfig cfg_;
  kernels::Exec exec_;
  size_t n_params_ = 0;
  std::vector<Layer> enc_conv1_, enc_conv2_;
  Layer bott_conv1_, bott_conv2_;
  std::vector<Layer> up_, dec_conv1_, dec_conv2_;
  Layer final_;
};

}  // namespace aqua
