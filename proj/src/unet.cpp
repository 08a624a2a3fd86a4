#include "aqua/unet.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <random>

namespace aqua {

using kernels::Exec;
using kernels::Tensor;

void validate_config(const UNetConfig& cfg) {
  if (cfg.input_channels < 1 || cfg.depth < 1 || cfg.base_channels < 1)
    throw BadConfig("unet: channel counts and depth must be positive");
  if (cfg.tile_size < 1 || cfg.tile_size % (1 << cfg.depth) != 0)
    throw BadConfig("unet: tile_size must be divisible by 2^depth");
}

UNet::UNet(const UNetConfig& cfg, Exec exec) : cfg_(cfg), exec_(exec) {
  validate_config(cfg);
  size_t off = 0;
  auto add = [&](int cin, int cout, int k) {
    Layer l{off, off + static_cast<size_t>(cout) * cin * k * k, cin, cout};
    off = l.b_off + cout;
    return l;
  };
  int ch = cfg.input_channels;
  for (int i = 0; i < cfg.depth; ++i) {
    int c = cfg.base_channels << i;
    enc_conv1_.push_back(add(ch, c, 3));
    enc_conv2_.push_back(add(c, c, 3));
    ch = c;
  }
  int cb = cfg.base_channels << cfg.depth;
  bott_conv1_ = add(ch, cb, 3);
  bott_conv2_ = add(cb, cb, 3);
  up_.resize(cfg.depth);
  dec_conv1_.resize(cfg.depth);
  dec_conv2_.resize(cfg.depth);
  for (int i = cfg.depth - 1; i >= 0; --i) {
    int c = cfg.base_channels << i;
    int deeper = i == cfg.depth - 1 ? cb : (cfg.base_channels << (i + 1));
    up_[i] = add(deeper, c, 2);
    dec_conv1_[i] = add(2 * c, c, 3);
    dec_conv2_[i] = add(c, c, 3);
  }
  final_ = add(cfg.base_channels, 1, 1);
  n_params_ = off;
}

size_t param_count(const UNetConfig& cfg) {
  return UNet(cfg, Exec::serial).n_params();
}

ModelCheckpoint init_model(const UNetConfig& cfg, uint64_t seed) {
  UNet net(cfg, Exec::serial);
  ModelCheckpoint m;
  m.config = cfg;
  m.seed = seed;
  m.params.resize(net.n_params());

  // Fan-in-scaled uniform, layer by layer in parameter order.
  std::mt19937_64 rng(seed);
  size_t off = 0;
  auto fill = [&](int cin, int cout, int k) {
    float bound = 1.0f / std::sqrt(static_cast<float>(cin) * k * k);
    std::uniform_real_distribution<float> uni(-bound, bound);
    size_t n = static_cast<size_t>(cout) * cin * k * k + cout;
    for (size_t i = 0; i < n; ++i) m.params[off + i] = uni(rng);
    off += n;
  };
  int ch = cfg.input_channels;
  for (int i = 0; i < cfg.depth; ++i) {
    int c = cfg.base_channels << i;
    fill(ch, c, 3);
    fill(c, c, 3);
    ch = c;
  }
  int cb = cfg.base_channels << cfg.depth;
  fill(ch, cb, 3);
  fill(cb, cb, 3);
  for (int i = cfg.depth - 1; i >= 0; --i) {
    int c = cfg.base_channels << i;
    int deeper = i == cfg.depth - 1 ? cb : (cfg.base_channels << (i + 1));
    fill(deeper, c, 2);
    fill(2 * c, c, 3);
    fill(c, c, 3);
  }
  fill(cfg.base_channels, 1, 1);
  return m;
}

void UNet::forward(const float* p, const Tensor& in, Tensor& prob) const {
  Cache cache;
  forward_cached(p, in, cache, prob);
}

void UNet::forward_cached(const float* p, const Tensor& in, Cache& cache,
                          Tensor& prob) const {
  if (in.c != cfg_.input_channels || in.h % (1 << cfg_.depth) != 0 ||
      in.w % (1 << cfg_.depth) != 0)
    throw ShapeMismatch("unet forward: input shape incompatible with config");

  const int D = cfg_.depth;
  cache.input = in;
  cache.enc_a1.resize(D);
  cache.enc_a2.resize(D);
  cache.pooled.resize(D);
  cache.argmax.resize(D);
  cache.up_out.resize(D);
  cache.cat.resize(D);
  cache.dec_a1.resize(D);
  cache.dec_a2.resize(D);

  const Tensor* cur = &cache.input;
  for (int i = 0; i < D; ++i) {
    kernels::conv3x3_forward(exec_, *cur, p + enc_conv1_[i].w_off,
                             p + enc_conv1_[i].b_off, enc_conv1_[i].cout,
                             cache.enc_a1[i]);
    kernels::relu_forward(cache.enc_a1[i]);
    kernels::conv3x3_forward(exec_, cache.enc_a1[i], p + enc_conv2_[i].w_off,
                             p + enc_conv2_[i].b_off, enc_conv2_[i].cout,
                             cache.enc_a2[i]);
    kernels::relu_forward(cache.enc_a2[i]);
    kernels::maxpool2_forward(cache.enc_a2[i], cache.pooled[i], cache.argmax[i]);
    cur = &cache.pooled[i];
  }

  kernels::conv3x3_forward(exec_, *cur, p + bott_conv1_.w_off,
                           p + bott_conv1_.b_off, bott_conv1_.cout, cache.bott_a1);
  kernels::relu_forward(cache.bott_a1);
  kernels::conv3x3_forward(exec_, cache.bott_a1, p + bott_conv2_.w_off,
                           p + bott_conv2_.b_off, bott_conv2_.cout, cache.bott_a2);
  kernels::relu_forward(cache.bott_a2);

  cur = &cache.bott_a2;
  for (int i = D - 1; i >= 0; --i) {
    kernels::upconv2x2_forward(exec_, *cur, p + up_[i].w_off, p + up_[i].b_off,
                               up_[i].cout, cache.up_out[i]);
    kernels::concat_channels(cache.enc_a2[i], cache.up_out[i], cache.cat[i]);
    kernels::conv3x3_forward(exec_, cache.cat[i], p + dec_conv1_[i].w_off,
                             p + dec_conv1_[i].b_off, dec_conv1_[i].cout,
                             cache.dec_a1[i]);
    kernels::relu_forward(cache.dec_a1[i]);
    kernels::conv3x3_forward(exec_, cache.dec_a1[i], p + dec_conv2_[i].w_off,
                             p + dec_conv2_[i].b_off, dec_conv2_[i].cout,
                             cache.dec_a2[i]);
    kernels::relu_forward(cache.dec_a2[i]);
    cur = &cache.dec_a2[i];
  }

  kernels::conv1x1_forward(*cur, p + final_.w_off, p + final_.b_off, 1,
                           cache.prob);
  kernels::sigmoid_forward(cache.prob);
  prob = cache.prob;
}

void UNet::backward(const float* p, const Cache& cache, const Tensor& dprob,
                    float* g) const {
  const int D = cfg_.depth;

  // Through the logistic output.
  Tensor dz(1, dprob.h, dprob.w);
  for (size_t i = 0; i < dz.size(); ++i) {
    float y = cache.prob.v[i];
    dz.v[i] = dprob.v[i] * y * (1.0f - y);
  }

  Tensor grad, tmp;
  kernels::conv1x1_backward(cache.dec_a2[0], p + final_.w_off, 1, dz, grad,
                            g + final_.w_off, g + final_.b_off);

  // Decoder, shallow to deep; collect skip gradients for the encoder pass.
  std::vector<Tensor> d_skip(D);
  for (int i = 0; i < D; ++i) {
    kernels::relu_backward(cache.dec_a2[i], grad);
    kernels::conv3x3_backward(exec_, cache.dec_a1[i], p + dec_conv2_[i].w_off,
                              dec_conv2_[i].cout, grad, tmp,
                              g + dec_conv2_[i].w_off, g + dec_conv2_[i].b_off);
    kernels::relu_backward(cache.dec_a1[i], tmp);
    Tensor dcat;
    kernels::conv3x3_backward(exec_, cache.cat[i], p + dec_conv1_[i].w_off,
                              dec_conv1_[i].cout, tmp, dcat,
                              g + dec_conv1_[i].w_off, g + dec_conv1_[i].b_off);
    d_skip[i].resize(cache.enc_a2[i].c, cache.enc_a2[i].h, cache.enc_a2[i].w);
    Tensor d_up(cache.up_out[i].c, cache.up_out[i].h, cache.up_out[i].w);
    kernels::split_channels(dcat, d_skip[i], d_up);
    const Tensor& deeper = i == D - 1 ? cache.bott_a2 : cache.dec_a2[i + 1];
    kernels::upconv2x2_backward(exec_, deeper, p + up_[i].w_off, up_[i].cout,
                                d_up, grad, g + up_[i].w_off, g + up_[i].b_off);
  }

  // Bottleneck.
  kernels::relu_backward(cache.bott_a2, grad);
  kernels::conv3x3_backward(exec_, cache.bott_a1, p + bott_conv2_.w_off,
                            bott_conv2_.cout, grad, tmp, g + bott_conv2_.w_off,
                            g + bott_conv2_.b_off);
  kernels::relu_backward(cache.bott_a1, tmp);
  kernels::conv3x3_backward(exec_, cache.pooled[D - 1], p + bott_conv1_.w_off,
                            bott_conv1_.cout, tmp, grad, g + bott_conv1_.w_off,
                            g + bott_conv1_.b_off);

  // Encoder, deep to shallow. grad holds d(pooled[i]) entering level i.
  for (int i = D - 1; i >= 0; --i) {
    Tensor d_a2(cache.enc_a2[i].c, cache.enc_a2[i].h, cache.enc_a2[i].w);
    kernels::maxpool2_backward(grad, cache.argmax[i], d_a2);
    for (size_t k = 0; k < d_a2.size(); ++k) d_a2.v[k] += d_skip[i].v[k];
    kernels::relu_backward(cache.enc_a2[i], d_a2);
    kernels::conv3x3_backward(exec_, cache.enc_a1[i], p + enc_conv2_[i].w_off,
                              enc_conv2_[i].cout, d_a2, tmp,
                              g + enc_conv2_[i].w_off, g + enc_conv2_[i].b_off);
    kernels::relu_backward(cache.enc_a1[i], tmp);
    const Tensor& in = i == 0 ? cache.input : cache.pooled[i - 1];
    kernels::conv3x3_backward(exec_, in, p + enc_conv1_[i].w_off,
                              enc_conv1_[i].cout, tmp, grad,
                              g + enc_conv1_[i].w_off, g + enc_conv1_[i].b_off);
  }
}

Raster forward(const ModelCheckpoint& model, const Raster& sar_tile, Exec exec) {
  if (sar_tile.bands != 1)
    throw ShapeMismatch("forward: SAR tile must have 1 band");
  UNet net(model.config, exec);
  if (model.params.size() != net.n_params())
    throw ParamCountMismatch("forward: parameter vector does not match config");

  Tensor in(1, sar_tile.height, sar_tile.width);
  std::copy(sar_tile.data.begin(), sar_tile.data.end(), in.v.begin());
  Tensor prob;
  net.forward(model.params.data(), in, prob);

  Raster out(sar_tile.width, sar_tile.height, 1, sar_tile.pixel_size_m);
  out.valid = sar_tile.valid;
  std::copy(prob.v.begin(), prob.v.end(), out.data.begin());
  return out;
}

WaterMask binarize(const Raster& prob, float cut) {
  WaterMask m(prob.width, prob.height);
  for (size_t i = 0; i < prob.pixels(); ++i)
    m.values[i] = prob.data[i] > cut ? 1 : 0;
  return m;
}

namespace {
constexpr char kMagic[4] = {'D', 'A', 'Q', 'W'};
constexpr uint8_t kVersion = 1;
}  // namespace

void save_checkpoint(const ModelCheckpoint& m, const std::filesystem::path& path) {
  nlohmann::json j{{"input_channels", m.config.input_channels},
                   {"depth", m.config.depth},
                   {"base_channels", m.config.base_channels},
                   {"tile_size", m.config.tile_size},
                   {"seed", m.seed},
                   {"trained_epochs", m.trained_epochs},
                   {"loss_history", m.loss_history},
                   {"param_count", m.params.size()}};
  std::string js = j.dump();

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("save_checkpoint: cannot open " + path.string());
  os.write(kMagic, 4);
  os.put(static_cast<char>(kVersion));
  uint32_t len = static_cast<uint32_t>(js.size());
  char lb[4] = {static_cast<char>(len & 0xff), static_cast<char>((len >> 8) & 0xff),
                static_cast<char>((len >> 16) & 0xff), static_cast<char>(len >> 24)};
  os.write(lb, 4);
  os.write(js.data(), static_cast<std::streamsize>(js.size()));
  os.write(reinterpret_cast<const char*>(m.params.data()),
           static_cast<std::streamsize>(m.params.size() * sizeof(float)));
  if (!os) throw DataError("save_checkpoint: write failed for " + path.string());
}

ModelCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("load_checkpoint: cannot open " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (is.gcount() != 4) throw TruncatedFile("load_checkpoint: short file");
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw BadMagic("load_checkpoint: bad magic in " + path.string());
  int version = is.get();
  if (version != kVersion)
    throw UnsupportedVersion("load_checkpoint: version " + std::to_string(version));
  uint8_t lb[4];
  is.read(reinterpret_cast<char*>(lb), 4);
  if (is.gcount() != 4) throw TruncatedFile("load_checkpoint: short header");
  uint32_t len = lb[0] | (lb[1] << 8) | (lb[2] << 16) | (static_cast<uint32_t>(lb[3]) << 24);
  std::string js(len, '\0');
  is.read(js.data(), len);
  if (static_cast<uint32_t>(is.gcount()) != len)
    throw TruncatedFile("load_checkpoint: short config block");

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(js);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("load_checkpoint: bad config JSON: ") + e.what());
  }
  ModelCheckpoint m;
  m.config.input_channels = j.at("input_channels").get<int>();
  m.config.depth = j.at("depth").get<int>();
  m.config.base_channels = j.at("base_channels").get<int>();
  m.config.tile_size = j.at("tile_size").get<int>();
  m.seed = j.at("seed").get<uint64_t>();
  m.trained_epochs = j.at("trained_epochs").get<int>();
  m.loss_history = j.at("loss_history").get<std::vector<float>>();
  size_t stored = j.at("param_count").get<size_t>();
  size_t expected = param_count(m.config);
  if (stored != expected)
    throw ParamCountMismatch("load_checkpoint: config expects " +
                             std::to_string(expected) + " params, file says " +
                             std::to_string(stored));
  m.params.resize(expected);
  is.read(reinterpret_cast<char*>(m.params.data()),
          static_cast<std::streamsize>(expected * sizeof(float)));
  if (static_cast<size_t>(is.gcount()) != expected * sizeof(float))
    throw TruncatedFile("load_checkpoint: short parameter vector");
  return m;
}

}  // namespace aqua
