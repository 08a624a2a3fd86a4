#include <cmath>
#include <limits>

#include "kernels_impl.hpp"

namespace aqua::kernels {

void conv3x3_forward(Exec e, const Tensor& in, const float* W, const float* b,
                     int cout, Tensor& out) {
  if (e == Exec::serial) serial_impl::conv3x3_forward(in, W, b, cout, out);
  else fast_impl::conv3x3_forward(in, W, b, cout, out);
}

void conv3x3_backward(Exec e, const Tensor& in, const float* W, int cout,
                      const Tensor& dout, Tensor& din, float* dW, float* db) {
  if (e == Exec::serial) serial_impl::conv3x3_backward(in, W, cout, dout, din, dW, db);
  else fast_impl::conv3x3_backward(in, W, cout, dout, din, dW, db);
}

void upconv2x2_forward(Exec e, const Tensor& in, const float* W, const float* b,
                       int cout, Tensor& out) {
  if (e == Exec::serial) serial_impl::upconv2x2_forward(in, W, b, cout, out);
  else fast_impl::upconv2x2_forward(in, W, b, cout, out);
}

void upconv2x2_backward(Exec e, const Tensor& in, const float* W, int cout,
                        const Tensor& dout, Tensor& din, float* dW, float* db) {
  if (e == Exec::serial) serial_impl::upconv2x2_backward(in, W, cout, dout, din, dW, db);
  else fast_impl::upconv2x2_backward(in, W, cout, dout, din, dW, db);
}

void conv1x1_forward(const Tensor& in, const float* W, const float* b,
                     int cout, Tensor& out) {
  out.resize(cout, in.h, in.w);
  const size_t hw = in.plane();
  for (int co = 0; co < cout; ++co) {
    float* op = out.data() + co * hw;
    for (size_t i = 0; i < hw; ++i) op[i] = b[co];
    for (int ci = 0; ci < in.c; ++ci) {
      float w = W[static_cast<size_t>(co) * in.c + ci];
      const float* ip = in.data() + ci * hw;
      for (size_t i = 0; i < hw; ++i) op[i] += w * ip[i];
    }
  }
}

void conv1x1_backward(const Tensor& in, const float* W, int cout,
                      const Tensor& dout, Tensor& din, float* dW, float* db) {
  din.resize(in.c, in.h, in.w);
  const size_t hw = in.plane();
  for (int co = 0; co < cout; ++co) {
    const float* gp = dout.data() + co * hw;
    float bacc = 0.0f;
    for (size_t i = 0; i < hw; ++i) bacc += gp[i];
    db[co] += bacc;
    for (int ci = 0; ci < in.c; ++ci) {
      const float* ip = in.data() + ci * hw;
      float* dip = din.data() + ci * hw;
      float w = W[static_cast<size_t>(co) * in.c + ci];
      float wacc = 0.0f;
      for (size_t i = 0; i < hw; ++i) {
        wacc += gp[i] * ip[i];
        dip[i] += gp[i] * w;
      }
      dW[static_cast<size_t>(co) * in.c + ci] += wacc;
    }
  }
}

void relu_forward(Tensor& t) {
  for (auto& v : t.v) v = v > 0.0f ? v : 0.0f;
}

void relu_backward(const Tensor& out, Tensor& grad) {
  for (size_t i = 0; i < grad.v.size(); ++i)
    if (out.v[i] <= 0.0f) grad.v[i] = 0.0f;
}

void maxpool2_forward(const Tensor& in, Tensor& out, std::vector<int>& argmax) {
  out.resize(in.c, in.h / 2, in.w / 2);
  argmax.assign(out.size(), 0);
  for (int c = 0; c < in.c; ++c) {
    const float* ip = in.data() + c * in.plane();
    float* op = out.data() + c * out.plane();
    int* ap = argmax.data() + c * out.plane();
    for (int y = 0; y < out.h; ++y)
      for (int x = 0; x < out.w; ++x) {
        float best = -std::numeric_limits<float>::infinity();
        int best_i = 0;
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx) {
            int i = (2 * y + dy) * in.w + 2 * x + dx;
            if (ip[i] > best) { best = ip[i]; best_i = i; }
          }
        op[static_cast<size_t>(y) * out.w + x] = best;
        ap[static_cast<size_t>(y) * out.w + x] = best_i;
      }
  }
}

void maxpool2_backward(const Tensor& dout, const std::vector<int>& argmax,
                       Tensor& din) {
  // din must be pre-sized to the pooled input shape by the caller.
  std::fill(din.v.begin(), din.v.end(), 0.0f);
  for (int c = 0; c < dout.c; ++c) {
    const float* gp = dout.data() + c * dout.plane();
    const int* ap = argmax.data() + c * dout.plane();
    float* dp = din.data() + c * din.plane();
    for (size_t i = 0; i < dout.plane(); ++i) dp[ap[i]] += gp[i];
  }
}

void sigmoid_forward(Tensor& t) {
  for (auto& v : t.v) v = 1.0f / (1.0f + std::exp(-v));
}

void concat_channels(const Tensor& a, const Tensor& b, Tensor& out) {
  out.resize(a.c + b.c, a.h, a.w);
  std::copy(a.v.begin(), a.v.end(), out.v.begin());
  std::copy(b.v.begin(), b.v.end(), out.v.begin() + static_cast<std::ptrdiff_t>(a.size()));
}

void split_channels(const Tensor& grad, Tensor& da, Tensor& db) {
  std::copy(grad.v.begin(), grad.v.begin() + static_cast<std::ptrdiff_t>(da.size()), da.v.begin());
  std::copy(grad.v.begin() + static_cast<std::ptrdiff_t>(da.size()), grad.v.end(), db.v.begin());
}

}  // namespace aqua::kernels
