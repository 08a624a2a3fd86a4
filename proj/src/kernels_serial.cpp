#include <algorithm>
#include <cmath>

#include "aqua/kernels.hpp"

// Reference implementations: naive loops, no tiling, no vectorization
// tricks. Every fast kernel is tested against these.

namespace aqua::kernels::serial_impl {

void conv3x3_forward(const Tensor& in, const float* W, const float* b,
                     int cout, Tensor& out) {
  out.resize(cout, in.h, in.w);
  for (int co = 0; co < cout; ++co) {
    for (int y = 0; y < in.h; ++y) {
      for (int x = 0; x < in.w; ++x) {
        float acc = b[co];
        for (int ci = 0; ci < in.c; ++ci) {
          const float* wp = W + (static_cast<size_t>(co) * in.c + ci) * 9;
          const float* ip = in.data() + ci * in.plane();
          for (int ky = 0; ky < 3; ++ky) {
            int yy = y + ky - 1;
            if (yy < 0 || yy >= in.h) continue;
            for (int kx = 0; kx < 3; ++kx) {
              int xx = x + kx - 1;
              if (xx < 0 || xx >= in.w) continue;
              acc += wp[ky * 3 + kx] * ip[static_cast<size_t>(yy) * in.w + xx];
            }
          }
        }
        out.v[(static_cast<size_t>(co) * in.h + y) * in.w + x] = acc;
      }
    }
  }
}

void conv3x3_backward(const Tensor& in, const float* W, int cout,
                      const Tensor& dout, Tensor& din, float* dW, float* db) {
  din.resize(in.c, in.h, in.w);
  for (int co = 0; co < cout; ++co) {
    const float* gp = dout.data() + co * dout.plane();
    for (size_t i = 0; i < dout.plane(); ++i) db[co] += gp[i];
    for (int y = 0; y < in.h; ++y) {
      for (int x = 0; x < in.w; ++x) {
        float g = gp[static_cast<size_t>(y) * in.w + x];
        for (int ci = 0; ci < in.c; ++ci) {
          float* dwp = dW + (static_cast<size_t>(co) * in.c + ci) * 9;
          const float* wp = W + (static_cast<size_t>(co) * in.c + ci) * 9;
          const float* ip = in.data() + ci * in.plane();
          float* dip = din.data() + ci * din.plane();
          for (int ky = 0; ky < 3; ++ky) {
            int yy = y + ky - 1;
            if (yy < 0 || yy >= in.h) continue;
            for (int kx = 0; kx < 3; ++kx) {
              int xx = x + kx - 1;
              if (xx < 0 || xx >= in.w) continue;
              dwp[ky * 3 + kx] += g * ip[static_cast<size_t>(yy) * in.w + xx];
              dip[static_cast<size_t>(yy) * in.w + xx] += g * wp[ky * 3 + kx];
            }
          }
        }
      }
    }
  }
}

void upconv2x2_forward(const Tensor& in, const float* W, const float* b,
                       int cout, Tensor& out) {
  out.resize(cout, in.h * 2, in.w * 2);
  for (int co = 0; co < cout; ++co)
    std::fill_n(out.data() + co * out.plane(), out.plane(), b[co]);
  for (int ci = 0; ci < in.c; ++ci) {
    const float* ip = in.data() + ci * in.plane();
    for (int co = 0; co < cout; ++co) {
      const float* wp = W + (static_cast<size_t>(ci) * cout + co) * 4;
      float* op = out.data() + co * out.plane();
      for (int y = 0; y < in.h; ++y)
        for (int x = 0; x < in.w; ++x) {
          float v = ip[static_cast<size_t>(y) * in.w + x];
          for (int ky = 0; ky < 2; ++ky)
            for (int kx = 0; kx < 2; ++kx)
              op[(static_cast<size_t>(2 * y + ky)) * out.w + 2 * x + kx] +=
                  v * wp[ky * 2 + kx];
        }
    }
  }
}

void upconv2x2_backward(const Tensor& in, const float* W, int cout,
                        const Tensor& dout, Tensor& din, float* dW, float* db) {
  din.resize(in.c, in.h, in.w);
  for (int co = 0; co < cout; ++co) {
    const float* gp = dout.data() + co * dout.plane();
    for (size_t i = 0; i < dout.plane(); ++i) db[co] += gp[i];
  }
  for (int ci = 0; ci < in.c; ++ci) {
    const float* ip = in.data() + ci * in.plane();
    float* dip = din.data() + ci * din.plane();
    for (int co = 0; co < cout; ++co) {
      const float* wp = W + (static_cast<size_t>(ci) * cout + co) * 4;
      float* dwp = dW + (static_cast<size_t>(ci) * cout + co) * 4;
      const float* gp = dout.data() + co * dout.plane();
      for (int y = 0; y < in.h; ++y)
        for (int x = 0; x < in.w; ++x) {
          float v = ip[static_cast<size_t>(y) * in.w + x];
          float acc = 0.0f;
          for (int ky = 0; ky < 2; ++ky)
            for (int kx = 0; kx < 2; ++kx) {
              float g = gp[(static_cast<size_t>(2 * y + ky)) * dout.w + 2 * x + kx];
              dwp[ky * 2 + kx] += g * v;
              acc += g * wp[ky * 2 + kx];
            }
          dip[static_cast<size_t>(y) * in.w + x] += acc;
        }
    }
  }
}

}  // namespace aqua::kernels::serial_impl
