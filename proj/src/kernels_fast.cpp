#include <Eigen/Dense>
#include <cmath>

#include "kernels_impl.hpp"

// Fast path: 3x3 convolutions lowered to GEMM through im2col; transposed
// convolutions lowered to a single GEMM plus a disjoint scatter (kernel ==
// stride). OpenMP covers the row loops of im2col/col2im.

namespace aqua::kernels::fast_impl {

namespace {

using MatMap = Eigen::Map<Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using CMatMap = Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

thread_local std::vector<float> g_col;
thread_local std::vector<float> g_tmp;

// col has shape (9*cin) x (h*w); row ci*9 + ky*3+kx.
void im2col3x3(const Tensor& in, std::vector<float>& col) {
  const int h = in.h, w = in.w;
  const size_t hw = in.plane();
  col.resize(static_cast<size_t>(9) * in.c * hw);
  #pragma omp parallel for schedule(static)
  for (int ci = 0; ci < in.c; ++ci) {
    const float* ip = in.data() + ci * hw;
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        float* cp = col.data() + (static_cast<size_t>(ci) * 9 + ky * 3 + kx) * hw;
        int dy = ky - 1, dx = kx - 1;
        for (int y = 0; y < h; ++y) {
          int yy = y + dy;
          float* row = cp + static_cast<size_t>(y) * w;
          if (yy < 0 || yy >= h) {
            std::fill_n(row, w, 0.0f);
            continue;
          }
          const float* irow = ip + static_cast<size_t>(yy) * w;
          int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
          if (x0 > 0) std::fill_n(row, x0, 0.0f);
          for (int x = x0; x < x1; ++x) row[x] = irow[x + dx];
          if (x1 < w) std::fill_n(row + x1, w - x1, 0.0f);
        }
      }
    }
  }
}

// Scatter-add of a (9*cin) x (h*w) gradient back onto the input grid.
void col2im3x3(const std::vector<float>& col, Tensor& din) {
  const int h = din.h, w = din.w;
  const size_t hw = din.plane();
  #pragma omp parallel for schedule(static)
  for (int ci = 0; ci < din.c; ++ci) {
    float* dp = din.data() + ci * hw;
    std::fill_n(dp, hw, 0.0f);
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const float* cp = col.data() + (static_cast<size_t>(ci) * 9 + ky * 3 + kx) * hw;
        int dy = ky - 1, dx = kx - 1;
        for (int y = 0; y < h; ++y) {
          int yy = y + dy;
          if (yy < 0 || yy >= h) continue;
          const float* crow = cp + static_cast<size_t>(y) * w;
          float* drow = dp + static_cast<size_t>(yy) * w;
          int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
          for (int x = x0; x < x1; ++x) drow[x + dx] += crow[x];
        }
      }
    }
  }
}

}  // namespace

void conv3x3_forward(const Tensor& in, const float* W, const float* b,
                     int cout, Tensor& out) {
  out.resize(cout, in.h, in.w);
  const size_t hw = in.plane();
  im2col3x3(in, g_col);
  CMatMap wm(W, cout, static_cast<Eigen::Index>(9) * in.c);
  CMatMap cm(g_col.data(), static_cast<Eigen::Index>(9) * in.c, static_cast<Eigen::Index>(hw));
  MatMap om(out.data(), cout, static_cast<Eigen::Index>(hw));
  om.noalias() = wm * cm;
  #pragma omp parallel for schedule(static)
  for (int co = 0; co < cout; ++co) {
    float* op = out.data() + co * hw;
    float bias = b[co];
    for (size_t i = 0; i < hw; ++i) op[i] += bias;
  }
}

void conv3x3_backward(const Tensor& in, const float* W, int cout,
                      const Tensor& dout, Tensor& din, float* dW, float* db) {
  const size_t hw = in.plane();
  im2col3x3(in, g_col);
  CMatMap cm(g_col.data(), static_cast<Eigen::Index>(9) * in.c, static_cast<Eigen::Index>(hw));
  CMatMap gm(dout.data(), cout, static_cast<Eigen::Index>(hw));
  MatMap dwm(dW, cout, static_cast<Eigen::Index>(9) * in.c);
  dwm.noalias() += gm * cm.transpose();

  for (int co = 0; co < cout; ++co) {
    const float* gp = dout.data() + co * hw;
    float acc = 0.0f;
    for (size_t i = 0; i < hw; ++i) acc += gp[i];
    db[co] += acc;
  }

  din.resize(in.c, in.h, in.w);
  g_tmp.resize(static_cast<size_t>(9) * in.c * hw);
  CMatMap wm(W, cout, static_cast<Eigen::Index>(9) * in.c);
  MatMap dcm(g_tmp.data(), static_cast<Eigen::Index>(9) * in.c, static_cast<Eigen::Index>(hw));
  dcm.noalias() = wm.transpose() * gm;
  col2im3x3(g_tmp, din);
}

void upconv2x2_forward(const Tensor& in, const float* W, const float* b,
                       int cout, Tensor& out) {
  out.resize(cout, in.h * 2, in.w * 2);
  const size_t hw = in.plane();
  g_tmp.resize(static_cast<size_t>(4) * cout * hw);
  // tmp(4*cout x hw) = W^T(cout*4 x cin) * in(cin x hw); W rows are cin.
  CMatMap wm(W, in.c, static_cast<Eigen::Index>(4) * cout);
  CMatMap im(in.data(), in.c, static_cast<Eigen::Index>(hw));
  MatMap tm(g_tmp.data(), static_cast<Eigen::Index>(4) * cout, static_cast<Eigen::Index>(hw));
  tm.noalias() = wm.transpose() * im;

  #pragma omp parallel for schedule(static)
  for (int co = 0; co < cout; ++co) {
    float* op = out.data() + co * out.plane();
    float bias = b[co];
    for (int ky = 0; ky < 2; ++ky)
      for (int kx = 0; kx < 2; ++kx) {
        const float* tp = g_tmp.data() + (static_cast<size_t>(co) * 4 + ky * 2 + kx) * hw;
        for (int y = 0; y < in.h; ++y) {
          float* orow = op + (static_cast<size_t>(2 * y + ky)) * out.w + kx;
          const float* trow = tp + static_cast<size_t>(y) * in.w;
          for (int x = 0; x < in.w; ++x) orow[2 * x] = trow[x] + bias;
        }
      }
  }
}

void upconv2x2_backward(const Tensor& in, const float* W, int cout,
                        const Tensor& dout, Tensor& din, float* dW, float* db) {
  const size_t hw = in.plane();
  // Gather dout into tmp(4*cout x hw), mirroring the forward scatter.
  g_tmp.resize(static_cast<size_t>(4) * cout * hw);
  #pragma omp parallel for schedule(static)
  for (int co = 0; co < cout; ++co) {
    const float* gp = dout.data() + co * dout.plane();
    float acc = 0.0f;
    for (size_t i = 0; i < dout.plane(); ++i) acc += gp[i];
    db[co] += acc;
    for (int ky = 0; ky < 2; ++ky)
      for (int kx = 0; kx < 2; ++kx) {
        float* tp = g_tmp.data() + (static_cast<size_t>(co) * 4 + ky * 2 + kx) * hw;
        for (int y = 0; y < in.h; ++y) {
          const float* grow = gp + (static_cast<size_t>(2 * y + ky)) * dout.w + kx;
          float* trow = tp + static_cast<size_t>(y) * in.w;
          for (int x = 0; x < in.w; ++x) trow[x] = grow[2 * x];
        }
      }
  }

  CMatMap tm(g_tmp.data(), static_cast<Eigen::Index>(4) * cout, static_cast<Eigen::Index>(hw));
  CMatMap im(in.data(), in.c, static_cast<Eigen::Index>(hw));
  MatMap dwm(dW, in.c, static_cast<Eigen::Index>(4) * cout);
  dwm.noalias() += im * tm.transpose();

  din.resize(in.c, in.h, in.w);
  CMatMap wm(W, in.c, static_cast<Eigen::Index>(4) * cout);
  MatMap dim(din.data(), in.c, static_cast<Eigen::Index>(hw));
  dim.noalias() = wm * tm;
}

}  // namespace aqua::kernels::fast_impl
