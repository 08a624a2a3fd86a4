#pragma once

#include <cstddef>
#include <vector>

namespace aqua::kernels {

// CHW feature map.
struct Tensor {
  int c = 0, h = 0, w = 0;
  std::vector<float> v;

  Tensor() = default;
  Tensor(int c_, int h_, int w_)
      : c(c_), h(h_), w(w_), v(static_cast<size_t>(c_) * h_ * w_, 0.0f) {}

  size_t size() const { return v.size(); }
  size_t plane() const { return static_cast<size_t>(h) * w; }
  float* data() { return v.data(); }
  const float* data() const { return v.data(); }
  void resize(int c_, int h_, int w_) {
    c = c_; h = h_; w = w_;
    v.assign(static_cast<size_t>(c_) * h_ * w_, 0.0f);
  }
};

// `serial` is the plain-loop reference used by the tests; `fast` is the
// im2col + GEMM path (OpenMP over rows where it pays off). Both compute the
// same operator; results agree within float reassociation error.
enum class Exec { serial, fast };

// 3x3 convolution, stride 1, zero padding 1.
// W layout [cout][cin][3][3] flattened, b layout [cout].
void conv3x3_forward(Exec e, const Tensor& in, const float* W, const float* b,
                     int cout, Tensor& out);
// din is overwritten; dW/db are accumulated.
void conv3x3_backward(Exec e, const Tensor& in, const float* W, int cout,
                      const Tensor& dout, Tensor& din, float* dW, float* db);

// 1x1 convolution. W layout [cout][cin], b layout [cout].
void conv1x1_forward(const Tensor& in, const float* W, const float* b,
                     int cout, Tensor& out);
void conv1x1_backward(const Tensor& in, const float* W, int cout,
                      const Tensor& dout, Tensor& din, float* dW, float* db);

// Transposed 2x2 convolution, stride 2 (exact upsampling, no overlap).
// W layout [cin][cout][2][2] flattened, b layout [cout].
void upconv2x2_forward(Exec e, const Tensor& in, const float* W, const float* b,
                       int cout, Tensor& out);
void upconv2x2_backward(Exec e, const Tensor& in, const float* W, int cout,
                        const Tensor& dout, Tensor& din, float* dW, float* db);

void relu_forward(Tensor& t);
// grad is masked by the cached post-activation output.
void relu_backward(const Tensor& out, Tensor& grad);

// 2x2 max pooling, stride 2; argmax holds flat input offsets for backward.
void maxpool2_forward(const Tensor& in, Tensor& out, std::vector<int>& argmax);
void maxpool2_backward(const Tensor& dout, const std::vector<int>& argmax,
                       Tensor& din);

void sigmoid_forward(Tensor& t);

void concat_channels(const Tensor& a, const Tensor& b, Tensor& out);
void split_channels(const Tensor& grad, Tensor& da, Tensor& db);

}  // namespace aqua::kernels
