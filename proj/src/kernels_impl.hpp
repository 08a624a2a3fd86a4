#pragma once

#include "aqua/kernels.hpp"

namespace aqua::kernels {

namespace serial_impl {
void conv3x3_forward(const Tensor& in, const float* W, const float* b,
                     int cout, Tensor& out);
void conv3x3_backward(const Tensor& in, const float* W, int cout,
                      const Tensor& dout, Tensor& din, float* dW, float* db);
void upconv2x2_forward(const Tensor& in, const float* W, const float* b,
                       int cout, Tensor& out);
void upconv2x2_backward(const Tensor& in, const float* W, int cout,
                        const Tensor& dout, Tensor& din, float* dW, float* db);
}  // namespace serial_impl

namespace fast_impl {
void conv3x3_forward(const Tensor& in, const float* W, const float* b,
                     int cout, Tensor& out);
void conv3x3_backward(const Tensor& in, const float* W, int cout,
                      const Tensor& dout, Tensor& din, float* dW, float* db);
void upconv2x2_forward(const Tensor& in, const float* W, const float* b,
                       int cout, Tensor& out);
void upconv2x2_backward(const Tensor& in, const float* W, int cout,
                        const Tensor& dout, Tensor& din, float* dW, float* db);
}  // namespace fast_impl

}  // namespace aqua::kernels
