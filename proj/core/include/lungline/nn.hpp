#ifndef LUNGLINE_NN_HPP
#define LUNGLINE_NN_HPP

#include <vector>

#include "lungline/tensor.hpp"

namespace lungline::nn {

// Grouped 2-D cross-correlation with zero padding.
//   input  N,C,H,W   weight O,C/g,Kh,Kw   bias O (optional, may be null)
//   output N,O,H',W' with H' = (H + 2*padding - Kh)/stride + 1.
// Accumulation is float32 in a fixed order (kw fastest, then kh, then input
// channel; bias added last), so identical inputs give bit-identical outputs.
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor* bias,
              int stride, int padding, int groups);

// Inference-mode batch normalization: y = gamma*(x-mean)/sqrt(var+eps)+beta
// per channel. All four per-channel vectors must have length C.
Tensor batchnorm_infer(const Tensor& x, const Tensor& gamma,
                       const Tensor& beta, const Tensor& running_mean,
                       const Tensor& running_var, float eps = 1e-5f);

// Elementwise min(max(x,0),6).
Tensor relu6(const Tensor& x);

// N,C,H,W -> N,C mean over the spatial extent.
Tensor global_avg_pool(const Tensor& x);

// y = x * W^T + b.  x: N,F  weight: K,F  bias: K  ->  N,K.
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

// Row-wise softmax of N,K logits, stabilized by max subtraction.
Tensor softmax(const Tensor& logits);

struct CrossEntropy {
  float loss = 0.0f;           // mean over the batch of -log softmax[label]
  Tensor grad_logits;          // (softmax - onehot) / N
};

CrossEntropy cross_entropy(const Tensor& logits, const std::vector<int>& labels);

// Row-wise argmax of N,K logits.
std::vector<int> argmax_rows(const Tensor& logits);

}  // namespace lungline::nn

#endif  // LUNGLINE_NN_HPP
