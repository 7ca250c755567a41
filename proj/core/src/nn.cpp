#include "lungline/nn.hpp"

#include <algorithm>
#include <cmath>

#include "lungline/errors.hpp"

namespace lungline::nn {

namespace {

void require_rank(const Tensor& t, int rank, const char* op, const char* name) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": " + name + " must be rank " +
                     std::to_string(rank) + ", got " + t.shape_str());
  }
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor* bias,
              int stride, int padding, int groups) {
  require_rank(input, 4, "conv2d", "input");
  require_rank(weight, 4, "conv2d", "weight");
  if (stride < 1) throw ArgumentError("conv2d: stride must be >= 1");
  if (padding < 0) throw ArgumentError("conv2d: padding must be >= 0");
  if (groups < 1) throw ArgumentError("conv2d: groups must be >= 1");

  const int n_batch = input.dim(0), in_ch = input.dim(1);
  const int in_h = input.dim(2), in_w = input.dim(3);
  const int out_ch = weight.dim(0), w_in = weight.dim(1);
  const int k_h = weight.dim(2), k_w = weight.dim(3);

  if (in_ch % groups != 0) {
    throw ShapeError("conv2d: input channel extent " + std::to_string(in_ch) +
                     " not divisible by groups " + std::to_string(groups));
  }
  if (out_ch % groups != 0) {
    throw ShapeError("conv2d: output channel extent " + std::to_string(out_ch) +
                     " not divisible by groups " + std::to_string(groups));
  }
  if (w_in != in_ch / groups) {
    throw ShapeError("conv2d: weight channel extent " + std::to_string(w_in) +
                     " != input channels / groups = " +
                     std::to_string(in_ch / groups));
  }
  if (in_h + 2 * padding < k_h) {
    throw ShapeError("conv2d: height extent " + std::to_string(in_h) +
                     " + 2*padding smaller than kernel " + std::to_string(k_h));
  }
  if (in_w + 2 * padding < k_w) {
    throw ShapeError("conv2d: width extent " + std::to_string(in_w) +
                     " + 2*padding smaller than kernel " + std::to_string(k_w));
  }
  if (bias) {
    require_rank(*bias, 1, "conv2d", "bias");
    if (bias->dim(0) != out_ch) {
      throw ShapeError("conv2d: bias extent " + std::to_string(bias->dim(0)) +
                       " != output channel extent " + std::to_string(out_ch));
    }
  }

  const int out_h = (in_h + 2 * padding - k_h) / stride + 1;
  const int out_w = (in_w + 2 * padding - k_w) / stride + 1;
  const int group_in = in_ch / groups;
  const int group_out = out_ch / groups;

  Tensor out({n_batch, out_ch, out_h, out_w});
  const float* x = input.ptr();
  const float* w = weight.ptr();
  float* y = out.ptr();

  for (int n = 0; n < n_batch; ++n) {
    for (int oc = 0; oc < out_ch; ++oc) {
      const int g = oc / group_out;
      const int ic0 = g * group_in;
      const float* w_oc = w + static_cast<int64_t>(oc) * group_in * k_h * k_w;
      for (int oy = 0; oy < out_h; ++oy) {
        const int iy0 = oy * stride - padding;
        // Taps that land inside the image; skipped taps are the zero padding.
        const int kh_lo = std::max(0, -iy0);
        const int kh_hi = std::min(k_h, in_h - iy0);
        for (int ox = 0; ox < out_w; ++ox) {
          const int ix0 = ox * stride - padding;
          const int kw_lo = std::max(0, -ix0);
          const int kw_hi = std::min(k_w, in_w - ix0);
          float acc = 0.0f;
          for (int ic = 0; ic < group_in; ++ic) {
            const float* x_ch =
                x + ((static_cast<int64_t>(n) * in_ch + ic0 + ic) * in_h) * in_w;
            const float* w_ch = w_oc + static_cast<int64_t>(ic) * k_h * k_w;
            for (int kh = kh_lo; kh < kh_hi; ++kh) {
              const float* x_row = x_ch + static_cast<int64_t>(iy0 + kh) * in_w;
              const float* w_row = w_ch + static_cast<int64_t>(kh) * k_w;
              for (int kw = kw_lo; kw < kw_hi; ++kw) {
                acc += x_row[ix0 + kw] * w_row[kw];
              }
            }
          }
          if (bias) acc += bias->ptr()[oc];
          y[((static_cast<int64_t>(n) * out_ch + oc) * out_h + oy) * out_w +
            ox] = acc;
        }
      }
    }
  }
  return out;
}

Tensor batchnorm_infer(const Tensor& x, const Tensor& gamma,
                       const Tensor& beta, const Tensor& running_mean,
                       const Tensor& running_var, float eps) {
  require_rank(x, 4, "batchnorm", "input");
  const int channels = x.dim(1);
  auto require_len = [&](const Tensor& v, const char* name) {
    if (v.rank() != 1 || v.dim(0) != channels) {
      throw ShapeError("batchnorm: " + std::string(name) + " has extent " +
                       v.shape_str() + ", expected " +
                       std::to_string(channels));
    }
  };
  require_len(gamma, "gamma");
  require_len(beta, "beta");
  require_len(running_mean, "running_mean");
  require_len(running_var, "running_var");
  if (!(eps > 0.0f)) throw ArgumentError("batchnorm: eps must be > 0");
  for (int c = 0; c < channels; ++c) {
    if (running_var.ptr()[c] < 0.0f) {
      throw ArgumentError("batchnorm: running_var[" + std::to_string(c) +
                          "] is negative");
    }
  }

  const int n_batch = x.dim(0), h = x.dim(2), w = x.dim(3);
  const int64_t plane = static_cast<int64_t>(h) * w;
  Tensor out(x.dims());
  std::vector<float> inv(static_cast<size_t>(channels));
  for (int c = 0; c < channels; ++c) {
    inv[static_cast<size_t>(c)] =
        1.0f / std::sqrt(running_var.ptr()[c] + eps);
  }
  const float* in = x.ptr();
  float* y = out.ptr();
  for (int n = 0; n < n_batch; ++n) {
    for (int c = 0; c < channels; ++c) {
      const float g = gamma.ptr()[c], b = beta.ptr()[c];
      const float m = running_mean.ptr()[c], iv = inv[static_cast<size_t>(c)];
      const int64_t base = (static_cast<int64_t>(n) * channels + c) * plane;
      for (int64_t i = 0; i < plane; ++i) {
        y[base + i] = g * ((in[base + i] - m) * iv) + b;
      }
    }
  }
  return out;
}

Tensor relu6(const Tensor& x) {
  Tensor out(x.dims());
  const float* in = x.ptr();
  float* y = out.ptr();
  const int64_t n = x.numel();
  for (int64_t i = 0; i < n; ++i) {
    y[i] = std::min(std::max(in[i], 0.0f), 6.0f);
  }
  return out;
}

Tensor global_avg_pool(const Tensor& x) {
  require_rank(x, 4, "global_avg_pool", "input");
  const int n_batch = x.dim(0), channels = x.dim(1);
  const int64_t plane = static_cast<int64_t>(x.dim(2)) * x.dim(3);
  Tensor out({n_batch, channels});
  const float* in = x.ptr();
  float* y = out.ptr();
  for (int n = 0; n < n_batch; ++n) {
    for (int c = 0; c < channels; ++c) {
      const int64_t base = (static_cast<int64_t>(n) * channels + c) * plane;
      double acc = 0.0;
      for (int64_t i = 0; i < plane; ++i) acc += in[base + i];
      y[static_cast<int64_t>(n) * channels + c] =
          static_cast<float>(acc / static_cast<double>(plane));
    }
  }
  return out;
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require_rank(x, 2, "linear", "input");
  require_rank(weight, 2, "linear", "weight");
  require_rank(bias, 1, "linear", "bias");
  const int n_batch = x.dim(0), features = x.dim(1);
  const int classes = weight.dim(0);
  if (weight.dim(1) != features) {
    throw ShapeError("linear: weight inner extent " +
                     std::to_string(weight.dim(1)) +
                     " != input feature extent " + std::to_string(features));
  }
  if (bias.dim(0) != classes) {
    throw ShapeError("linear: bias extent " + std::to_string(bias.dim(0)) +
                     " != weight output extent " + std::to_string(classes));
  }
  Tensor out({n_batch, classes});
  const float* in = x.ptr();
  const float* w = weight.ptr();
  float* y = out.ptr();
  for (int n = 0; n < n_batch; ++n) {
    const float* row = in + static_cast<int64_t>(n) * features;
    for (int k = 0; k < classes; ++k) {
      const float* w_row = w + static_cast<int64_t>(k) * features;
      float acc = 0.0f;
      for (int f = 0; f < features; ++f) acc += row[f] * w_row[f];
      y[static_cast<int64_t>(n) * classes + k] = acc + bias.ptr()[k];
    }
  }
  return out;
}

Tensor softmax(const Tensor& logits) {
  require_rank(logits, 2, "softmax", "logits");
  const int n_batch = logits.dim(0), classes = logits.dim(1);
  Tensor out({n_batch, classes});
  const float* in = logits.ptr();
  float* y = out.ptr();
  std::vector<double> exps(static_cast<size_t>(classes));
  for (int n = 0; n < n_batch; ++n) {
    const float* row = in + static_cast<int64_t>(n) * classes;
    float mx = row[0];
    for (int k = 1; k < classes; ++k) mx = std::max(mx, row[k]);
    double denom = 0.0;
    for (int k = 0; k < classes; ++k) {
      const double e =
          std::exp(static_cast<double>(row[k]) - static_cast<double>(mx));
      exps[static_cast<size_t>(k)] = e;
      denom += e;
    }
    for (int k = 0; k < classes; ++k) {
      y[static_cast<int64_t>(n) * classes + k] =
          static_cast<float>(exps[static_cast<size_t>(k)] / denom);
    }
  }
  return out;
}

CrossEntropy cross_entropy(const Tensor& logits,
                           const std::vector<int>& labels) {
  require_rank(logits, 2, "cross_entropy", "logits");
  const int n_batch = logits.dim(0), classes = logits.dim(1);
  if (static_cast<int>(labels.size()) != n_batch) {
    throw ArgumentError("cross_entropy: labels length " +
                        std::to_string(labels.size()) + " != batch extent " +
                        std::to_string(n_batch));
  }
  for (int n = 0; n < n_batch; ++n) {
    if (labels[static_cast<size_t>(n)] < 0 ||
        labels[static_cast<size_t>(n)] >= classes) {
      throw IndexError("cross_entropy: label " +
                       std::to_string(labels[static_cast<size_t>(n)]) +
                       " at row " + std::to_string(n) + " out of range [0," +
                       std::to_string(classes) + ")");
    }
  }

  CrossEntropy result;
  result.grad_logits = Tensor({n_batch, classes});
  const float* in = logits.ptr();
  float* g = result.grad_logits.ptr();
  std::vector<double> exps(static_cast<size_t>(classes));
  double loss = 0.0;
  for (int n = 0; n < n_batch; ++n) {
    const float* row = in + static_cast<int64_t>(n) * classes;
    float mx = row[0];
    for (int k = 1; k < classes; ++k) mx = std::max(mx, row[k]);
    double denom = 0.0;
    for (int k = 0; k < classes; ++k) {
      const double e =
          std::exp(static_cast<double>(row[k]) - static_cast<double>(mx));
      exps[static_cast<size_t>(k)] = e;
      denom += e;
    }
    const int label = labels[static_cast<size_t>(n)];
    loss += std::log(denom) -
            (static_cast<double>(row[label]) - static_cast<double>(mx));
    for (int k = 0; k < classes; ++k) {
      const double p = exps[static_cast<size_t>(k)] / denom;
      const double onehot = (k == label) ? 1.0 : 0.0;
      g[static_cast<int64_t>(n) * classes + k] =
          static_cast<float>((p - onehot) / n_batch);
    }
  }
  result.loss = static_cast<float>(loss / n_batch);
  return result;
}

std::vector<int> argmax_rows(const Tensor& logits) {
  require_rank(logits, 2, "argmax", "logits");
  const int n_batch = logits.dim(0), classes = logits.dim(1);
  std::vector<int> out(static_cast<size_t>(n_batch));
  const float* in = logits.ptr();
  for (int n = 0; n < n_batch; ++n) {
    const float* row = in + static_cast<int64_t>(n) * classes;
    int best = 0;
    for (int k = 1; k < classes; ++k) {
      if (row[k] > row[best]) best = k;
    }
    out[static_cast<size_t>(n)] = best;
  }
  return out;
}

}  // namespace lungline::nn
