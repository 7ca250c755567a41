#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "lungline/errors.hpp"
#include "lungline/nn.hpp"
#include "lungline/rng.hpp"
#include "lungline/tensor.hpp"
#include "support/oracles.hpp"

using lungline::ArgumentError;
using lungline::IndexError;
using lungline::Rng;
using lungline::ShapeError;
using lungline::Tensor;
namespace nn = lungline::nn;
namespace oracle = lungline::test;

namespace {

Tensor random_tensor(std::vector<int> dims, Rng& rng, double lo = -1.0,
                     double hi = 1.0) {
  Tensor t(std::move(dims));
  for (float& v : t.data()) {
    v = static_cast<float>(rng.uniform(lo, hi));
  }
  return t;
}

}  // namespace

TEST_SUITE_BEGIN("nn");

TEST_CASE("conv2d matches both oracles over randomized instances") {
  Rng rng(2024);
  int checked = 0;
  for (int iter = 0; iter < 400; ++iter) {
    const int k = 1 + static_cast<int>(rng.bounded(3));
    const int stride = 1 + static_cast<int>(rng.bounded(3));
    const int padding = static_cast<int>(rng.bounded(3));
    const bool depthwise = rng.bounded(2) == 1;
    int in_ch, out_ch, groups;
    if (depthwise) {
      in_ch = out_ch = groups = 1 + static_cast<int>(rng.bounded(8));
    } else {
      groups = 1;
      in_ch = 1 + static_cast<int>(rng.bounded(8));
      out_ch = 1 + static_cast<int>(rng.bounded(8));
    }
    const int min_side = std::max(1, k - 2 * padding);
    const int h = min_side + static_cast<int>(rng.bounded(
                                 static_cast<uint64_t>(9 - min_side)));
    const int w = min_side + static_cast<int>(rng.bounded(
                                 static_cast<uint64_t>(9 - min_side)));
    const int n = 1 + static_cast<int>(rng.bounded(3));

    const Tensor x = random_tensor({n, in_ch, h, w}, rng);
    const Tensor weight = random_tensor({out_ch, in_ch / groups, k, k}, rng);
    const bool with_bias = rng.bounded(2) == 1;
    const Tensor bias = random_tensor({out_ch}, rng);

    const Tensor got = nn::conv2d(x, weight, with_bias ? &bias : nullptr,
                                  stride, padding, groups);
    const Tensor same_order = oracle::conv2d_oracle(
        x, weight, with_bias ? &bias : nullptr, stride, padding, groups);
    // Same float accumulation order: adding explicit zero-padding taps never
    // changes a partial sum, so the two must agree bit for bit.
    REQUIRE(got.dims() == same_order.dims());
    for (int64_t i = 0; i < got.numel(); ++i) {
      REQUIRE(got.ptr()[i] == same_order.ptr()[i]);
    }

    const std::vector<double> ref = oracle::conv2d_oracle_double(
        x, weight, with_bias ? &bias : nullptr, stride, padding, groups);
    double scale = 1e-30;
    for (double v : ref) scale = std::max(scale, std::abs(v));
    for (int64_t i = 0; i < got.numel(); ++i) {
      const double err =
          std::abs(static_cast<double>(got.ptr()[i]) -
                   ref[static_cast<size_t>(i)]) /
          std::max(scale, 1.0);
      REQUIRE(err <= 1e-6);
    }
    ++checked;
  }
  CHECK(checked == 400);
}

TEST_CASE("conv2d computes the textbook 1-D example") {
  // 1x1x1x3 input [1,2,3], kernel [1,0,-1], padding 1 on both axes:
  // the middle output row sees padded [0,1,2,3,0] -> [-2,-2,2], the rows
  // above and below only see zero padding.
  const Tensor x({1, 1, 1, 3}, {1, 2, 3});
  const Tensor w({1, 1, 1, 3}, {1, 0, -1});
  const Tensor y = nn::conv2d(x, w, nullptr, 1, 1, 1);
  CHECK(y.dims() == std::vector<int>{1, 1, 3, 3});
  for (int i = 0; i < 3; ++i) {
    CHECK(y.ptr()[i] == 0.0f);      // row over top padding
    CHECK(y.ptr()[6 + i] == 0.0f);  // row over bottom padding
  }
  CHECK(y.ptr()[3] == -2.0f);
  CHECK(y.ptr()[4] == -2.0f);
  CHECK(y.ptr()[5] == 2.0f);
}

TEST_CASE("conv2d groups partition the channels") {
  // groups=2: each output channel sees only its half of the input.
  const Tensor x({1, 2, 1, 1}, {3, 5});
  const Tensor w({2, 1, 1, 1}, {10, 100});
  const Tensor y = nn::conv2d(x, w, nullptr, 1, 0, 2);
  CHECK(y.ptr()[0] == 30.0f);
  CHECK(y.ptr()[1] == 500.0f);
}

TEST_CASE("conv2d rejects inconsistent geometry") {
  const Tensor x({1, 4, 8, 8});
  const Tensor w({8, 2, 3, 3});
  const Tensor w_bad({8, 3, 3, 3});
  const Tensor bias3({3});
  CHECK_THROWS_AS(nn::conv2d(x, w, nullptr, 0, 1, 2), ArgumentError);
  CHECK_THROWS_AS(nn::conv2d(x, w, nullptr, 1, -1, 2), ArgumentError);
  CHECK_THROWS_AS(nn::conv2d(x, w, nullptr, 1, 1, 0), ArgumentError);
  CHECK_THROWS_AS(nn::conv2d(x, w, nullptr, 1, 1, 3), ShapeError);  // 4 % 3
  CHECK_THROWS_AS(nn::conv2d(x, w_bad, nullptr, 1, 1, 2), ShapeError);
  CHECK_THROWS_AS(nn::conv2d(x, w, &bias3, 1, 1, 2), ShapeError);
  const Tensor tall({1, 2, 1, 8});
  const Tensor k3({2, 1, 3, 3});
  CHECK_THROWS_AS(nn::conv2d(tall, k3, nullptr, 1, 0, 2), ShapeError);
  const Tensor rank3({2, 3, 4});
  CHECK_THROWS_AS(nn::conv2d(rank3, w, nullptr, 1, 1, 1), ShapeError);
}

TEST_CASE("conv2d is bit-deterministic across repeat runs") {
  Rng rng(5);
  const Tensor x = random_tensor({2, 6, 7, 7}, rng);
  const Tensor w = random_tensor({4, 6, 3, 3}, rng);
  const Tensor a = nn::conv2d(x, w, nullptr, 2, 1, 1);
  const Tensor b = nn::conv2d(x, w, nullptr, 2, 1, 1);
  CHECK(a == b);
}

TEST_CASE("batchnorm_infer matches the per-channel formula") {
  Rng rng(6);
  const Tensor x = random_tensor({2, 3, 4, 5}, rng);
  const Tensor gamma = random_tensor({3}, rng, 0.5, 2.0);
  const Tensor beta = random_tensor({3}, rng);
  const Tensor mean = random_tensor({3}, rng);
  const Tensor var = random_tensor({3}, rng, 0.1, 2.0);
  const float eps = 1e-5f;
  const Tensor y = nn::batchnorm_infer(x, gamma, beta, mean, var, eps);
  for (int n = 0; n < 2; ++n) {
    for (int c = 0; c < 3; ++c) {
      for (int i = 0; i < 20; ++i) {
        const int64_t idx = ((n * 3 + c) * 20) + i;
        const double want =
            static_cast<double>(gamma.ptr()[c]) *
                (static_cast<double>(x.ptr()[idx]) - mean.ptr()[c]) /
                std::sqrt(static_cast<double>(var.ptr()[c]) + eps) +
            beta.ptr()[c];
        CHECK(static_cast<double>(y.ptr()[idx]) ==
              doctest::Approx(want).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("batchnorm_infer rejects bad vectors") {
  const Tensor x({1, 3, 2, 2});
  const Tensor ok({3});
  const Tensor wrong({4});
  const Tensor neg_var({3}, {1.0f, -0.5f, 1.0f});
  CHECK_THROWS_AS(nn::batchnorm_infer(x, wrong, ok, ok, ok), ShapeError);
  CHECK_THROWS_AS(nn::batchnorm_infer(x, ok, ok, ok, neg_var), ArgumentError);
  CHECK_THROWS_AS(nn::batchnorm_infer(x, ok, ok, ok, ok, 0.0f), ArgumentError);
  CHECK_THROWS_AS(nn::batchnorm_infer(x, ok, ok, ok, ok, -1.0f),
                  ArgumentError);
}

TEST_CASE("relu6 clips at both rails") {
  const Tensor x({1, 1, 1, 5}, {-3.0f, 0.0f, 2.5f, 6.0f, 9.0f});
  const Tensor y = nn::relu6(x);
  CHECK(y.ptr()[0] == 0.0f);
  CHECK(y.ptr()[1] == 0.0f);
  CHECK(y.ptr()[2] == 2.5f);
  CHECK(y.ptr()[3] == 6.0f);
  CHECK(y.ptr()[4] == 6.0f);
}

TEST_CASE("global_avg_pool averages each channel plane") {
  Rng rng(8);
  const Tensor x = random_tensor({2, 3, 5, 7}, rng);
  const Tensor y = nn::global_avg_pool(x);
  CHECK(y.dims() == std::vector<int>{2, 3});
  for (int n = 0; n < 2; ++n) {
    for (int c = 0; c < 3; ++c) {
      double acc = 0.0;
      for (int i = 0; i < 35; ++i) acc += x.ptr()[(n * 3 + c) * 35 + i];
      CHECK(static_cast<double>(y.ptr()[n * 3 + c]) ==
            doctest::Approx(acc / 35.0).epsilon(1e-7));
    }
  }
}

TEST_CASE("linear matches a double-precision product") {
  Rng rng(9);
  const Tensor x = random_tensor({3, 10}, rng);
  const Tensor w = random_tensor({4, 10}, rng);
  const Tensor b = random_tensor({4}, rng);
  const Tensor y = nn::linear(x, w, b);
  CHECK(y.dims() == std::vector<int>{3, 4});
  for (int n = 0; n < 3; ++n) {
    for (int k = 0; k < 4; ++k) {
      double acc = 0.0;
      for (int f = 0; f < 10; ++f) {
        acc += static_cast<double>(x.ptr()[n * 10 + f]) * w.ptr()[k * 10 + f];
      }
      acc += b.ptr()[k];
      CHECK(static_cast<double>(y.ptr()[n * 4 + k]) ==
            doctest::Approx(acc).epsilon(1e-6));
    }
  }
  const Tensor w_bad({4, 9});
  CHECK_THROWS_AS(nn::linear(x, w_bad, b), ShapeError);
  const Tensor b_bad({5});
  CHECK_THROWS_AS(nn::linear(x, w, b_bad), ShapeError);
}

TEST_CASE("softmax rows sum to one and match a double reference") {
  Rng rng(10);
  const Tensor logits = random_tensor({16, 7}, rng, -30.0, 30.0);
  const Tensor p = nn::softmax(logits);
  for (int n = 0; n < 16; ++n) {
    double sum = 0.0;
    double mx = logits.ptr()[n * 7];
    for (int k = 1; k < 7; ++k) {
      mx = std::max(mx, static_cast<double>(logits.ptr()[n * 7 + k]));
    }
    double denom = 0.0;
    for (int k = 0; k < 7; ++k) {
      denom += std::exp(static_cast<double>(logits.ptr()[n * 7 + k]) - mx);
    }
    for (int k = 0; k < 7; ++k) {
      const double want =
          std::exp(static_cast<double>(logits.ptr()[n * 7 + k]) - mx) / denom;
      CHECK(std::abs(p.ptr()[n * 7 + k] - want) <= 1e-7);
      sum += p.ptr()[n * 7 + k];
      CHECK(p.ptr()[n * 7 + k] >= 0.0f);
    }
    CHECK(std::abs(sum - 1.0) <= 1e-6);
  }
}

TEST_CASE("softmax survives extreme logits without overflow") {
  const Tensor logits({1, 3}, {1000.0f, 999.0f, -1000.0f});
  const Tensor p = nn::softmax(logits);
  CHECK(p.all_finite());
  CHECK(p.ptr()[0] > p.ptr()[1]);
  CHECK(p.ptr()[2] == 0.0f);
  const double sum = static_cast<double>(p.ptr()[0]) + p.ptr()[1] + p.ptr()[2];
  CHECK(std::abs(sum - 1.0) <= 1e-6);
}

TEST_CASE("cross_entropy loss equals log K on uniform logits") {
  const Tensor logits({2, 4}, std::vector<float>(8, 0.37f));
  const auto ce = nn::cross_entropy(logits, {0, 3});
  CHECK(static_cast<double>(ce.loss) ==
        doctest::Approx(std::log(4.0)).epsilon(1e-6));
  // Gradient: (1/K - onehot)/N on the label, 1/(K*N) elsewhere.
  for (int n = 0; n < 2; ++n) {
    for (int k = 0; k < 4; ++k) {
      const double onehot = (k == (n == 0 ? 0 : 3)) ? 1.0 : 0.0;
      CHECK(static_cast<double>(ce.grad_logits.ptr()[n * 4 + k]) ==
            doctest::Approx((0.25 - onehot) / 2.0).epsilon(1e-5));
    }
  }
}

TEST_CASE("cross_entropy gradient matches finite differences") {
  Rng rng(12);
  const int n_batch = 5, classes = 4;
  Tensor logits = random_tensor({n_batch, classes}, rng, -2.0, 2.0);
  const std::vector<int> labels = {0, 2, 1, 3, 2};
  const auto ce = nn::cross_entropy(logits, labels);

  std::vector<double> base(static_cast<size_t>(n_batch * classes));
  for (int i = 0; i < n_batch * classes; ++i) base[i] = logits.ptr()[i];

  double max_grad = 1e-8;
  for (int64_t i = 0; i < ce.grad_logits.numel(); ++i) {
    max_grad = std::max(max_grad,
                        std::abs(static_cast<double>(ce.grad_logits.ptr()[i])));
  }
  const double h = 1e-4;
  for (int i = 0; i < n_batch * classes; ++i) {
    std::vector<double> plus = base, minus = base;
    plus[static_cast<size_t>(i)] += h;
    minus[static_cast<size_t>(i)] -= h;
    const double fd = (oracle::cross_entropy_double(plus, n_batch, classes,
                                                    labels) -
                       oracle::cross_entropy_double(minus, n_batch, classes,
                                                    labels)) /
                      (2 * h);
    const double rel =
        std::abs(fd - ce.grad_logits.ptr()[i]) / max_grad;
    CHECK(rel <= 1e-4);
  }
}

TEST_CASE("cross_entropy validates labels") {
  const Tensor logits({2, 3});
  CHECK_THROWS_AS(nn::cross_entropy(logits, {0}), ArgumentError);
  CHECK_THROWS_AS(nn::cross_entropy(logits, {0, 3}), IndexError);
  CHECK_THROWS_AS(nn::cross_entropy(logits, {-1, 0}), IndexError);
}

TEST_CASE("argmax_rows prefers the first of equal maxima") {
  const Tensor logits({3, 3},
                      {1.0f, 3.0f, 2.0f, 5.0f, 5.0f, 1.0f, 2.0f, 2.0f, 2.0f});
  const std::vector<int> idx = nn::argmax_rows(logits);
  CHECK(idx == std::vector<int>{1, 0, 0});
}

TEST_SUITE_END();
