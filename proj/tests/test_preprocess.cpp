#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "lungline/errors.hpp"
#include "lungline/image.hpp"
#include "lungline/preprocess.hpp"
#include "lungline/rng.hpp"
#include "lungline/tensor.hpp"

using lungline::ArgumentError;
using lungline::Image;
using lungline::Rng;
using lungline::Tensor;
namespace pp = lungline::preprocess;

namespace {

Image gray(int w, int h, std::vector<uint8_t> pixels) {
  Image img;
  img.width = w;
  img.height = h;
  img.channels = 1;
  img.pixels = std::move(pixels);
  return img;
}

Image noise_image(int w, int h, int channels, uint64_t seed) {
  Image img;
  img.width = w;
  img.height = h;
  img.channels = channels;
  img.pixels.resize(static_cast<size_t>(w) * h * channels);
  Rng rng(seed);
  for (auto& p : img.pixels) p = static_cast<uint8_t>(rng.bounded(256));
  return img;
}

}  // namespace

TEST_SUITE_BEGIN("preprocess");

TEST_CASE("resize to the same size is the identity") {
  const Image img = noise_image(17, 23, 1, 4);
  const Image out = pp::resize_bilinear(img, 17, 23);
  CHECK(out.pixels == img.pixels);
  const Image rgb = noise_image(9, 5, 3, 5);
  CHECK(pp::resize_bilinear(rgb, 9, 5).pixels == rgb.pixels);
}

TEST_CASE("1-D doubling matches the half-pixel formula by hand") {
  // Width 2 [0,255] -> width 4: source coords -0.25, 0.25, 0.75, 1.25.
  const Image img = gray(2, 1, {0, 255});
  const Image out = pp::resize_bilinear(img, 4, 1);
  CHECK(out.pixels == std::vector<uint8_t>{0, 64, 191, 255});
}

TEST_CASE("downsampling a constant image stays constant") {
  const Image img = gray(8, 8, std::vector<uint8_t>(64, 131));
  const Image out = pp::resize_bilinear(img, 3, 5);
  CHECK(out.width == 3);
  CHECK(out.height == 5);
  for (uint8_t p : out.pixels) CHECK(p == 131);
}

TEST_CASE("resize validates its arguments") {
  const Image img = gray(2, 2, {1, 2, 3, 4});
  CHECK_THROWS_AS(pp::resize_bilinear(img, 0, 4), ArgumentError);
  Image broken = img;
  broken.pixels.pop_back();
  CHECK_THROWS_AS(pp::resize_bilinear(broken, 4, 4), ArgumentError);
}

TEST_CASE("crop copies the exact window") {
  const Image img = gray(4, 3, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11});
  const Image out = pp::crop(img, {1, 1, 2, 2});
  CHECK(out.width == 2);
  CHECK(out.height == 2);
  CHECK(out.pixels == std::vector<uint8_t>{5, 6, 9, 10});
  CHECK_THROWS_AS(pp::crop(img, {3, 0, 2, 1}), ArgumentError);
  CHECK_THROWS_AS(pp::crop(img, {0, 0, 0, 1}), ArgumentError);
  CHECK_THROWS_AS(pp::crop(img, {-1, 0, 2, 2}), ArgumentError);
}

TEST_CASE("rotation by zero degrees is the identity") {
  const Image img = noise_image(13, 9, 1, 6);
  CHECK(pp::rotate_bilinear(img, 0.0).pixels == img.pixels);
}

TEST_CASE("rotation by 180 degrees reverses an odd-sized image") {
  const Image img = gray(3, 3, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  const Image out = pp::rotate_bilinear(img, 180.0);
  CHECK(out.pixels == std::vector<uint8_t>{9, 8, 7, 6, 5, 4, 3, 2, 1});
}

TEST_CASE("rotation fills uncovered corners with black") {
  const Image img = gray(9, 9, std::vector<uint8_t>(81, 255));
  const Image out = pp::rotate_bilinear(img, 45.0);
  // Corners land outside the source square.
  CHECK(out.at(0, 0) == 0);
  CHECK(out.at(8, 8) == 0);
  // The center never moves.
  CHECK(out.at(4, 4) == 255);
}

TEST_CASE("sampled crops stay in bounds with plausible areas") {
  pp::AugmentConfig cfg;
  cfg.enabled = true;
  Rng rng(77);
  const int w = 64, h = 48;
  int full_image = 0;
  for (int i = 0; i < 10000; ++i) {
    const pp::CropRect r = pp::sample_crop(w, h, cfg, rng);
    REQUIRE(r.x >= 0);
    REQUIRE(r.y >= 0);
    REQUIRE(r.width >= 1);
    REQUIRE(r.height >= 1);
    REQUIRE(r.x + r.width <= w);
    REQUIRE(r.y + r.height <= h);
    const double area = static_cast<double>(r.width) * r.height;
    if (r.width == w && r.height == h) {
      ++full_image;
    } else {
      // Rounding of the side lengths distorts the drawn area a little.
      CHECK(area >= 0.5 * w * h);
      CHECK(area <= 1.05 * w * h);
      const double aspect = static_cast<double>(r.width) / r.height;
      CHECK(aspect >= 0.70);
      CHECK(aspect <= 1.43);
    }
  }
  // The sampler must not collapse to its full-image fallback.
  CHECK(full_image < 2000);
}

TEST_CASE("impossible crop geometry falls back to the full image") {
  pp::AugmentConfig cfg;
  cfg.enabled = true;
  Rng rng(3);
  // One-pixel-wide strip: every sampled width >= 2 fails to fit.
  const pp::CropRect r = pp::sample_crop(1, 100, cfg, rng);
  CHECK(r.x == 0);
  CHECK(r.y == 0);
  CHECK(r.width == 1);
  CHECK(r.height == 100);
}

TEST_CASE("rotation angles are uniform over the configured range") {
  pp::AugmentConfig cfg;
  cfg.enabled = true;
  Rng rng(21);
  double sum = 0.0;
  double lo = 1e9, hi = -1e9;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const double a = pp::sample_rotation_angle(cfg, rng);
    REQUIRE(a >= -15.0);
    REQUIRE(a < 15.0);
    sum += a;
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  CHECK(std::abs(sum / n) < 0.5);
  CHECK(lo < -14.0);  // both tails get visited
  CHECK(hi > 14.0);
  cfg.rotation_degrees = 0.0;
  CHECK(pp::sample_rotation_angle(cfg, rng) == 0.0);
}

TEST_CASE("disabled augmentation is exactly the 224 resize") {
  const Image img = noise_image(300, 200, 1, 8);
  pp::AugmentConfig cfg;  // enabled = false
  Rng rng(1);
  const Image out = pp::augment(img, cfg, rng);
  CHECK(out.width == 224);
  CHECK(out.height == 224);
  CHECK(out.pixels == pp::resize_bilinear(img, 224, 224).pixels);
}

TEST_CASE("enabled augmentation is deterministic in the stream") {
  const Image img = noise_image(240, 180, 1, 9);
  pp::AugmentConfig cfg;
  cfg.enabled = true;
  Rng a = Rng::for_stream(5, 3);
  Rng b = Rng::for_stream(5, 3);
  Rng c = Rng::for_stream(5, 4);
  const Image out_a = pp::augment(img, cfg, a);
  const Image out_b = pp::augment(img, cfg, b);
  const Image out_c = pp::augment(img, cfg, c);
  CHECK(out_a.width == 224);
  CHECK(out_a.height == 224);
  CHECK(out_a.pixels == out_b.pixels);
  CHECK(out_a.pixels != out_c.pixels);
}

TEST_CASE("to_model_input normalizes constant images to known values") {
  const pp::NormalizationSpec norm;
  const Image black = gray(10, 10, std::vector<uint8_t>(100, 0));
  const Tensor t0 = pp::to_model_input(black, norm);
  CHECK(t0.dims() == std::vector<int>{3, 224, 224});
  const float want_black = (0.0f - 0.0960f) / 0.9341f;
  for (float v : t0.data()) {
    CHECK(v == doctest::Approx(want_black).epsilon(1e-6));
  }

  const Image white = gray(10, 10, std::vector<uint8_t>(100, 255));
  const Tensor t1 = pp::to_model_input(white, norm);
  const float want_white = (1.0f - 0.0960f) / 0.9341f;
  for (float v : t1.data()) {
    CHECK(v == doctest::Approx(want_white).epsilon(1e-6));
  }
  CHECK(want_black == doctest::Approx(-0.102772).epsilon(1e-4));
  CHECK(want_white == doctest::Approx(0.967776).epsilon(1e-4));
}

TEST_CASE("RGB collapses through the 601 luma weights") {
  Image img;
  img.width = 224;
  img.height = 224;
  img.channels = 3;
  img.pixels.resize(224 * 224 * 3);
  for (size_t i = 0; i < img.pixels.size(); i += 3) {
    img.pixels[i] = 100;
    img.pixels[i + 1] = 150;
    img.pixels[i + 2] = 200;
  }
  const pp::NormalizationSpec norm;
  const Tensor t = pp::to_model_input(img, norm);
  const double luma = 0.299 * 100 + 0.587 * 150 + 0.114 * 200;  // 140.75
  const double want = (luma / 255.0 - 0.0960) / 0.9341;
  // All three output channels replicate the luma plane.
  for (int c = 0; c < 3; ++c) {
    CHECK(static_cast<double>(t.ptr()[c * 224 * 224]) ==
          doctest::Approx(want).epsilon(1e-5));
  }
}

TEST_CASE("grayscale input reaches the tensor without channel mixing") {
  // A gradient exercises the resize path and channel replication together.
  Image img = gray(448, 448, {});
  img.pixels.resize(448 * 448);
  for (int y = 0; y < 448; ++y) {
    for (int x = 0; x < 448; ++x) {
      img.pixels[static_cast<size_t>(y * 448 + x)] =
          static_cast<uint8_t>((x + y) % 256);
    }
  }
  const pp::NormalizationSpec norm;
  const Tensor t = pp::to_model_input(img, norm);
  CHECK(t.all_finite());
  const int64_t plane = 224 * 224;
  for (int64_t i = 0; i < plane; ++i) {
    CHECK(t.ptr()[i] == t.ptr()[plane + i]);
    CHECK(t.ptr()[i] == t.ptr()[2 * plane + i]);
  }
}

TEST_SUITE_END();
