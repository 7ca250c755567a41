#ifndef LUNGLINE_PREPROCESS_HPP
#define LUNGLINE_PREPROCESS_HPP

#include <array>
#include <cstdint>

#include "lungline/image.hpp"
#include "lungline/rng.hpp"
#include "lungline/tensor.hpp"

namespace lungline::preprocess {

inline constexpr int kInputSize = 224;

struct NormalizationSpec {
  std::array<float, 3> mean{0.0960f, 0.0960f, 0.0960f};
  std::array<float, 3> stddev{0.9341f, 0.9341f, 0.9341f};
};

struct AugmentConfig {
  bool enabled = false;
  double crop_scale_lo = 0.6;   // area fraction range
  double crop_scale_hi = 1.0;
  double crop_aspect_lo = 3.0 / 4.0;
  double crop_aspect_hi = 4.0 / 3.0;
  double rotation_degrees = 15.0;
  uint64_t seed = 0;
};

struct CropRect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
};

// Bilinear resize with half-pixel-center alignment (source coordinate
// (dst+0.5)*scale-0.5); resizing to the same size is exactly the identity.
Image resize_bilinear(const Image& img, int out_width, int out_height);

Image crop(const Image& img, const CropRect& rect);

// Rotates about the image center, bilinear sampling, zero (black) fill for
// samples that fall outside. Positive angles turn the content clockwise.
Image rotate_bilinear(const Image& img, double degrees);

// Area-and-aspect crop sampler: up to 10 attempts drawing area fraction in
// [scale_lo,scale_hi], aspect log-uniform in [aspect_lo,aspect_hi], position
// uniform; falls back to the full image when nothing fits.
CropRect sample_crop(int width, int height, const AugmentConfig& cfg,
                     Rng& rng);

// Uniform in [-rotation_degrees, +rotation_degrees].
double sample_rotation_angle(const AugmentConfig& cfg, Rng& rng);

// Training-time augmentation: crop -> resize to 224 -> rotate. Disabled
// configs reduce to the plain 224 resize. The caller supplies the stream
// (one per image index) so parallel preprocessing stays deterministic.
Image augment(const Image& img, const AugmentConfig& cfg, Rng& rng);

// Decoded image to network input: bilinear resize to 224x224 in float,
// RGB collapsed to BT.601 luma (0.299R + 0.587G + 0.114B), replicated to
// three channels, scaled by 1/255, then (x - mean)/std per channel.
Tensor to_model_input(const Image& img, const NormalizationSpec& norm);

}  // namespace lungline::preprocess

#endif  // LUNGLINE_PREPROCESS_HPP
