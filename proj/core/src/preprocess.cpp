#include "lungline/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "lungline/errors.hpp"

namespace lungline::preprocess {

namespace {

void check_image(const Image& img, const char* op) {
  if (img.width < 1 || img.height < 1 ||
      (img.channels != 1 && img.channels != 3)) {
    throw ArgumentError(std::string(op) + ": invalid image geometry " +
                        std::to_string(img.width) + "x" +
                        std::to_string(img.height) + "x" +
                        std::to_string(img.channels));
  }
  if (img.pixels.size() != static_cast<size_t>(img.width) *
                               static_cast<size_t>(img.height) *
                               static_cast<size_t>(img.channels)) {
    throw ArgumentError(std::string(op) + ": pixel buffer length " +
                        std::to_string(img.pixels.size()) +
                        " does not match geometry");
  }
}

void check_augment_config(const AugmentConfig& cfg) {
  if (!(cfg.crop_scale_lo > 0.0) || cfg.crop_scale_hi < cfg.crop_scale_lo ||
      cfg.crop_scale_hi > 1.0) {
    throw ArgumentError("augment: crop scale range must satisfy 0 < lo <= hi <= 1");
  }
  if (!(cfg.crop_aspect_lo > 0.0) || cfg.crop_aspect_hi < cfg.crop_aspect_lo) {
    throw ArgumentError("augment: crop aspect range must satisfy 0 < lo <= hi");
  }
  if (cfg.rotation_degrees < 0.0) {
    throw ArgumentError("augment: rotation range must be >= 0");
  }
}

// Bilinear resample of one float plane, half-pixel-center alignment.
// Double arithmetic inside; the unit-scale case reproduces inputs exactly.
void resize_plane(const float* src, int sw, int sh, float* dst, int dw,
                  int dh) {
  const double scale_x = static_cast<double>(sw) / dw;
  const double scale_y = static_cast<double>(sh) / dh;
  for (int y = 0; y < dh; ++y) {
    const double fy = (y + 0.5) * scale_y - 0.5;
    const int y0 = static_cast<int>(std::floor(fy));
    const double wy = fy - y0;
    const int y0c = std::clamp(y0, 0, sh - 1);
    const int y1c = std::clamp(y0 + 1, 0, sh - 1);
    const float* row0 = src + static_cast<int64_t>(y0c) * sw;
    const float* row1 = src + static_cast<int64_t>(y1c) * sw;
    for (int x = 0; x < dw; ++x) {
      const double fx = (x + 0.5) * scale_x - 0.5;
      const int x0 = static_cast<int>(std::floor(fx));
      const double wx = fx - x0;
      const int x0c = std::clamp(x0, 0, sw - 1);
      const int x1c = std::clamp(x0 + 1, 0, sw - 1);
      const double top = (1.0 - wx) * row0[x0c] + wx * row0[x1c];
      const double bot = (1.0 - wx) * row1[x0c] + wx * row1[x1c];
      dst[static_cast<int64_t>(y) * dw + x] =
          static_cast<float>((1.0 - wy) * top + wy * bot);
    }
  }
}

std::vector<float> plane_of(const Image& img, int c) {
  std::vector<float> plane(static_cast<size_t>(img.width) *
                           static_cast<size_t>(img.height));
  const int64_t n = static_cast<int64_t>(img.width) * img.height;
  for (int64_t i = 0; i < n; ++i) {
    plane[static_cast<size_t>(i)] =
        img.pixels[static_cast<size_t>(i * img.channels + c)];
  }
  return plane;
}

uint8_t to_byte(double v) {
  return static_cast<uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
}

}  // namespace

Image resize_bilinear(const Image& img, int out_width, int out_height) {
  check_image(img, "resize");
  if (out_width < 1 || out_height < 1) {
    throw ArgumentError("resize: target extents must be >= 1");
  }
  Image out;
  out.width = out_width;
  out.height = out_height;
  out.channels = img.channels;
  out.pixels.resize(static_cast<size_t>(out_width) *
                    static_cast<size_t>(out_height) *
                    static_cast<size_t>(img.channels));
  std::vector<float> dst(static_cast<size_t>(out_width) * out_height);
  for (int c = 0; c < img.channels; ++c) {
    const std::vector<float> src = plane_of(img, c);
    resize_plane(src.data(), img.width, img.height, dst.data(), out_width,
                 out_height);
    const int64_t n = static_cast<int64_t>(out_width) * out_height;
    for (int64_t i = 0; i < n; ++i) {
      out.pixels[static_cast<size_t>(i * img.channels + c)] =
          to_byte(dst[static_cast<size_t>(i)]);
    }
  }
  return out;
}

Image crop(const Image& img, const CropRect& rect) {
  check_image(img, "crop");
  if (rect.width < 1 || rect.height < 1 || rect.x < 0 || rect.y < 0 ||
      rect.x + rect.width > img.width || rect.y + rect.height > img.height) {
    throw ArgumentError("crop: rectangle " + std::to_string(rect.x) + "," +
                        std::to_string(rect.y) + " " +
                        std::to_string(rect.width) + "x" +
                        std::to_string(rect.height) +
                        " outside image " + std::to_string(img.width) + "x" +
                        std::to_string(img.height));
  }
  Image out;
  out.width = rect.width;
  out.height = rect.height;
  out.channels = img.channels;
  out.pixels.resize(static_cast<size_t>(rect.width) *
                    static_cast<size_t>(rect.height) *
                    static_cast<size_t>(img.channels));
  const size_t row_bytes =
      static_cast<size_t>(rect.width) * static_cast<size_t>(img.channels);
  for (int y = 0; y < rect.height; ++y) {
    const size_t src_off =
        (static_cast<size_t>(y + rect.y) * img.width + rect.x) *
        static_cast<size_t>(img.channels);
    std::copy_n(img.pixels.data() + src_off, row_bytes,
                out.pixels.data() + static_cast<size_t>(y) * row_bytes);
  }
  return out;
}

Image rotate_bilinear(const Image& img, double degrees) {
  check_image(img, "rotate");
  const double rad = degrees * M_PI / 180.0;
  const double cs = std::cos(rad);
  const double sn = std::sin(rad);
  const double cx = (img.width - 1) / 2.0;
  const double cy = (img.height - 1) / 2.0;

  Image out;
  out.width = img.width;
  out.height = img.height;
  out.channels = img.channels;
  out.pixels.assign(img.pixels.size(), 0);

  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      // Sample the source at the inverse rotation of the target position.
      const double dx = x - cx;
      const double dy = y - cy;
      const double sx = cs * dx + sn * dy + cx;
      const double sy = -sn * dx + cs * dy + cy;
      const int x0 = static_cast<int>(std::floor(sx));
      const int y0 = static_cast<int>(std::floor(sy));
      const double wx = sx - x0;
      const double wy = sy - y0;
      for (int c = 0; c < img.channels; ++c) {
        double acc = 0.0;
        for (int ty = 0; ty < 2; ++ty) {
          for (int tx = 0; tx < 2; ++tx) {
            const int px = x0 + tx;
            const int py = y0 + ty;
            if (px < 0 || px >= img.width || py < 0 || py >= img.height) {
              continue;  // zero fill
            }
            const double w = (tx ? wx : 1.0 - wx) * (ty ? wy : 1.0 - wy);
            acc += w * img.at(px, py, c);
          }
        }
        out.pixels[(static_cast<size_t>(y) * img.width + x) *
                       static_cast<size_t>(img.channels) +
                   static_cast<size_t>(c)] = to_byte(acc);
      }
    }
  }
  return out;
}

CropRect sample_crop(int width, int height, const AugmentConfig& cfg,
                     Rng& rng) {
  check_augment_config(cfg);
  if (width < 1 || height < 1) {
    throw ArgumentError("sample_crop: image extents must be >= 1");
  }
  const double area = static_cast<double>(width) * height;
  const double log_lo = std::log(cfg.crop_aspect_lo);
  const double log_hi = std::log(cfg.crop_aspect_hi);
  for (int attempt = 0; attempt < 10; ++attempt) {
    const double target =
        area * rng.uniform(cfg.crop_scale_lo, cfg.crop_scale_hi);
    const double aspect = std::exp(rng.uniform(log_lo, log_hi));
    const int w = static_cast<int>(std::lround(std::sqrt(target * aspect)));
    const int h = static_cast<int>(std::lround(std::sqrt(target / aspect)));
    if (w >= 1 && h >= 1 && w <= width && h <= height) {
      const int y =
          static_cast<int>(rng.bounded(static_cast<uint64_t>(height - h + 1)));
      const int x =
          static_cast<int>(rng.bounded(static_cast<uint64_t>(width - w + 1)));
      return {x, y, w, h};
    }
  }
  return {0, 0, width, height};
}

double sample_rotation_angle(const AugmentConfig& cfg, Rng& rng) {
  check_augment_config(cfg);
  if (cfg.rotation_degrees == 0.0) return 0.0;
  return rng.uniform(-cfg.rotation_degrees, cfg.rotation_degrees);
}

Image augment(const Image& img, const AugmentConfig& cfg, Rng& rng) {
  check_image(img, "augment");
  if (!cfg.enabled) {
    return resize_bilinear(img, kInputSize, kInputSize);
  }
  check_augment_config(cfg);
  const CropRect rect = sample_crop(img.width, img.height, cfg, rng);
  const double angle = sample_rotation_angle(cfg, rng);
  Image out = crop(img, rect);
  out = resize_bilinear(out, kInputSize, kInputSize);
  return rotate_bilinear(out, angle);
}

Tensor to_model_input(const Image& img, const NormalizationSpec& norm) {
  check_image(img, "to_model_input");
  for (float s : norm.stddev) {
    if (!(s > 0.0f)) {
      throw ArgumentError("to_model_input: std components must be > 0");
    }
  }

  // Resize each source channel in float, then collapse to luma.
  const int n = kInputSize * kInputSize;
  std::vector<float> gray(static_cast<size_t>(n));
  if (img.channels == 1) {
    const std::vector<float> src = plane_of(img, 0);
    resize_plane(src.data(), img.width, img.height, gray.data(), kInputSize,
                 kInputSize);
  } else {
    std::vector<float> r(static_cast<size_t>(n)), g(static_cast<size_t>(n)),
        b(static_cast<size_t>(n));
    for (int c = 0; c < 3; ++c) {
      const std::vector<float> src = plane_of(img, c);
      float* dst = c == 0 ? r.data() : c == 1 ? g.data() : b.data();
      resize_plane(src.data(), img.width, img.height, dst, kInputSize,
                   kInputSize);
    }
    for (int i = 0; i < n; ++i) {
      gray[static_cast<size_t>(i)] = 0.299f * r[static_cast<size_t>(i)] +
                                     0.587f * g[static_cast<size_t>(i)] +
                                     0.114f * b[static_cast<size_t>(i)];
    }
  }

  Tensor out({3, kInputSize, kInputSize});
  float* y = out.ptr();
  for (int c = 0; c < 3; ++c) {
    const float mean = norm.mean[static_cast<size_t>(c)];
    const float stddev = norm.stddev[static_cast<size_t>(c)];
    for (int i = 0; i < n; ++i) {
      y[static_cast<int64_t>(c) * n + i] =
          (gray[static_cast<size_t>(i)] / 255.0f - mean) / stddev;
    }
  }
  return out;
}

}  // namespace lungline::preprocess
