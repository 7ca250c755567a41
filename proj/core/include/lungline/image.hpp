#ifndef LUNGLINE_IMAGE_HPP
#define LUNGLINE_IMAGE_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lungline {

// 8-bit raster, row-major, samples interleaved when channels == 3.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;  // 1 = grayscale, 3 = RGB
  std::vector<uint8_t> pixels;

  uint8_t at(int x, int y, int c = 0) const {
    return pixels[static_cast<size_t>(
        (static_cast<int64_t>(y) * width + x) * channels + c)];
  }
};

// Decodes a PNG byte stream. Accepts 8- and 16-bit grayscale (16-bit keeps
// the high byte of each sample) and 8-bit RGB. Palette, alpha, sub-8-bit and
// 16-bit RGB images raise UnsupportedFormatError; corrupt or truncated data
// raises DecodeError.
Image decode_png(std::span<const uint8_t> bytes);

// read_binary_file + decode_png, with the path prefixed to any format error.
Image load_image(const std::string& path);

}  // namespace lungline

#endif  // LUNGLINE_IMAGE_HPP
