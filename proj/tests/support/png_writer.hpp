#ifndef LUNGLINE_TESTS_PNG_WRITER_HPP
#define LUNGLINE_TESTS_PNG_WRITER_HPP

// Minimal PNG encoder for decoder fixtures, written against the container
// format directly (signature, IHDR/PLTE/IDAT/IEND chunks, zlib stream via
// compress2) so the tests do not depend on libpng's own writer.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <zlib.h>

namespace lungline::test {

inline void push_u32be(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v >> 24));
  out.push_back(static_cast<uint8_t>(v >> 16));
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v));
}

inline void push_chunk(std::vector<uint8_t>& out, const char type[4],
                       const std::vector<uint8_t>& data) {
  push_u32be(out, static_cast<uint32_t>(data.size()));
  std::vector<uint8_t> body(type, type + 4);
  body.insert(body.end(), data.begin(), data.end());
  out.insert(out.end(), body.begin(), body.end());
  push_u32be(out, static_cast<uint32_t>(
                      crc32(0, body.data(), static_cast<uInt>(body.size()))));
}

// color_type: 0 gray, 2 rgb, 3 palette, 6 rgba. `samples` holds the raw
// scanline bytes without filter bytes (16-bit samples big-endian, as PNG
// stores them).
inline std::vector<uint8_t> encode_png(int width, int height, int bit_depth,
                                       int color_type,
                                       const std::vector<uint8_t>& samples,
                                       const std::vector<uint8_t>& palette = {},
                                       bool interlace = false) {
  int channels = 1;
  if (color_type == 2) channels = 3;
  if (color_type == 6) channels = 4;
  const size_t row_bytes =
      (static_cast<size_t>(width) * channels * bit_depth + 7) / 8;
  if (samples.size() != row_bytes * static_cast<size_t>(height)) {
    throw std::runtime_error("png fixture: sample buffer length mismatch");
  }

  std::vector<uint8_t> raw;  // filter byte 0 + scanline, per row
  raw.reserve((row_bytes + 1) * static_cast<size_t>(height));
  for (int y = 0; y < height; ++y) {
    raw.push_back(0);
    raw.insert(raw.end(), samples.begin() + static_cast<long>(y * row_bytes),
               samples.begin() + static_cast<long>((y + 1) * row_bytes));
  }
  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<uint8_t> compressed(bound);
  if (compress2(compressed.data(), &bound, raw.data(),
                static_cast<uLong>(raw.size()), 6) != Z_OK) {
    throw std::runtime_error("png fixture: deflate failed");
  }
  compressed.resize(bound);

  std::vector<uint8_t> png = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  std::vector<uint8_t> ihdr;
  push_u32be(ihdr, static_cast<uint32_t>(width));
  push_u32be(ihdr, static_cast<uint32_t>(height));
  ihdr.push_back(static_cast<uint8_t>(bit_depth));
  ihdr.push_back(static_cast<uint8_t>(color_type));
  ihdr.push_back(0);  // compression
  ihdr.push_back(0);  // filter
  ihdr.push_back(interlace ? 1 : 0);
  push_chunk(png, "IHDR", ihdr);
  if (color_type == 3) push_chunk(png, "PLTE", palette);
  push_chunk(png, "IDAT", compressed);
  push_chunk(png, "IEND", {});
  return png;
}

inline std::vector<uint8_t> encode_gray8(int width, int height,
                                         const std::vector<uint8_t>& pixels) {
  return encode_png(width, height, 8, 0, pixels);
}

inline std::vector<uint8_t> encode_rgb8(int width, int height,
                                        const std::vector<uint8_t>& pixels) {
  return encode_png(width, height, 8, 2, pixels);
}

// 16-bit grayscale from 16-bit sample values.
inline std::vector<uint8_t> encode_gray16(
    int width, int height, const std::vector<uint16_t>& samples) {
  std::vector<uint8_t> bytes;
  bytes.reserve(samples.size() * 2);
  for (uint16_t s : samples) {
    bytes.push_back(static_cast<uint8_t>(s >> 8));
    bytes.push_back(static_cast<uint8_t>(s & 0xff));
  }
  return encode_png(width, height, 16, 0, bytes);
}

}  // namespace lungline::test

#endif  // LUNGLINE_TESTS_PNG_WRITER_HPP
