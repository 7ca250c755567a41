#include "lungline/image.hpp"

#include <png.h>

#include <csetjmp>
#include <cstring>

#include "lungline/errors.hpp"
#include "lungline/util.hpp"

namespace lungline {

namespace {

struct MemoryReader {
  const uint8_t* data;
  size_t size;
  size_t off;
};

void read_from_memory(png_structp png, png_bytep out, png_size_t n) {
  auto* r = static_cast<MemoryReader*>(png_get_io_ptr(png));
  if (r->off + n > r->size) {
    png_error(png, "unexpected end of file");  // longjmps out
  }
  std::memcpy(out, r->data + r->off, n);
  r->off += n;
}

void quiet_warning(png_structp, png_const_charp) {}

}  // namespace

Image decode_png(std::span<const uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw DecodeError("not a PNG file: bad signature");
  }

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           nullptr, quiet_warning);
  if (!png) throw DecodeError("PNG reader allocation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw DecodeError("PNG reader allocation failed");
  }

  MemoryReader reader{bytes.data(), bytes.size(), 0};
  Image img;
  std::vector<png_bytep> rows;

  // libpng reports errors by longjmp. The vectors above are only resized
  // outside the region that can jump, so their destructors stay safe.
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DecodeError("malformed or truncated PNG data");
  }

  png_set_read_fn(png, &reader, read_from_memory);
  png_read_info(png, info);

  const png_byte color = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  const bool gray = color == PNG_COLOR_TYPE_GRAY;
  const bool rgb = color == PNG_COLOR_TYPE_RGB;
  const bool supported =
      (gray && (depth == 8 || depth == 16)) || (rgb && depth == 8);
  if (!supported) {
    const std::string msg = "unsupported PNG variant (color type " +
                            std::to_string(color) + ", bit depth " +
                            std::to_string(depth) +
                            "); only 8/16-bit grayscale and 8-bit RGB";
    png_destroy_read_struct(&png, &info, nullptr);
    throw UnsupportedFormatError(msg);
  }

  if (depth == 16) png_set_strip_16(png);  // keep the high byte
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  img.channels = gray ? 1 : 3;
  if (img.width < 1 || img.height < 1) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DecodeError("PNG has empty dimensions");
  }
  const size_t rowbytes = png_get_rowbytes(png, info);
  if (rowbytes != static_cast<size_t>(img.width) *
                      static_cast<size_t>(img.channels)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DecodeError("unexpected PNG row stride");
  }

  img.pixels.resize(static_cast<size_t>(img.height) * rowbytes);
  rows.resize(static_cast<size_t>(img.height));
  for (int y = 0; y < img.height; ++y) {
    rows[static_cast<size_t>(y)] =
        img.pixels.data() + static_cast<size_t>(y) * rowbytes;
  }

  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

Image load_image(const std::string& path) {
  const std::vector<uint8_t> bytes = read_binary_file(path);
  try {
    return decode_png(std::span<const uint8_t>(bytes));
  } catch (const UnsupportedFormatError& e) {
    throw UnsupportedFormatError(path + ": " + e.what());
  } catch (const DecodeError& e) {
    throw DecodeError(path + ": " + e.what());
  }
}

}  // namespace lungline
