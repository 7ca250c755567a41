#include <doctest.h>

#include <cstdint>
#include <vector>

#include "lungline/errors.hpp"
#include "lungline/image.hpp"
#include "support/png_writer.hpp"
#include "support/temp_dir.hpp"

using lungline::DecodeError;
using lungline::Image;
using lungline::IoError;
using lungline::UnsupportedFormatError;
namespace png = lungline::test;
using lungline::test::TempDir;

TEST_SUITE_BEGIN("image");

TEST_CASE("8-bit grayscale decodes to the exact pixel values") {
  const std::vector<uint8_t> pixels = {0, 63, 127, 191, 255, 10};
  const auto bytes = png::encode_gray8(3, 2, pixels);
  const Image img = lungline::decode_png(bytes);
  CHECK(img.width == 3);
  CHECK(img.height == 2);
  CHECK(img.channels == 1);
  CHECK(img.pixels == pixels);
  CHECK(img.at(1, 0) == 63);
  CHECK(img.at(2, 1) == 10);
}

TEST_CASE("16-bit grayscale keeps the high byte of each sample") {
  const std::vector<uint16_t> samples = {0x0000, 0x1234, 0x80ff, 0xffff};
  const auto bytes = png::encode_gray16(2, 2, samples);
  const Image img = lungline::decode_png(bytes);
  CHECK(img.channels == 1);
  CHECK(img.pixels == std::vector<uint8_t>{0x00, 0x12, 0x80, 0xff});
}

TEST_CASE("8-bit RGB decodes with interleaved samples") {
  const std::vector<uint8_t> pixels = {255, 0, 0, 0, 255, 0,
                                       0,   0, 255, 9, 8,  7};
  const auto bytes = png::encode_rgb8(2, 2, pixels);
  const Image img = lungline::decode_png(bytes);
  CHECK(img.channels == 3);
  CHECK(img.pixels == pixels);
  CHECK(img.at(1, 1, 2) == 7);
}

TEST_CASE("1x1 interlaced grayscale decodes") {
  const auto bytes = png::encode_png(1, 1, 8, 0, {200}, {}, true);
  const Image img = lungline::decode_png(bytes);
  CHECK(img.width == 1);
  CHECK(img.height == 1);
  CHECK(img.pixels == std::vector<uint8_t>{200});
}

TEST_CASE("interlaced multi-row grayscale decodes through all passes") {
  // 8x8 gradient stored with Adam7 pass interleaving.
  std::vector<uint8_t> pixels(64);
  for (int i = 0; i < 64; ++i) pixels[static_cast<size_t>(i)] =
      static_cast<uint8_t>(i * 4);
  // Emit the Adam7 passes in specification order.
  static const int col0[7] = {0, 4, 0, 2, 0, 1, 0};
  static const int dcol[7] = {8, 8, 4, 4, 2, 2, 1};
  static const int row0[7] = {0, 0, 4, 0, 2, 0, 1};
  static const int drow[7] = {8, 8, 8, 4, 4, 2, 2};
  std::vector<uint8_t> raw;
  for (int pass = 0; pass < 7; ++pass) {
    for (int y = row0[pass]; y < 8; y += drow[pass]) {
      raw.push_back(0);  // filter none
      for (int x = col0[pass]; x < 8; x += dcol[pass]) {
        raw.push_back(pixels[static_cast<size_t>(y * 8 + x)]);
      }
    }
  }
  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<uint8_t> compressed(bound);
  REQUIRE(compress2(compressed.data(), &bound, raw.data(),
                    static_cast<uLong>(raw.size()), 6) == Z_OK);
  compressed.resize(bound);
  std::vector<uint8_t> out = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  std::vector<uint8_t> ihdr;
  png::push_u32be(ihdr, 8);
  png::push_u32be(ihdr, 8);
  ihdr.insert(ihdr.end(), {8, 0, 0, 0, 1});
  png::push_chunk(out, "IHDR", ihdr);
  png::push_chunk(out, "IDAT", compressed);
  png::push_chunk(out, "IEND", {});

  const Image img = lungline::decode_png(out);
  CHECK(img.width == 8);
  CHECK(img.height == 8);
  CHECK(img.pixels == pixels);
}

TEST_CASE("palette, alpha, sub-8-bit, and 16-bit RGB are refused") {
  // Palette image: one index referencing a 2-entry palette.
  const std::vector<uint8_t> palette = {255, 0, 0, 0, 0, 255};
  const auto pal = png::encode_png(1, 1, 8, 3, {1}, palette);
  CHECK_THROWS_AS(lungline::decode_png(pal), UnsupportedFormatError);

  const auto rgba = png::encode_png(1, 1, 8, 6, {1, 2, 3, 4});
  CHECK_THROWS_AS(lungline::decode_png(rgba), UnsupportedFormatError);

  // 1-bit grayscale: one byte holds the whole row.
  const auto depth1 = png::encode_png(1, 1, 1, 0, {0x80});
  CHECK_THROWS_AS(lungline::decode_png(depth1), UnsupportedFormatError);

  std::vector<uint8_t> wide_samples(6, 0x42);
  const auto rgb16 = png::encode_png(1, 1, 16, 2, wide_samples);
  CHECK_THROWS_AS(lungline::decode_png(rgb16), UnsupportedFormatError);
}

TEST_CASE("garbage, truncated, and corrupted streams raise DecodeError") {
  const std::vector<uint8_t> garbage = {'h', 'e', 'l', 'l', 'o'};
  CHECK_THROWS_AS(lungline::decode_png(garbage), DecodeError);

  const auto good = png::encode_gray8(4, 4, std::vector<uint8_t>(16, 7));
  for (size_t len : {size_t{0}, size_t{7}, size_t{20}, good.size() - 5}) {
    const std::vector<uint8_t> cut(good.begin(),
                                   good.begin() + static_cast<long>(len));
    CHECK_THROWS_AS(lungline::decode_png(cut), DecodeError);
  }

  // Flip bytes inside the IDAT deflate data (file offset: 8 signature +
  // 25 IHDR chunk + 8 IDAT length/type + 2 zlib header).
  std::vector<uint8_t> corrupt = good;
  corrupt[43] ^= 0xff;
  corrupt[44] ^= 0xff;
  CHECK_THROWS_AS(lungline::decode_png(corrupt), DecodeError);
}

TEST_CASE("load_image prefixes errors with the path and handles missing files") {
  TempDir dir;
  const auto bytes = png::encode_gray8(2, 1, {1, 2});
  png::write_file(dir.str("ok.png"), bytes);
  const Image img = lungline::load_image(dir.str("ok.png"));
  CHECK(img.pixels == std::vector<uint8_t>{1, 2});

  png::write_file(dir.str("bad.png"), {1, 2, 3});
  try {
    lungline::load_image(dir.str("bad.png"));
    FAIL("expected DecodeError");
  } catch (const DecodeError& e) {
    CHECK(std::string(e.what()).find("bad.png") != std::string::npos);
  }

  CHECK_THROWS_AS(lungline::load_image(dir.str("absent.png")), IoError);
}

TEST_SUITE_END();
