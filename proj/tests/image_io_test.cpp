#include <gtest/gtest.h>
#include <png.h>

#include <csetjmp>
#include <random>

#include "nui/image_io.hpp"
#include "test_support.hpp"

namespace nui {
namespace {

// Raw libpng writer for formats the library itself never produces.
std::vector<std::uint8_t> encode_raw_png(int width, int height, int bit_depth, int color_type,
                                         const std::vector<std::uint8_t>& data, bool add_trns = false) {
  std::vector<std::uint8_t> out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("test PNG encoding failed");
  }
  png_set_write_fn(
      png, &out,
      [](png_structp p, png_bytep bytes, png_size_t n) {
        auto* v = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(p));
        v->insert(v->end(), bytes, bytes + n);
      },
      [](png_structp) {});
  png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_color palette[2] = {{0, 0, 0}, {255, 128, 7}};
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_PLTE(png, info, palette, 2);
  png_color_16 trans{};
  if (add_trns) png_set_tRNS(png, info, nullptr, 0, &trans);
  png_write_info(png, info);
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  for (int y = 0; y < height; ++y) png_write_row(png, const_cast<png_bytep>(data.data() + y * row_bytes));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

TEST(Png, RoundTripsGrayAndRgb) {
  std::mt19937_64 rng(7);
  for (int channels : {1, 3}) {
    const auto img = test::random_image(rng, 13, 7, channels);
    EXPECT_EQ(decode_png(encode_png(img)), img);
  }
}

TEST(Png, EncodingIsDeterministic) {
  std::mt19937_64 rng(3);
  const auto img = test::random_image(rng, 20, 20, 3);
  EXPECT_EQ(encode_png(img), encode_png(img));
}

TEST(Png, RejectsAlphaTransparencyAndSixteenBit) {
  const std::vector<std::uint8_t> ga(2 * 2 * 2, 100);
  EXPECT_THROW(decode_png(encode_raw_png(2, 2, 8, PNG_COLOR_TYPE_GRAY_ALPHA, ga)), IoError);
  const std::vector<std::uint8_t> rgba(2 * 2 * 4, 100);
  EXPECT_THROW(decode_png(encode_raw_png(2, 2, 8, PNG_COLOR_TYPE_RGBA, rgba)), IoError);
  const std::vector<std::uint8_t> gray(2 * 2, 100);
  EXPECT_THROW(decode_png(encode_raw_png(2, 2, 8, PNG_COLOR_TYPE_GRAY, gray, true)), IoError);
  const std::vector<std::uint8_t> wide(2 * 2 * 2, 100);
  EXPECT_THROW(decode_png(encode_raw_png(2, 2, 16, PNG_COLOR_TYPE_GRAY, wide)), IoError);
}

TEST(Png, ExpandsPaletteAndLowBitGray) {
  // 1-bit palette: row bits 1,0 -> entries 1 then 0.
  const auto pal = decode_png(encode_raw_png(2, 1, 1, PNG_COLOR_TYPE_PALETTE, {0x80}));
  ASSERT_EQ(pal.channels(), 3);
  EXPECT_EQ(pal.at(0, 0, 0), 255);
  EXPECT_EQ(pal.at(0, 0, 1), 128);
  EXPECT_EQ(pal.at(0, 0, 2), 7);
  EXPECT_EQ(pal.at(1, 0, 0), 0);

  const auto g2 = decode_png(encode_raw_png(4, 1, 2, PNG_COLOR_TYPE_GRAY, {0x1B}));  // 0,1,2,3
  ASSERT_EQ(g2.channels(), 1);
  EXPECT_EQ(g2.at(0, 0, 0), 0);
  EXPECT_EQ(g2.at(1, 0, 0), 85);
  EXPECT_EQ(g2.at(2, 0, 0), 170);
  EXPECT_EQ(g2.at(3, 0, 0), 255);
}

TEST(Png, RejectsGarbageAndTruncation) {
  const std::vector<std::uint8_t> junk{'n', 'o', 'p', 'e'};
  EXPECT_THROW(decode_png(junk), IoError);
  std::mt19937_64 rng(1);
  auto bytes = encode_png(test::random_image(rng, 16, 16, 3));
  bytes.resize(bytes.size() / 2);
  EXPECT_THROW(decode_png(bytes), IoError);
}

TEST(Pnm, RoundTripsAndRescalesMaxval) {
  std::mt19937_64 rng(11);
  for (int channels : {1, 3}) {
    const auto img = test::random_image(rng, 5, 9, channels);
    EXPECT_EQ(decode_pnm(encode_pnm(img)), img);
  }
  const std::string text = "P5\n# comment\n3 1\n15\n";
  std::vector<std::uint8_t> bytes(text.begin(), text.end());
  bytes.insert(bytes.end(), {0, 15, 7});
  const auto img = decode_pnm(bytes);
  EXPECT_EQ(img.at(0, 0, 0), 0);
  EXPECT_EQ(img.at(1, 0, 0), 255);
  EXPECT_EQ(img.at(2, 0, 0), 119);
}

TEST(Pnm, RejectsBadHeaders) {
  auto bytes_of = [](const std::string& s) { return std::vector<std::uint8_t>(s.begin(), s.end()); };
  EXPECT_THROW(decode_pnm(bytes_of("P3\n1 1\n255\n0")), IoError);
  EXPECT_THROW(decode_pnm(bytes_of("P5\n1 1\n65535\n00")), IoError);
  EXPECT_THROW(decode_pnm(bytes_of("P6\n2 2\n255\nabc")), IoError);
  EXPECT_THROW(decode_pnm(bytes_of("P5\n0 1\n255\n")), IoError);
}

TEST(ImageFiles, FormatFollowsExtensionAndSignature) {
  test::TempDir dir;
  std::mt19937_64 rng(5);
  const auto img = test::random_image(rng, 4, 4, 3);
  write_image(dir / "a.png", img);
  write_image(dir / "a.ppm", img);
  EXPECT_EQ(test::slurp(dir / "a.ppm").substr(0, 2), "P6");
  EXPECT_EQ(read_image(dir / "a.png"), img);
  EXPECT_EQ(read_image(dir / "a.ppm"), img);
  EXPECT_TRUE(has_image_extension("x/y.PNG"));
  EXPECT_FALSE(has_image_extension("x/y.jpg"));
  EXPECT_THROW(write_image(dir / "a.jpg", img), InvalidArgument);
  EXPECT_THROW(read_image(dir / "missing.png"), IoError);
}

TEST(ImageBuffer, ValidatesShape) {
  EXPECT_THROW(ImageBuffer(0, 1, 1), InvalidArgument);
  EXPECT_THROW(ImageBuffer(1, 1, 2), InvalidArgument);
  EXPECT_THROW(ImageBuffer(2, 2, 1, std::vector<std::uint8_t>(3)), InvalidArgument);
  ImageBuffer img(3, 2, 3);
  img.at(2, 1, 2) = 9;
  EXPECT_EQ(img.pixels().back(), 9);
  EXPECT_EQ(img.sample_count(), 18u);
}

}  // namespace
}  // namespace nui
