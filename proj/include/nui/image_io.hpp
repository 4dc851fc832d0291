#pragma once

#include <png.h>

#include <cctype>
#include <csetjmp>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nui/error.hpp"
#include "nui/image.hpp"

namespace nui {

enum class ImageFormat { png, pnm };

/// .png -> png, .ppm/.pgm/.pnm -> pnm (binary P6/P5).
inline ImageFormat format_from_extension(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".png") return ImageFormat::png;
  if (ext == ".ppm" || ext == ".pgm" || ext == ".pnm") return ImageFormat::pnm;
  throw InvalidArgument("unsupported image extension '" + ext + "' for " + path.string());
}

inline bool has_image_extension(const std::filesystem::path& path) {
  try {
    format_from_extension(path);
    return true;
  } catch (const InvalidArgument&) {
    return false;
  }
}

namespace detail {

struct PngState {
  std::string error;
  std::span<const std::uint8_t> input;
  std::size_t offset = 0;
  std::vector<std::uint8_t>* output = nullptr;
};

inline void png_on_error(png_structp png, png_const_charp message) {
  static_cast<PngState*>(png_get_error_ptr(png))->error = message;
  png_longjmp(png, 1);
}

inline void png_on_warning(png_structp, png_const_charp) {}

inline void png_read_bytes(png_structp png, png_bytep out, png_size_t length) {
  auto* state = static_cast<PngState*>(png_get_io_ptr(png));
  if (state->input.size() - state->offset < length) png_error(png, "truncated PNG stream");
  std::memcpy(out, state->input.data() + state->offset, length);
  state->offset += length;
}

inline void png_write_bytes(png_structp png, png_bytep data, png_size_t length) {
  auto* state = static_cast<PngState*>(png_get_io_ptr(png));
  state->output->insert(state->output->end(), data, data + length);
}

inline void png_flush_noop(png_structp) {}

}  // namespace detail

/// Decodes an 8-bit grayscale, RGB or palette PNG. Alpha (including tRNS) and 16-bit
/// samples are rejected.
inline ImageBuffer decode_png(std::span<const std::uint8_t> bytes, const std::string& source = "<memory>") {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) throw IoError(source + ": not a PNG file");

  detail::PngState state;
  state.input = bytes;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &state, detail::png_on_error,
                                           detail::png_on_warning);
  if (!png) throw IoError(source + ": cannot allocate PNG decoder");
  png_infop info = png_create_info_struct(png);
  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> rows;
  const char* volatile rejection = nullptr;
  png_uint_32 width = 0, height = 0;
  volatile int channels = 0;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(source + ": " + state.error);
  }
  if (!info) png_error(png, "cannot allocate PNG info");
  png_set_read_fn(png, &state, detail::png_read_bytes);
  png_read_info(png, info);

  int bit_depth = 0, color_type = 0;
  png_get_IHDR(png, info, &width, &height, &bit_depth, &color_type, nullptr, nullptr, nullptr);
  if (bit_depth == 16) {
    rejection = "16-bit PNG samples are not supported";
  } else if (color_type & PNG_COLOR_MASK_ALPHA) {
    rejection = "PNG has an alpha channel; only grayscale or RGB images are accepted";
  } else if (png_get_valid(png, info, PNG_INFO_tRNS)) {
    rejection = "PNG has transparency (tRNS); only opaque grayscale or RGB images are accepted";
  }

  if (!rejection) {
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    png_set_interlace_handling(png);
    png_read_update_info(png, info);
    channels = png_get_channels(png, info);
    if (png_get_rowbytes(png, info) != static_cast<png_size_t>(width) * channels)
      png_error(png, "unexpected decoded row layout");
    pixels.resize(static_cast<std::size_t>(width) * height * channels);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = pixels.data() + static_cast<std::size_t>(y) * width * channels;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (rejection) throw IoError(source + ": " + rejection);
  return ImageBuffer(static_cast<int>(width), static_cast<int>(height), channels, std::move(pixels));
}

/// Encodes with fixed libpng settings, so equal images always produce equal bytes.
inline std::vector<std::uint8_t> encode_png(const ImageBuffer& image) {
  std::vector<std::uint8_t> out;
  detail::PngState state;
  state.output = &out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &state, detail::png_on_error,
                                            detail::png_on_warning);
  if (!png) throw IoError("cannot allocate PNG encoder");
  png_infop info = png_create_info_struct(png);
  std::vector<png_bytep> rows(image.height());
  auto* base = const_cast<std::uint8_t*>(image.pixels().data());
  for (int y = 0; y < image.height(); ++y)
    rows[y] = base + static_cast<std::size_t>(y) * image.width() * image.channels();

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG encoding failed: " + state.error);
  }
  if (!info) png_error(png, "cannot allocate PNG info");
  png_set_write_fn(png, &state, detail::png_write_bytes, detail::png_flush_noop);
  png_set_IHDR(png, info, image.width(), image.height(), 8,
               image.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

/// Binary PGM (P5) / PPM (P6) with maxval <= 255; samples are rescaled to 0..255.
inline ImageBuffer decode_pnm(std::span<const std::uint8_t> bytes, const std::string& source = "<memory>") {
  std::size_t pos = 0;
  auto fail = [&](const std::string& why) -> IoError { return IoError(source + ": " + why); };
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_uint = [&]() -> long {
    skip_space();
    long value = 0;
    const auto start = pos;
    while (pos < bytes.size() && std::isdigit(bytes[pos]) && value < 1'000'000) value = value * 10 + (bytes[pos++] - '0');
    if (pos == start) throw fail("malformed PNM header");
    return value;
  };

  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
    throw fail("not a binary PGM/PPM file");
  const int channels = bytes[1] == '6' ? 3 : 1;
  pos = 2;
  const long width = read_uint();
  const long height = read_uint();
  const long maxval = read_uint();
  if (width < 1 || height < 1) throw fail("PNM dimensions must be positive");
  if (maxval < 1 || maxval > 255) throw fail("PNM maxval must be in 1..255 (8-bit only)");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw fail("malformed PNM header");
  ++pos;
  const auto count = static_cast<std::size_t>(width) * height * channels;
  if (bytes.size() - pos < count) throw fail("truncated PNM data");
  std::vector<std::uint8_t> pixels(bytes.begin() + pos, bytes.begin() + pos + count);
  if (maxval != 255)
    for (auto& p : pixels) p = static_cast<std::uint8_t>((std::min<long>(p, maxval) * 255 + maxval / 2) / maxval);
  return ImageBuffer(static_cast<int>(width), static_cast<int>(height), channels, std::move(pixels));
}

inline std::vector<std::uint8_t> encode_pnm(const ImageBuffer& image) {
  const std::string header = std::string(image.channels() == 3 ? "P6" : "P5") + "\n" +
                             std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.pixels().begin(), image.pixels().end());
  return out;
}

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error reading " + path.string());
  return bytes;
}

inline void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("error writing " + path.string());
}

inline void write_text_file(const std::filesystem::path& path, std::string_view text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

/// Decodes by content signature (PNG or binary PNM), independent of the extension.
inline ImageBuffer decode_image(std::span<const std::uint8_t> bytes, const std::string& source = "<memory>") {
  if (bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0) return decode_png(bytes, source);
  if (bytes.size() >= 2 && bytes[0] == 'P') return decode_pnm(bytes, source);
  throw IoError(source + ": unrecognised image format (expected PNG or binary PPM/PGM)");
}

inline ImageBuffer read_image(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return decode_image(bytes, path.string());
}

inline std::vector<std::uint8_t> encode_image(const ImageBuffer& image, ImageFormat format) {
  return format == ImageFormat::png ? encode_png(image) : encode_pnm(image);
}

inline void write_image(const std::filesystem::path& path, const ImageBuffer& image) {
  write_file(path, encode_image(image, format_from_extension(path)));
}

}  // namespace nui
