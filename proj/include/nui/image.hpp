#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nui/error.hpp"

namespace nui {

/// 8-bit image, row-major with interleaved channels. 1 channel is grayscale, 3 is RGB.
class ImageBuffer {
 public:
  ImageBuffer(int width, int height, int channels)
      : ImageBuffer(width, height, channels, std::vector<std::uint8_t>(checked_size(width, height, channels))) {}

  ImageBuffer(int width, int height, int channels, std::vector<std::uint8_t> pixels)
      : width_(width), height_(height), channels_(channels), pixels_(std::move(pixels)) {
    if (pixels_.size() != checked_size(width, height, channels))
      throw InvalidArgument("pixel buffer holds " + std::to_string(pixels_.size()) + " samples, expected " +
                            std::to_string(checked_size(width, height, channels)));
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t sample_count() const noexcept { return pixels_.size(); }

  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
  std::span<std::uint8_t> pixels() noexcept { return pixels_; }

  std::uint8_t at(int x, int y, int c) const { return pixels_[index(x, y, c)]; }
  std::uint8_t& at(int x, int y, int c) { return pixels_[index(x, y, c)]; }

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  static std::size_t checked_size(int width, int height, int channels) {
    if (width < 1 || height < 1)
      throw InvalidArgument("image dimensions must be positive, got " + std::to_string(width) + "x" +
                            std::to_string(height));
    if (channels != 1 && channels != 3)
      throw InvalidArgument("images must have 1 or 3 channels, got " + std::to_string(channels));
    return static_cast<std::size_t>(width) * height * channels;
  }

  int width_;
  int height_;
  int channels_;
  std::vector<std::uint8_t> pixels_;
};

}  // namespace nui
