#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include "nui/error.hpp"
#include "nui/image.hpp"
#include "nui/mask.hpp"

namespace nui {

/// Nonempty subset of {R, G, B}. For grayscale images every subset selects the
/// single channel.
class ChannelSubset {
 public:
  static constexpr std::uint8_t kR = 1, kG = 2, kB = 4;

  constexpr ChannelSubset() = default;  // all channels

  static ChannelSubset all() { return ChannelSubset(); }

  static ChannelSubset from_bits(std::uint8_t bits) {
    if (bits == 0 || bits > 7) throw InvalidArgument("channel subset must be a nonempty subset of R,G,B");
    ChannelSubset s;
    s.bits_ = bits;
    return s;
  }

  /// Accepts "R,G,B" style lists or compact "RG"; case-insensitive; no duplicates.
  static ChannelSubset parse(std::string_view text) {
    std::uint8_t bits = 0;
    for (char c : text) {
      std::uint8_t bit = 0;
      switch (c) {
        case 'R': case 'r': bit = kR; break;
        case 'G': case 'g': bit = kG; break;
        case 'B': case 'b': bit = kB; break;
        case ',': case ' ': continue;
        default: throw InvalidArgument("invalid channel '" + std::string(1, c) + "' in '" + std::string(text) + "'");
      }
      if (bits & bit) throw InvalidArgument("duplicate channel in '" + std::string(text) + "'");
      bits |= bit;
    }
    return from_bits(bits);
  }

  bool selects(int channel, int channel_count) const {
    if (channel_count == 1) return true;
    return (bits_ >> channel) & 1u;
  }

  bool is_all() const noexcept { return bits_ == 7; }
  std::uint8_t bits() const noexcept { return bits_; }

  std::string to_string() const {
    std::string s;
    if (bits_ & kR) s += 'R';
    if (bits_ & kG) s += 'G';
    if (bits_ & kB) s += 'B';
    return s;
  }

  friend bool operator==(const ChannelSubset&, const ChannelSubset&) = default;

 private:
  std::uint8_t bits_ = 7;
};

/// One perturbation: mask, weight and the channels it touches.
struct AttackSpec {
  MaskId mask = MaskId::M1;
  double k = 0.0;
  ChannelSubset channels;

  void validate() const {
    if (!std::isfinite(k)) throw InvalidArgument("attack weight k must be finite");
    if (static_cast<int>(mask) < 1 || static_cast<int>(mask) > static_cast<int>(MaskId::M12Train))
      throw InvalidArgument("attack spec has an unknown mask id");
  }

  bool is_identity() const noexcept { return k == 0.0; }
};

/// Nearest integer (halves away from zero), then clamped to [0, 255].
inline std::uint8_t clamp_round(double value) {
  if (!(value > 0.0)) return 0;  // also maps NaN to 0
  if (value >= 255.0) return 255;
  return static_cast<std::uint8_t>(std::round(value));
}

/// Adds the weighted mask to the selected channels. The mask must already match the
/// image dimensions.
inline ImageBuffer apply_weighted_mask(const ImageBuffer& image, const WeightedMask& mask, ChannelSubset channels) {
  if (mask.width() != image.width() || mask.height() != image.height())
    throw std::logic_error("mask is " + std::to_string(mask.width()) + "x" + std::to_string(mask.height()) +
                           " but image is " + std::to_string(image.width()) + "x" + std::to_string(image.height()));
  ImageBuffer out = image;
  if (mask.k == 0.0) return out;
  const int nc = image.channels();
  std::array<bool, 3> selected{};
  for (int c = 0; c < nc; ++c) selected[c] = channels.selects(c, nc);

  auto dst = out.pixels();
  const auto src = image.pixels();
  std::size_t i = 0;
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const double delta = mask.at(x, y);
      for (int c = 0; c < nc; ++c, ++i)
        if (selected[c]) dst[i] = clamp_round(static_cast<double>(src[i]) + delta);
    }
  }
  return out;
}

/// Generates the mask at the image size, weights it by k and adds it.
inline ImageBuffer apply_attack(const ImageBuffer& image, const AttackSpec& spec) {
  spec.validate();
  if (spec.is_identity()) return image;
  auto mask = weight_mask(generate_mask(spec.mask, image.width(), image.height()), spec.k);
  return apply_weighted_mask(image, mask, spec.channels);
}

/// Counts of each intensity value, all channels pooled.
inline std::array<std::uint64_t, 256> histogram(const ImageBuffer& image) {
  std::array<std::uint64_t, 256> bins{};
  for (auto v : image.pixels()) ++bins[v];
  return bins;
}

}  // namespace nui
