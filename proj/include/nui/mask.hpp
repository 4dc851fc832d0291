#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nui/error.hpp"

namespace nui {

/// Non-uniform illumination masks. M1..M12 are the attack masks; M12Train is the
/// quadrant variant used only when building augmented training sets.
enum class MaskId : std::uint8_t {
  M1 = 1, M2, M3, M4, M5, M6, M7, M8, M9, M10, M11, M12,
  M12Train,
};

inline constexpr std::array<MaskId, 12> kAttackMasks = {
    MaskId::M1, MaskId::M2, MaskId::M3, MaskId::M4,  MaskId::M5,  MaskId::M6,
    MaskId::M7, MaskId::M8, MaskId::M9, MaskId::M10, MaskId::M11, MaskId::M12};

inline constexpr std::array<MaskId, 13> kAllMasks = {
    MaskId::M1, MaskId::M2, MaskId::M3,  MaskId::M4,  MaskId::M5,  MaskId::M6,      MaskId::M7,
    MaskId::M8, MaskId::M9, MaskId::M10, MaskId::M11, MaskId::M12, MaskId::M12Train};

/// Side of the lattice on which the mask constants (16, 144, stripe bounds) are defined.
inline constexpr int kCanonicalSize = 32;

/// "1".."12" for the attack masks, "12t" for M12Train.
inline std::string to_string(MaskId id) {
  if (id == MaskId::M12Train) return "12t";
  return std::to_string(static_cast<int>(id));
}

inline MaskId parse_mask_id(std::string_view text) {
  if (text == "12t" || text == "12T") return MaskId::M12Train;
  int value = 0;
  for (char c : text) {
    if (c < '0' || c > '9' || value > 100) throw InvalidArgument("invalid mask id '" + std::string(text) + "'");
    value = value * 10 + (c - '0');
  }
  if (text.empty() || value < 1 || value > 12)
    throw InvalidArgument("invalid mask id '" + std::string(text) + "' (expected 1..12 or 12t)");
  return static_cast<MaskId>(value);
}

/// Parses a comma-separated id list such as "1,6,12t".
inline std::vector<MaskId> parse_mask_list(std::string_view text) {
  std::vector<MaskId> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(',', start), text.size());
    out.push_back(parse_mask_id(text.substr(start, end - start)));
    start = end + 1;
  }
  return out;
}

/// Row-major grid of real mask intensities; at(x, y) is column x, row y.
class MaskField {
 public:
  MaskField(int width, int height) : MaskField(width, height, std::vector<double>(checked_area(width, height))) {}

  MaskField(int width, int height, std::vector<double> values)
      : width_(width), height_(height), values_(std::move(values)) {
    if (values_.size() != checked_area(width, height))
      throw InvalidArgument("mask value count does not match " + std::to_string(width) + "x" +
                            std::to_string(height));
    if (!std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); }))
      throw InvalidArgument("mask values must be finite");
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double at(int x, int y) const { return values_[static_cast<std::size_t>(y) * width_ + x]; }
  std::span<const double> values() const noexcept { return values_; }

  double min() const { return *std::min_element(values_.begin(), values_.end()); }
  double max() const { return *std::max_element(values_.begin(), values_.end()); }

  friend bool operator==(const MaskField&, const MaskField&) = default;

 private:
  static std::size_t checked_area(int width, int height) {
    if (width < 1 || height < 1)
      throw InvalidArgument("mask dimensions must be positive, got " + std::to_string(width) + "x" +
                            std::to_string(height));
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }

  int width_;
  int height_;
  std::vector<double> values_;
};

namespace detail {

// The four linear ramps. u and v are the lattice extent; the third term of
// mask 1 mixes y with u exactly as tabulated.
inline double ramp_mask1(double x, double y, double u, double v) {
  return ((u - x) * 30.0 / u) + ((v - y) * 30.0 / v) + ((u - y) * 20.0 / u) + ((v - y) * 20.0 / v);
}
inline double ramp_mask2(double x, double y, double u, double v) {
  return (x * 30.0 / u) + ((v - y) * 30.0 / v) + (y * 20.0 / u) + ((v - x) * 20.0 / v);
}
inline double ramp_mask3(double x, double y, double u, double v) {
  return ((u - x) * 30.0 / u) + (y * 30.0 / v) + ((u - y) * 20.0 / u) + (y * 20.0 / v);
}
inline double ramp_mask4(double x, double y, double u, double v) {
  return (x * 30.0 / u) + (y * 30.0 / v) + (x * 20.0 / u) + (y * 20.0 / v);
}

inline double center_product(double x, double y) { return std::abs(16.0 - x) * std::abs(16.0 - y); }

// Inclusive bands 0-5, 10-15, 20-25, 30-32.
inline bool in_bright_band(int t) {
  return (0 <= t && t <= 5) || (10 <= t && t <= 15) || (20 <= t && t <= 25) || (30 <= t && t <= 32);
}

}  // namespace detail

/// Mask intensity a(x, y) on the canonical lattice, x, y in [0, 32).
inline double canonical_value(MaskId id, int x, int y) {
  constexpr double u = kCanonicalSize;
  constexpr double v = kCanonicalSize;
  const double fx = x;
  const double fy = y;
  using namespace detail;
  switch (id) {
    case MaskId::M1: return ramp_mask1(fx, fy, u, v);
    case MaskId::M2: return ramp_mask2(fx, fy, u, v);
    case MaskId::M3: return ramp_mask3(fx, fy, u, v);
    case MaskId::M4: return ramp_mask4(fx, fy, u, v);
    case MaskId::M5: return center_product(fx, fy);
    case MaskId::M6: return 144.0 - center_product(fx, fy);
    case MaskId::M7: return 100.0 - center_product(fx, fy);
    case MaskId::M8: return 50.0 - center_product(fx, fy);
    case MaskId::M9:
      return in_bright_band(y) ? ramp_mask1(fx, fy, u, v) : -ramp_mask2(fx, fy, u, v);
    case MaskId::M10:
      return in_bright_band(x) ? ramp_mask1(fx, fy, u, v) : -ramp_mask2(fx, fy, u, v);
    case MaskId::M11:
      if (x <= 16 && y <= 16) return ramp_mask1(fx, fy, u, v);
      if (x <= 16) return ramp_mask2(fx, fy, u, v);
      if (y <= 16) return ramp_mask3(fx, fy, u, v);
      return ramp_mask4(fx, fy, u, v);
    case MaskId::M12:
      if (x <= 16 && y <= 16) return ramp_mask1(fx, fy, u, v);
      if (x <= 16) return ramp_mask2(fx, fy, u, v);
      if (y <= 16) return -ramp_mask3(fx, fy, u, v);
      return -ramp_mask4(fx, fy, u, v);
    case MaskId::M12Train:
      if (x <= 16 && y <= 16) return ramp_mask1(fx, fy, u, v);
      if (x <= 16) return -ramp_mask2(fx, fy, u, v);
      if (y <= 16) return ramp_mask3(fx, fy, u, v);
      return -ramp_mask4(fx, fy, u, v);
  }
  throw InvalidArgument("unknown mask id " + std::to_string(static_cast<int>(id)));
}

/// Bilinear resampling with pixel-centre alignment. Source coordinates are clamped to
/// the grid, so resampling to the same size reproduces the input exactly.
inline MaskField resample_bilinear(const MaskField& src, int width, int height) {
  if (width < 1 || height < 1)
    throw InvalidArgument("resample target must be positive, got " + std::to_string(width) + "x" +
                          std::to_string(height));

  auto source_coord = [](int dst, int dst_extent, int src_extent) {
    const double s = (dst + 0.5) * src_extent / dst_extent - 0.5;
    return std::clamp(s, 0.0, static_cast<double>(src_extent - 1));
  };

  std::vector<double> out(static_cast<std::size_t>(width) * height);
  for (int y = 0; y < height; ++y) {
    const double sy = source_coord(y, height, src.height());
    const int y0 = static_cast<int>(sy);
    const int y1 = std::min(y0 + 1, src.height() - 1);
    const double wy = sy - y0;
    for (int x = 0; x < width; ++x) {
      const double sx = source_coord(x, width, src.width());
      const int x0 = static_cast<int>(sx);
      const int x1 = std::min(x0 + 1, src.width() - 1);
      const double wx = sx - x0;
      const double top = src.at(x0, y0) * (1.0 - wx) + src.at(x1, y0) * wx;
      const double bottom = src.at(x0, y1) * (1.0 - wx) + src.at(x1, y1) * wx;
      out[static_cast<std::size_t>(y) * width + x] = top * (1.0 - wy) + bottom * wy;
    }
  }
  return MaskField(width, height, std::move(out));
}

/// Generates the mask on the canonical 32x32 lattice, then resamples it to
/// width x height when a different size is requested.
inline MaskField generate_mask(MaskId id, int width = kCanonicalSize, int height = kCanonicalSize) {
  if (width < 1 || height < 1)
    throw InvalidArgument("mask dimensions must be positive, got " + std::to_string(width) + "x" +
                          std::to_string(height));
  std::vector<double> values(kCanonicalSize * kCanonicalSize);
  for (int y = 0; y < kCanonicalSize; ++y)
    for (int x = 0; x < kCanonicalSize; ++x) values[y * kCanonicalSize + x] = canonical_value(id, x, y);
  MaskField canonical(kCanonicalSize, kCanonicalSize, std::move(values));
  return resample_bilinear(canonical, width, height);
}

/// A mask scaled by weight k. k = 0 is the unattacked case.
struct WeightedMask {
  MaskField base;
  double k = 0.0;

  int width() const noexcept { return base.width(); }
  int height() const noexcept { return base.height(); }
  double at(int x, int y) const { return k * base.at(x, y); }

  MaskField field() const {
    std::vector<double> scaled(base.values().begin(), base.values().end());
    for (auto& v : scaled) v *= k;
    return MaskField(base.width(), base.height(), std::move(scaled));
  }
};

inline WeightedMask weight_mask(MaskField mask, double k) {
  if (!std::isfinite(k)) throw InvalidArgument("mask weight must be finite");
  return WeightedMask{std::move(mask), k};
}

namespace detail {
inline std::vector<double> fifths(int lo, int hi, bool skip_zero) {
  std::vector<double> out;
  for (int i = lo; i <= hi; ++i)
    if (!(skip_zero && i == 0)) out.push_back(i / 5.0);
  return out;
}
}  // namespace detail

/// The 23 attack weights -2.2, -2.0, ..., 2.2.
inline std::vector<double> standard_weight_grid() { return detail::fifths(-11, 11, false); }

/// The 12 defence-time weights -1.2..1.2 in steps of 0.2, without 0.
inline std::vector<double> training_weight_grid() { return detail::fifths(-6, 6, true); }

}  // namespace nui
