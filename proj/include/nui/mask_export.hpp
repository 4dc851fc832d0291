#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "nui/detail/format.hpp"
#include "nui/image.hpp"
#include "nui/image_io.hpp"
#include "nui/mask.hpp"

namespace nui {

enum class MaskExportFormat { csv, image };

/// Min-max normalises the field to 0..255 grayscale. A constant field maps to 0.
inline ImageBuffer mask_to_image(const MaskField& mask) {
  const double lo = mask.min();
  const double span = mask.max() - lo;
  std::vector<std::uint8_t> pixels(mask.values().size(), 0);
  if (span > 0.0) {
    for (std::size_t i = 0; i < pixels.size(); ++i)
      pixels[i] = static_cast<std::uint8_t>(std::lround((mask.values()[i] - lo) / span * 255.0));
  }
  return ImageBuffer(mask.width(), mask.height(), 1, std::move(pixels));
}

/// One line per row y, comma-separated, shortest round-trip decimal text.
inline std::string mask_to_csv(const MaskField& mask) {
  std::string out;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (x) out.push_back(',');
      out += detail::shortest(mask.at(x, y));
    }
    out.push_back('\n');
  }
  return out;
}

/// csv writes mask_to_csv; image writes an 8-bit grayscale PNG.
inline void export_mask(const MaskField& mask, MaskExportFormat format, std::ostream& sink) {
  if (format == MaskExportFormat::csv) {
    const auto text = mask_to_csv(mask);
    sink.write(text.data(), static_cast<std::streamsize>(text.size()));
  } else {
    const auto bytes = encode_png(mask_to_image(mask));
    sink.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  sink.flush();
  if (!sink) throw IoError("failed to write mask export");
}

}  // namespace nui
