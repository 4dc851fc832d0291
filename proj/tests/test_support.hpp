#pragma once

#include <stdlib.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "nui/image.hpp"
#include "nui/image_io.hpp"

namespace nui::test {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    auto pattern = (fs::temp_directory_path() / "nui-test-XXXXXX").string();
    if (!mkdtemp(pattern.data())) throw std::runtime_error("mkdtemp failed");
    path_ = pattern;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

inline ImageBuffer random_image(std::mt19937_64& rng, int width, int height, int channels) {
  std::vector<std::uint8_t> px(static_cast<std::size_t>(width) * height * channels);
  for (auto& p : px) p = static_cast<std::uint8_t>(rng() & 0xFF);
  return ImageBuffer(width, height, channels, std::move(px));
}

inline ImageBuffer constant_image(int width, int height, int channels, std::uint8_t value) {
  return ImageBuffer(width, height, channels,
                     std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height * channels, value));
}

// root/<class>/img<i>.png for each class, `per_class` random images each.
inline void write_folder_dataset(const fs::path& root, const std::vector<std::string>& classes, int per_class,
                                 std::uint64_t seed = 1, int size = 8) {
  std::mt19937_64 rng(seed);
  for (const auto& c : classes) {
    fs::create_directories(root / c);
    for (int i = 0; i < per_class; ++i)
      write_image(root / c / ("img" + std::to_string(i) + ".png"), random_image(rng, size, size, 3));
  }
}

// Three classes (dark, mid, bright) whose base intensities are spread evenly across
// thirds of [0, 255], plus +-3 uniform noise. Matches the stub centroids 42.5, 127.5, 212.5.
inline void write_intensity_dataset(const fs::path& root, int per_class, std::uint64_t seed = 1, int size = 32) {
  const char* names[] = {"dark", "mid", "bright"};
  std::mt19937_64 rng(seed);
  for (int c = 0; c < 3; ++c) {
    fs::create_directories(root / names[c]);
    for (int i = 0; i < per_class; ++i) {
      const double base = 85.0 * c + (i + 0.5) * 85.0 / per_class;
      std::vector<std::uint8_t> px(static_cast<std::size_t>(size) * size);
      for (auto& p : px) {
        const double v = base + static_cast<double>(rng() % 7) - 3.0;
        p = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
      }
      write_image(root / names[c] / ("img" + std::to_string(i) + ".png"), ImageBuffer(size, size, 1, std::move(px)));
    }
  }
}

inline std::string intensity_stub_command() {
  return std::string(NUI_STUB_CLASSIFIER) +
         " --mode mean-intensity --centroids 42.5,127.5,212.5 --labels dark,mid,bright --in {input_dir} --out "
         "{output_csv}";
}

inline std::string slurp(const fs::path& path) {
  const auto bytes = read_file(path);
  return std::string(bytes.begin(), bytes.end());
}

inline std::string stub_classifier() { return NUI_STUB_CLASSIFIER; }
inline std::string cli_binary() { return NUI_CLI_BINARY; }

}  // namespace nui::test
