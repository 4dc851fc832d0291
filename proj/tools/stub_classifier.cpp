// Deterministic stand-in classifiers for exercising the adapter protocol.
//
//   mean-intensity  nearest centroid of the image's mean sample value
//   truth           echoes the parent directory name (folder-per-class inputs)
//   constant        always predicts --label
//
// Writes "path,label" rows, paths relative to --in, sorted.

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include "nui/detail/csv.hpp"
#include "nui/image_io.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"Stub classifier"};
  std::string mode, in_dir, out_csv, constant_label;
  std::vector<double> centroids;
  std::vector<std::string> labels;
  app.add_option("--mode", mode)->required()->check(CLI::IsMember({"mean-intensity", "truth", "constant"}));
  app.add_option("--in", in_dir)->required()->check(CLI::ExistingDirectory);
  app.add_option("--out", out_csv)->required();
  app.add_option("--centroids", centroids)->delimiter(',');
  app.add_option("--labels", labels)->delimiter(',');
  app.add_option("--label", constant_label);
  CLI11_PARSE(app, argc, argv);

  if (mode == "mean-intensity" && (centroids.empty() || centroids.size() != labels.size())) {
    std::cerr << "stub: --centroids and --labels must have the same nonzero length\n";
    return 2;
  }
  if (mode == "constant" && constant_label.empty()) {
    std::cerr << "stub: constant mode needs --label\n";
    return 2;
  }

  std::vector<fs::path> images;
  for (const auto& entry : fs::recursive_directory_iterator(in_dir))
    if (entry.is_regular_file() && nui::has_image_extension(entry.path()))
      images.push_back(entry.path().lexically_relative(in_dir));
  std::sort(images.begin(), images.end(),
            [](const auto& a, const auto& b) { return a.generic_string() < b.generic_string(); });

  std::string text = "path,label\n";
  try {
    for (const auto& rel : images) {
      std::string label;
      if (mode == "truth") {
        label = rel.parent_path().filename().string();
      } else if (mode == "constant") {
        label = constant_label;
      } else {
        const auto image = nui::read_image(fs::path(in_dir) / rel);
        const auto px = image.pixels();
        const double mean = std::accumulate(px.begin(), px.end(), 0.0) / static_cast<double>(px.size());
        std::size_t best = 0;
        for (std::size_t c = 1; c < centroids.size(); ++c)
          if (std::abs(mean - centroids[c]) < std::abs(mean - centroids[best])) best = c;
        label = labels[best];
      }
      text += nui::detail::csv_field(rel.generic_string()) + "," + nui::detail::csv_field(label) + "\n";
    }
    nui::write_text_file(out_csv, text);
  } catch (const std::exception& e) {
    std::cerr << "stub: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
