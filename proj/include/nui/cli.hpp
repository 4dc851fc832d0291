#pragma once

#include <stdlib.h>

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nui/attack.hpp"
#include "nui/dataset.hpp"
#include "nui/detail/format.hpp"
#include "nui/error.hpp"
#include "nui/harness.hpp"
#include "nui/image_io.hpp"
#include "nui/mask.hpp"
#include "nui/mask_export.hpp"

namespace nui::cli {

/// Bad flag values found after parsing. Exit status 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// "WxH" with positive integers.
inline std::pair<int, int> parse_size(const std::string& text) {
  const auto x = text.find_first_of("xX");
  if (x == std::string::npos) throw UsageError("--size must look like WxH, got '" + text + "'");
  auto w = detail::parse_int<int>(text.substr(0, x));
  auto h = detail::parse_int<int>(text.substr(x + 1));
  if (!w || !h || *w < 1 || *h < 1) throw UsageError("--size must have positive integer sides, got '" + text + "'");
  return {*w, *h};
}

/// "standard", "training" or a comma-separated list of reals.
inline std::vector<double> parse_weights(const std::string& text) {
  if (text == "standard") return standard_weight_grid();
  if (text == "training") return training_weight_grid();
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto v = detail::parse_double(detail::trim(item));
    if (!v || !std::isfinite(*v)) throw UsageError("invalid k value '" + item + "' in '" + text + "'");
    out.push_back(*v);
  }
  if (out.empty()) throw UsageError("empty k list");
  return out;
}

template <typename F>
auto as_usage(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
}

namespace internal {

// Every image under root; the label is the parent directory name, "unlabeled" at the top level.
inline LabeledDataset scan_images(const fs::path& root) {
  std::vector<LabeledItem> items;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file() || !has_image_extension(entry.path())) continue;
    const auto rel = entry.path().lexically_relative(root);
    items.push_back({rel, rel.has_parent_path() ? entry.path().parent_path().filename().string() : "unlabeled"});
  }
  if (items.empty()) throw InvalidArgument("no images found under " + root.string());
  std::sort(items.begin(), items.end(),
            [](const auto& a, const auto& b) { return a.path.generic_string() < b.path.generic_string(); });
  return LabeledDataset::from_items(root, std::move(items));
}

inline fs::path make_temp_dir(const std::string& prefix) {
  auto pattern = (fs::temp_directory_path() / (prefix + "XXXXXX")).string();
  if (!mkdtemp(pattern.data())) throw IoError("cannot create a temporary directory");
  return pattern;
}

inline void write_output(const std::optional<std::string>& path, std::string_view text, std::ostream& out) {
  if (path)
    write_text_file(*path, text);
  else
    out << text;
}

}  // namespace internal

/// Runs the command line. Machine output goes to files or `out`; diagnostics to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Non-uniform illumination attacks: masks, attacks, augmentation and robustness sweeps", "nui"};
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 0;
  unsigned jobs = 1;
  bool verbose = false;
  app.add_option("--seed", seed, "Seed for sampling")->envname("NUI_SEED");
  app.add_option("--jobs", jobs, "Parallel workers")->check(CLI::PositiveNumber);
  app.add_flag("--verbose", verbose, "Progress messages on standard error");

  // mask
  auto* mask_cmd = app.add_subcommand("mask", "Export a mask field as CSV or grayscale PNG");
  std::string mask_id, mask_size = "32x32", mask_format;
  std::optional<std::string> mask_out;
  mask_cmd->add_option("--id", mask_id, "Mask id 1..12 or 12t")->required();
  mask_cmd->add_option("--size", mask_size, "WxH (default 32x32)");
  mask_cmd->add_option("--out", mask_out, "Output file (default: standard output)");
  mask_cmd->add_option("--format", mask_format, "csv or png (default: from --out extension, else csv)")
      ->check(CLI::IsMember({"csv", "png"}));

  // attack
  auto* attack_cmd = app.add_subcommand("attack", "Attack one image or every image under a directory");
  std::string attack_in, attack_mask, attack_channels = "R,G,B", attack_out;
  double attack_k = 0.0;
  attack_cmd->add_option("--in", attack_in, "Input image or directory")->required();
  attack_cmd->add_option("--mask", attack_mask, "Mask id 1..12")->required();
  attack_cmd->add_option("--k", attack_k, "Mask weight")->required();
  attack_cmd->add_option("--channels", attack_channels, "Channel subset, e.g. R,B (default all)");
  attack_cmd->add_option("--out", attack_out, "Output image or directory")->required();

  // augment
  auto* augment_cmd = app.add_subcommand("augment", "Build an augmented training set");
  std::string augment_in, augment_layout = "folder", augment_out, augment_masks, augment_ks = "training";
  double augment_fraction = 0.8;
  augment_cmd->add_option("--in", augment_in, "Dataset root")->required();
  augment_cmd->add_option("--layout", augment_layout, "folder or csv")->check(CLI::IsMember({"folder", "csv"}));
  augment_cmd->add_option("--fraction", augment_fraction, "Fraction of images to perturb (default 0.8)");
  augment_cmd->add_option("--out", augment_out, "Output directory")->required();
  augment_cmd->add_option("--masks", augment_masks, "Mask ids (default 1,2,3,4,5,8,9,10,11,12t)");
  augment_cmd->add_option("--ks", augment_ks, "k list, 'training' (default) or 'standard'");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate a classifier over a (mask, k) grid");
  std::string sweep_in, sweep_layout = "folder", sweep_adapter, sweep_out, sweep_masks, sweep_ks = "standard";
  sweep_cmd->add_option("--in", sweep_in, "Test dataset root")->required();
  sweep_cmd->add_option("--layout", sweep_layout, "folder or csv")->check(CLI::IsMember({"folder", "csv"}));
  sweep_cmd->add_option("--adapter", sweep_adapter, "Classifier command with {input_dir} and {output_csv}")
      ->required();
  sweep_cmd->add_option("--out", sweep_out, "Report CSV")->required();
  sweep_cmd->add_option("--masks", sweep_masks, "Mask ids (default 1..12)");
  sweep_cmd->add_option("--ks", sweep_ks, "k list, 'standard' (default) or 'training'");

  // hist
  auto* hist_cmd = app.add_subcommand("hist", "256-bin intensity histogram of an image");
  std::string hist_in;
  std::optional<std::string> hist_out;
  hist_cmd->add_option("--in", hist_in, "Input image")->required();
  hist_cmd->add_option("--out", hist_out, "Output CSV (default: standard output)");

  // compare
  auto* compare_cmd = app.add_subcommand("compare", "Percentage increase from an attacked to a defended report");
  std::string compare_attacked, compare_defended, compare_out;
  compare_cmd->add_option("--attacked", compare_attacked, "Report of the undefended model")->required();
  compare_cmd->add_option("--defended", compare_defended, "Report of the defended model")->required();
  compare_cmd->add_option("--out", compare_out, "Comparison CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  auto log = [&](const std::string& message) {
    if (verbose) err << "nui: " << message << "\n";
  };

  try {
    if (*mask_cmd) {
      const auto id = as_usage([&] { return parse_mask_id(mask_id); });
      const auto [w, h] = parse_size(mask_size);
      auto format = MaskExportFormat::csv;
      if (mask_format == "png" ||
          (mask_format.empty() && mask_out && fs::path(*mask_out).extension() == ".png"))
        format = MaskExportFormat::image;
      const auto field = generate_mask(id, w, h);
      std::ostringstream buffer;
      export_mask(field, format, buffer);
      internal::write_output(mask_out, buffer.str(), out);
      return kExitOk;
    }

    if (*attack_cmd) {
      AttackSpec spec;
      spec.mask = as_usage([&] { return parse_mask_id(attack_mask); });
      if (spec.mask == MaskId::M12Train) throw UsageError("mask 12t is training-only; use augment");
      spec.k = attack_k;
      spec.channels = as_usage([&] { return ChannelSubset::parse(attack_channels); });
      as_usage([&] { spec.validate(); });

      if (fs::is_directory(attack_in)) {
        const auto data = internal::scan_images(attack_in);
        const auto result = attack_dataset(data, spec, attack_out, jobs, seed);
        for (const auto& e : result.errors) err << "nui: skipped " << e.path.string() << ": " << e.message << "\n";
        log("attacked " + std::to_string(result.dataset.items.size()) + " images into " + attack_out);
        return result.errors.empty() ? kExitOk : kExitRuntime;
      }
      const auto out_format = as_usage([&] { return format_from_extension(attack_out); });
      const auto bytes = read_file(attack_in);
      const auto image = decode_image(bytes, attack_in);
      const bool same_format =
          (out_format == ImageFormat::png) == (bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0);
      if (spec.is_identity() && same_format)
        write_file(attack_out, bytes);
      else
        write_file(attack_out, encode_image(apply_attack(image, spec), out_format));
      return kExitOk;
    }

    if (*augment_cmd) {
      AugmentationPolicy policy;
      policy.perturbed_fraction = augment_fraction;
      if (!augment_masks.empty()) policy.allowed_masks = as_usage([&] { return parse_mask_list(augment_masks); });
      policy.allowed_k = parse_weights(augment_ks);
      policy.seed = seed;
      as_usage([&] { policy.validate(); });
      const auto layout = parse_layout(augment_layout);
      const auto data = load_dataset(augment_in, layout);
      const auto result = augment_dataset(data, policy, augment_out, jobs);
      for (const auto& e : result.errors) err << "nui: skipped " << e.path.string() << ": " << e.message << "\n";
      log("wrote " + std::to_string(result.dataset.items.size()) + " images to " + augment_out);
      return result.errors.empty() ? kExitOk : kExitRuntime;
    }

    if (*sweep_cmd) {
      std::vector<MaskId> masks(kAttackMasks.begin(), kAttackMasks.end());
      if (!sweep_masks.empty()) masks = as_usage([&] { return normalise_masks(parse_mask_list(sweep_masks)); });
      const auto ks = parse_weights(sweep_ks);
      const ClassifierAdapter adapter{sweep_adapter};
      as_usage([&] { adapter.validate(); });
      const auto data = load_dataset(sweep_in, parse_layout(sweep_layout));
      const auto workspace = internal::make_temp_dir("nui-sweep-");
      log("workspace " + workspace.string());
      try {
        const auto report = sweep(data, masks, ks, adapter, workspace, jobs);
        write_text_file(sweep_out, report.to_csv());
        if (report.missing_predictions)
          err << "nui: warning: " << report.missing_predictions
              << " image evaluations had no prediction and were counted as misclassified\n";
        fs::remove_all(workspace);
        log("wrote " + std::to_string(report.rows.size()) + " rows to " + sweep_out);
        return kExitOk;
      } catch (const SweepError& e) {
        write_text_file(sweep_out, e.partial().to_csv());
        err << "nui: sweep aborted: " << e.what() << "\n";
        if (!e.diagnostics().empty()) err << e.diagnostics() << (e.diagnostics().ends_with('\n') ? "" : "\n");
        err << "nui: workspace kept at " << workspace.string() << "\n";
        return kExitRuntime;
      }
    }

    if (*hist_cmd) {
      const auto bins = histogram(read_image(hist_in));
      std::string text = "value,count\n";
      for (std::size_t v = 0; v < bins.size(); ++v) text += std::to_string(v) + "," + std::to_string(bins[v]) + "\n";
      internal::write_output(hist_out, text, out);
      return kExitOk;
    }

    if (*compare_cmd) {
      const auto attacked = ReportTable::read(compare_attacked);
      const auto defended = ReportTable::read(compare_defended);
      if (attacked.error || defended.error) err << "nui: warning: comparing an aborted sweep report\n";
      const auto cmp = compare_reports(attacked, defended);
      write_text_file(compare_out, cmp.to_csv());
      Comparison summary{cmp.summary()};
      if (!summary.rows.empty()) out << summary.to_csv();
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "nui: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "nui: error: " << e.what() << "\n";
    if (const auto* eval = dynamic_cast<const EvaluationError*>(&e); eval && !eval->diagnostics().empty())
      err << eval->diagnostics() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace nui::cli
