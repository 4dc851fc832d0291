#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nui/attack.hpp"
#include "nui/detail/csv.hpp"
#include "nui/detail/format.hpp"
#include "nui/detail/parallel.hpp"
#include "nui/detail/rng.hpp"
#include "nui/error.hpp"
#include "nui/image_io.hpp"
#include "nui/mask.hpp"

namespace nui {

namespace fs = std::filesystem;

struct LabeledItem {
  fs::path path;  // relative to the dataset root
  std::string label;

  friend bool operator==(const LabeledItem&, const LabeledItem&) = default;
};

/// Images with class labels. Item paths are relative to root; classes are sorted.
struct LabeledDataset {
  fs::path root;
  std::vector<LabeledItem> items;
  std::vector<std::string> classes;

  /// Builds the sorted class list from the item labels.
  static LabeledDataset from_items(fs::path root, std::vector<LabeledItem> items) {
    std::set<std::string> labels;
    for (const auto& item : items) labels.insert(item.label);
    LabeledDataset data{std::move(root), std::move(items), {labels.begin(), labels.end()}};
    data.validate();
    return data;
  }

  fs::path absolute(const LabeledItem& item) const { return root / item.path; }

  std::optional<std::size_t> class_index(const std::string& label) const {
    auto it = std::lower_bound(classes.begin(), classes.end(), label);
    if (it == classes.end() || *it != label) return std::nullopt;
    return static_cast<std::size_t>(it - classes.begin());
  }

  void validate() const {
    if (items.empty()) throw InvalidArgument("dataset is empty");
    if (!std::is_sorted(classes.begin(), classes.end()) ||
        std::adjacent_find(classes.begin(), classes.end()) != classes.end())
      throw InvalidArgument("dataset classes must be sorted and distinct");
    std::set<std::string> seen;
    for (const auto& item : items) {
      if (!class_index(item.label)) throw InvalidArgument("label '" + item.label + "' is not a dataset class");
      if (!seen.insert(item.path.lexically_normal().generic_string()).second)
        throw InvalidArgument("duplicate dataset path " + item.path.generic_string());
    }
  }
};

enum class DatasetLayout { folder_per_class, labels_csv };

inline DatasetLayout parse_layout(std::string_view text) {
  if (text == "folder" || text == "folder-per-class") return DatasetLayout::folder_per_class;
  if (text == "csv" || text == "labels-csv") return DatasetLayout::labels_csv;
  throw InvalidArgument("unknown dataset layout '" + std::string(text) + "' (expected folder or csv)");
}

inline constexpr const char* kLabelsFile = "labels.csv";
inline constexpr const char* kManifestFile = "manifest.csv";

namespace detail {

inline LabeledDataset load_folder_layout(const fs::path& root) {
  std::vector<LabeledItem> items;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file() || !has_image_extension(entry.path())) continue;
    const auto rel = entry.path().lexically_relative(root);
    if (!rel.has_parent_path()) continue;  // files directly under root have no class folder
    items.push_back({rel, entry.path().parent_path().filename().string()});
  }
  if (items.empty()) throw InvalidArgument("no images found under " + root.string());
  std::sort(items.begin(), items.end(),
            [](const auto& a, const auto& b) { return a.path.generic_string() < b.path.generic_string(); });
  return LabeledDataset::from_items(root, std::move(items));
}

inline LabeledDataset load_csv_layout(const fs::path& root) {
  const auto csv_path = root / kLabelsFile;
  std::ifstream in(csv_path);
  if (!in) throw IoError("cannot open " + csv_path.string());
  CsvReader reader(in, csv_path.string());
  auto header = reader.next();
  if (!header || *header != std::vector<std::string>{"path", "label"}) reader.fail("expected header 'path,label'");

  std::vector<LabeledItem> items;
  std::set<std::string> seen;
  while (auto row = reader.next()) {
    if (row->size() != 2) reader.fail("expected 2 fields, got " + std::to_string(row->size()));
    const fs::path rel = fs::path((*row)[0]).lexically_normal();
    const std::string& label = (*row)[1];
    if (rel.empty() || label.empty()) reader.fail("empty path or label");
    if (!seen.insert(rel.generic_string()).second) reader.fail("duplicate path '" + (*row)[0] + "'");
    if (!fs::is_regular_file(root / rel)) reader.fail("unknown path '" + (*row)[0] + "'");
    items.push_back({rel, label});
  }
  if (items.empty()) throw InvalidArgument("no images listed in " + csv_path.string());
  return LabeledDataset::from_items(root, std::move(items));
}

}  // namespace detail

/// folder-per-class: label is the image's parent directory name. labels-csv: root/labels.csv
/// with header "path,label", paths relative to root.
inline LabeledDataset load_dataset(const fs::path& root, DatasetLayout layout) {
  if (!fs::is_directory(root)) throw IoError("dataset root " + root.string() + " is not a directory");
  return layout == DatasetLayout::folder_per_class ? detail::load_folder_layout(root)
                                                   : detail::load_csv_layout(root);
}

// ---------------------------------------------------------------------------
// Manifests

struct ManifestEntry {
  fs::path path;  // relative to the output directory
  std::string label;
  std::optional<MaskId> mask;  // nullopt: image copied unperturbed
  double k = 0.0;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

/// "# seed=<u64>" comment, then "path,label,mask,k" rows.
struct Manifest {
  std::uint64_t seed = 0;
  std::vector<ManifestEntry> entries;

  std::string to_csv() const {
    std::string out = "# seed=" + std::to_string(seed) + "\npath,label,mask,k\n";
    for (const auto& e : entries) {
      out += detail::csv_field(e.path.generic_string());
      out += ',';
      out += detail::csv_field(e.label);
      out += ',';
      out += e.mask ? to_string(*e.mask) : "none";
      out += ',';
      out += e.mask ? detail::shortest(e.k) : "0";
      out += '\n';
    }
    return out;
  }

  static Manifest parse(std::istream& in, const std::string& source) {
    detail::CsvReader reader(in, source);
    Manifest manifest;
    bool have_seed = false;
    auto on_comment = [&](std::string_view text) {
      text = detail::trim(text);
      if (text.starts_with("seed=")) {
        auto seed = detail::parse_int<std::uint64_t>(text.substr(5));
        if (!seed) reader.fail("invalid seed comment");
        manifest.seed = *seed;
        have_seed = true;
      }
    };
    auto header = reader.next(on_comment);
    if (!header || *header != std::vector<std::string>{"path", "label", "mask", "k"})
      reader.fail("expected header 'path,label,mask,k'");
    if (!have_seed) reader.fail("missing '# seed=' header comment");
    while (auto row = reader.next(on_comment)) {
      if (row->size() != 4) reader.fail("expected 4 fields, got " + std::to_string(row->size()));
      ManifestEntry e{(*row)[0], (*row)[1], std::nullopt, 0.0};
      auto k = detail::parse_double((*row)[3]);
      if (!k) reader.fail("invalid k '" + (*row)[3] + "'");
      if ((*row)[2] != "none") {
        try {
          e.mask = parse_mask_id((*row)[2]);
        } catch (const InvalidArgument& err) {
          reader.fail(err.what());
        }
        e.k = *k;
      }
      manifest.entries.push_back(std::move(e));
    }
    return manifest;
  }

  friend bool operator==(const Manifest&, const Manifest&) = default;
};

struct ItemError {
  fs::path path;
  std::string message;
};

/// Output of a dataset transformation. dataset.root is the output directory.
struct DatasetResult {
  LabeledDataset dataset;
  Manifest manifest;
  std::vector<ItemError> errors;
};

// ---------------------------------------------------------------------------
// Augmentation policy and sampling

inline std::vector<MaskId> default_training_masks() {
  return {MaskId::M1, MaskId::M2, MaskId::M3, MaskId::M4,  MaskId::M5,
          MaskId::M8, MaskId::M9, MaskId::M10, MaskId::M11, MaskId::M12Train};
}

struct AugmentationPolicy {
  double perturbed_fraction = 0.8;
  std::vector<MaskId> allowed_masks = default_training_masks();
  std::vector<double> allowed_k = training_weight_grid();
  std::uint64_t seed = 0;

  void validate() const {
    if (!(perturbed_fraction > 0.0 && perturbed_fraction <= 1.0))
      throw InvalidArgument("perturbed fraction must be in (0, 1], got " + detail::shortest(perturbed_fraction));
    if (allowed_masks.empty()) throw InvalidArgument("augmentation needs at least one mask");
    if (allowed_k.empty()) throw InvalidArgument("augmentation needs at least one k value");
    for (double k : allowed_k) {
      if (!std::isfinite(k)) throw InvalidArgument("augmentation k values must be finite");
      if (k == 0.0) throw InvalidArgument("augmentation k values must exclude 0");
    }
  }
};

/// round(fraction * n), halves rounded up.
inline std::size_t perturbed_count(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 0.5));
}

/// Per-item perturbation decisions for an n-item dataset, in item order. The perturbed
/// subset is drawn first (without replacement), then mask and k for each perturbed item
/// in ascending item order, all from one mt19937_64 seeded with policy.seed.
inline std::vector<std::optional<AttackSpec>> plan_augmentation(std::size_t n, const AugmentationPolicy& policy) {
  policy.validate();
  detail::Engine engine(policy.seed);
  const auto chosen = detail::sample_without_replacement(engine, n, perturbed_count(policy.perturbed_fraction, n));
  std::vector<bool> perturbed(n, false);
  for (auto i : chosen) perturbed[i] = true;

  std::vector<std::optional<AttackSpec>> plan(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!perturbed[i]) continue;
    AttackSpec spec;
    spec.mask = policy.allowed_masks[detail::uniform_index(engine, policy.allowed_masks.size())];
    spec.k = policy.allowed_k[detail::uniform_index(engine, policy.allowed_k.size())];
    plan[i] = spec;
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Materialisation

namespace detail {

inline fs::path output_relpath(const LabeledItem& item) {
  auto rel = item.path.lexically_normal();
  rel.replace_extension(".png");
  return rel;
}

inline void check_output_dir(const LabeledDataset& data, const fs::path& out_dir) {
  data.validate();
  fs::create_directories(out_dir);
  if (fs::equivalent(out_dir, data.root)) throw InvalidArgument("output directory must differ from the dataset root");
  std::set<std::string> targets;
  for (const auto& item : data.items) {
    const auto rel = output_relpath(item);
    if (!targets.insert(rel.generic_string()).second)
      throw InvalidArgument("two inputs map to the same output " + rel.generic_string());
    if (rel.has_parent_path()) fs::create_directories(out_dir / rel.parent_path());
  }
}

// Writes one item. Identity transforms of PNG inputs copy the source bytes, so
// unperturbed outputs are byte-identical to their inputs.
inline void transform_item(const fs::path& src, const fs::path& dst, const std::optional<AttackSpec>& spec) {
  const auto bytes = read_file(src);
  const auto image = decode_image(bytes, src.string());
  if (!spec || spec->is_identity()) {
    if (bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0)
      write_file(dst, bytes);
    else
      write_file(dst, encode_png(image));
    return;
  }
  write_file(dst, encode_png(apply_attack(image, *spec)));
}

inline DatasetResult materialise(const LabeledDataset& data, const std::vector<std::optional<AttackSpec>>& plan,
                                 const fs::path& out_dir, std::uint64_t seed, unsigned jobs,
                                 std::vector<std::string> extra_comments = {}) {
  check_output_dir(data, out_dir);
  std::vector<std::optional<std::string>> failures(data.items.size());
  parallel_for(data.items.size(), jobs, [&](std::size_t i) {
    const auto& item = data.items[i];
    try {
      transform_item(data.absolute(item), out_dir / output_relpath(item), plan[i]);
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  });

  DatasetResult result;
  result.manifest.seed = seed;
  std::vector<LabeledItem> written;
  for (std::size_t i = 0; i < data.items.size(); ++i) {
    const auto& item = data.items[i];
    if (failures[i]) {
      result.errors.push_back({item.path, *failures[i]});
      continue;
    }
    const auto rel = output_relpath(item);
    written.push_back({rel, item.label});
    ManifestEntry entry{rel, item.label, std::nullopt, 0.0};
    if (plan[i] && !plan[i]->is_identity()) {
      entry.mask = plan[i]->mask;
      entry.k = plan[i]->k;
    }
    result.manifest.entries.push_back(std::move(entry));
  }

  std::string manifest_text;
  for (const auto& c : extra_comments) manifest_text += "# " + c + "\n";
  manifest_text += result.manifest.to_csv();
  write_text_file(out_dir / kManifestFile, manifest_text);
  std::string labels = "path,label\n";
  for (const auto& item : written)
    labels += csv_field(item.path.generic_string()) + "," + csv_field(item.label) + "\n";
  write_text_file(out_dir / kLabelsFile, labels);

  result.dataset = LabeledDataset{out_dir, std::move(written), data.classes};
  return result;
}

}  // namespace detail

/// Applies one attack to every image. Unreadable images are recorded in
/// DatasetResult::errors and skipped; the run continues.
inline DatasetResult attack_dataset(const LabeledDataset& data, const AttackSpec& spec, const fs::path& out_dir,
                                    unsigned jobs = 1, std::uint64_t seed = 0) {
  spec.validate();
  if (spec.mask == MaskId::M12Train)
    throw InvalidArgument("mask 12t is a training-only variant and cannot be used as an attack");
  std::vector<std::optional<AttackSpec>> plan(data.items.size(), spec);
  std::vector<std::string> comments;
  if (!spec.channels.is_all()) comments.push_back("channels=" + spec.channels.to_string());
  return detail::materialise(data, plan, out_dir, seed, jobs, std::move(comments));
}

/// Builds a defence training set: round(fraction * N) items perturbed per
/// plan_augmentation, the rest copied unchanged.
inline DatasetResult augment_dataset(const LabeledDataset& data, const AugmentationPolicy& policy,
                                     const fs::path& out_dir, unsigned jobs = 1) {
  policy.validate();
  data.validate();
  const auto plan = plan_augmentation(data.items.size(), policy);
  return detail::materialise(data, plan, out_dir, policy.seed, jobs);
}

}  // namespace nui
