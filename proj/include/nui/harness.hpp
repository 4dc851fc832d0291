#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nui/attack.hpp"
#include "nui/dataset.hpp"
#include "nui/detail/csv.hpp"
#include "nui/detail/format.hpp"
#include "nui/detail/parallel.hpp"
#include "nui/detail/subprocess.hpp"
#include "nui/error.hpp"
#include "nui/mask.hpp"
#include "nui/metrics.hpp"

namespace nui {

/// External classifier run as a shell command. {input_dir} and {output_csv} expand to
/// shell-quoted paths; the command must exit 0 after writing one prediction row per
/// image found under input_dir.
struct ClassifierAdapter {
  std::string command;

  void validate() const {
    if (command.find("{input_dir}") == std::string::npos || command.find("{output_csv}") == std::string::npos)
      throw InvalidArgument("adapter command must contain {input_dir} and {output_csv}");
  }

  std::string expand(const fs::path& input_dir, const fs::path& output_csv) const {
    validate();
    std::string out;
    std::size_t pos = 0;
    while (pos < command.size()) {
      if (command.compare(pos, 11, "{input_dir}") == 0) {
        out += detail::shell_quote(input_dir.string());
        pos += 11;
      } else if (command.compare(pos, 12, "{output_csv}") == 0) {
        out += detail::shell_quote(output_csv.string());
        pos += 12;
      } else {
        out.push_back(command[pos++]);
      }
    }
    return out;
  }
};

struct Prediction {
  std::string path;  // relative to the adapter's input directory
  std::string label;
  std::optional<double> confidence;
};

/// Parsed "path,label[,confidence]" CSV.
struct PredictionSet {
  std::vector<Prediction> rows;

  static PredictionSet parse(std::istream& in, const std::string& source) {
    detail::CsvReader reader(in, source);
    auto header = reader.next();
    if (!header) reader.fail("empty prediction file");
    const bool with_confidence = header->size() == 3 && (*header)[2] == "confidence";
    if (header->size() < 2 || (*header)[0] != "path" || (*header)[1] != "label" ||
        (header->size() == 3 && !with_confidence) || header->size() > 3)
      reader.fail("expected header 'path,label[,confidence]'");

    PredictionSet set;
    std::set<std::string> seen;
    while (auto row = reader.next()) {
      if (row->size() != header->size())
        reader.fail("expected " + std::to_string(header->size()) + " fields, got " + std::to_string(row->size()));
      Prediction p{(*row)[0], (*row)[1], std::nullopt};
      if (p.path.empty()) reader.fail("empty path");
      if (!seen.insert(fs::path(p.path).lexically_normal().generic_string()).second)
        reader.fail("duplicate prediction for '" + p.path + "'");
      if (with_confidence && !(*row)[2].empty()) {
        auto c = detail::parse_double((*row)[2]);
        if (!c || !(*c >= 0.0 && *c <= 1.0)) reader.fail("confidence must be a number in [0,1]");
        p.confidence = c;
      }
      set.rows.push_back(std::move(p));
    }
    return set;
  }

  static PredictionSet read(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return parse(in, path.string());
  }
};

/// Metrics plus the warning tallies of one evaluation.
struct Evaluation {
  MetricsRecord metrics;
  std::size_t missing_predictions = 0;  // dataset images the classifier did not label
  std::size_t unknown_labels = 0;       // predictions naming a label outside the class list
  std::size_t unknown_paths = 0;        // predictions for paths not in the dataset (ignored)
  std::vector<ItemError> item_errors;   // images that could not be attacked
};

/// Joins predictions to ground truth on normalised relative path. Unlabelled images and
/// unknown labels count as misclassified.
inline Evaluation score(const LabeledDataset& truth, const PredictionSet& predictions,
                        const fs::path& input_dir = {}) {
  std::map<std::string, const Prediction*> by_path;
  Evaluation eval;
  std::set<std::string> known;
  for (const auto& item : truth.items) known.insert(item.path.lexically_normal().generic_string());
  for (const auto& p : predictions.rows) {
    fs::path path(p.path);
    if (path.is_absolute() && !input_dir.empty()) path = path.lexically_relative(input_dir);
    auto key = path.lexically_normal().generic_string();
    if (!known.count(key)) {
      ++eval.unknown_paths;
      continue;
    }
    by_path[key] = &p;
  }

  ConfusionMatrix confusion(truth.classes.size());
  for (const auto& item : truth.items) {
    const auto truth_index = *truth.class_index(item.label);
    auto it = by_path.find(item.path.lexically_normal().generic_string());
    if (it == by_path.end()) {
      ++eval.missing_predictions;
      confusion.add(truth_index, std::nullopt);
      continue;
    }
    auto predicted = truth.class_index(it->second->label);
    if (!predicted) ++eval.unknown_labels;
    confusion.add(truth_index, predicted);
  }
  eval.metrics = compute_metrics(confusion);
  return eval;
}

/// Attacks `data` into workspace/images, runs the adapter on it and scores the
/// predictions. The workspace is reused across calls and cleared first.
inline Evaluation evaluate(const LabeledDataset& data, const AttackSpec& spec, const ClassifierAdapter& adapter,
                           const fs::path& workspace, unsigned jobs = 1) {
  adapter.validate();
  data.validate();
  const auto images = workspace / "images";
  const auto predictions_csv = workspace / "predictions.csv";
  fs::remove_all(images);
  fs::remove(predictions_csv);
  fs::create_directories(workspace);

  auto attacked = attack_dataset(data, spec, images, jobs);
  // Keep the bookkeeping files out of the classifier's input directory.
  fs::rename(images / kManifestFile, workspace / kManifestFile);
  fs::remove(images / kLabelsFile);

  const auto command = adapter.expand(images, predictions_csv);
  const auto run = detail::run_shell(command, workspace / "adapter.log");
  if (run.exit_status != 0)
    throw EvaluationError("classifier adapter exited with status " + std::to_string(run.exit_status) +
                              " (mask " + to_string(spec.mask) + ", k " + detail::shortest(spec.k) + ")",
                          run.output);
  if (!fs::exists(predictions_csv))
    throw EvaluationError("classifier adapter did not write " + predictions_csv.string(), run.output);

  LabeledDataset truth = data;
  truth.root = images;
  for (auto& item : truth.items) item.path = detail::output_relpath(item);
  auto eval = score(truth, PredictionSet::read(predictions_csv), images);
  eval.item_errors = std::move(attacked.errors);
  return eval;
}

// ---------------------------------------------------------------------------
// Sweeps and reports

struct SweepRow {
  MaskId mask;
  double k;
  MetricsRecord metrics;
};

/// Report rows, one per (mask, k), sorted by mask then k. k = 0 rows repeat the baseline.
struct SweepReport {
  MetricsRecord baseline;
  std::vector<SweepRow> rows;
  std::size_t missing_predictions = 0;  // summed over all evaluations
  std::optional<std::string> error;     // set when the sweep aborted

  std::string to_csv() const {
    const auto& b = baseline;
    std::string out = "# baseline accuracy=" + detail::fixed6(b.accuracy) +
                      " precision_macro=" + detail::fixed6(b.precision_macro) +
                      " recall_macro=" + detail::fixed6(b.recall_macro) + " f1_macro=" + detail::fixed6(b.f1_macro) +
                      "\nmask,k,accuracy,precision_macro,recall_macro,f1_macro,pct_decrease\n";
    for (const auto& row : rows) {
      const auto& m = row.metrics;
      const double drop = b.accuracy > 0.0 ? pct_decrease(b.accuracy, m.accuracy) : std::nan("");
      out += to_string(row.mask) + "," + detail::fixed6(row.k) + "," + detail::fixed6(m.accuracy) + "," +
             detail::fixed6(m.precision_macro) + "," + detail::fixed6(m.recall_macro) + "," +
             detail::fixed6(m.f1_macro) + "," + detail::fixed6(drop) + "\n";
    }
    if (error) {
      std::string message = *error;
      std::replace(message.begin(), message.end(), '\n', ' ');
      out += "# error: " + message + "\n";
    }
    return out;
  }
};

/// Thrown when a sweep cell fails; partial() holds the rows completed before the abort.
class SweepError : public EvaluationError {
 public:
  SweepError(const EvaluationError& cause, SweepReport partial)
      : EvaluationError(cause.what(), cause.diagnostics()), partial_(std::move(partial)) {}
  const SweepReport& partial() const noexcept { return partial_; }

 private:
  SweepReport partial_;
};

inline std::vector<MaskId> normalise_masks(std::vector<MaskId> masks) {
  if (masks.empty()) throw InvalidArgument("sweep needs at least one mask");
  for (auto m : masks)
    if (m == MaskId::M12Train) throw InvalidArgument("mask 12t is training-only and cannot be swept");
  std::sort(masks.begin(), masks.end());
  masks.erase(std::unique(masks.begin(), masks.end()), masks.end());
  return masks;
}

inline std::vector<double> normalise_weights(std::vector<double> ks) {
  if (ks.empty()) throw InvalidArgument("sweep needs at least one k value");
  for (double k : ks)
    if (!std::isfinite(k)) throw InvalidArgument("k values must be finite");
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  return ks;
}

/// Evaluates every (mask, k) cell. The unattacked baseline runs once and fills all
/// k = 0 rows. Cells run on up to `jobs` threads, each in its own workspace
/// subdirectory; results are assembled in (mask, k) order regardless of completion order.
inline SweepReport sweep(const LabeledDataset& data, std::vector<MaskId> masks, std::vector<double> ks,
                         const ClassifierAdapter& adapter, const fs::path& workspace, unsigned jobs = 1) {
  masks = normalise_masks(std::move(masks));
  ks = normalise_weights(std::move(ks));
  adapter.validate();
  data.validate();

  SweepReport report;
  try {
    auto base = evaluate(data, AttackSpec{MaskId::M1, 0.0, {}}, adapter, workspace / "baseline", jobs);
    report.baseline = std::move(base.metrics);
    report.missing_predictions += base.missing_predictions;
  } catch (const EvaluationError& e) {
    report.error = e.what();
    throw SweepError(e, std::move(report));
  }

  struct Cell {
    MaskId mask;
    double k;
    std::size_t k_index;
  };
  std::vector<Cell> cells;
  for (auto m : masks)
    for (std::size_t i = 0; i < ks.size(); ++i)
      if (ks[i] != 0.0) cells.push_back({m, ks[i], i});

  std::vector<std::optional<Evaluation>> results(cells.size());
  std::atomic<bool> abort{false};
  std::mutex error_mutex;
  std::optional<std::pair<std::size_t, EvaluationError>> first_error;

  detail::parallel_for(cells.size(), jobs, [&](std::size_t i) {
    if (abort.load()) return;
    const auto& cell = cells[i];
    const auto dir = workspace / ("mask" + to_string(cell.mask) + "_k" + std::to_string(cell.k_index));
    try {
      results[i] = evaluate(data, AttackSpec{cell.mask, cell.k, {}}, adapter, dir, 1);
    } catch (const EvaluationError& e) {
      abort = true;
      std::lock_guard lock(error_mutex);
      if (!first_error || i < first_error->first) first_error.emplace(i, e);
    }
  });

  std::size_t next = 0;
  for (auto m : masks) {
    for (double k : ks) {
      if (k == 0.0) {
        report.rows.push_back({m, k, report.baseline});
        continue;
      }
      auto& result = results[next++];
      if (!result) continue;
      report.missing_predictions += result->missing_predictions;
      report.rows.push_back({m, k, std::move(result->metrics)});
    }
  }
  if (first_error) {
    report.error = first_error->second.what();
    throw SweepError(first_error->second, std::move(report));
  }
  return report;
}

/// One parsed report row (six-decimal values as written).
struct ReportRow {
  MaskId mask;
  double k;
  double accuracy;
  double precision_macro;
  double recall_macro;
  double f1_macro;
  double pct_decrease;
};

struct ReportTable {
  std::optional<double> baseline_accuracy;
  std::vector<ReportRow> rows;
  std::optional<std::string> error;

  static ReportTable from(const SweepReport& report) {
    ReportTable t;
    t.baseline_accuracy = report.baseline.accuracy;
    for (const auto& r : report.rows) {
      const auto& m = r.metrics;
      const double drop = report.baseline.accuracy > 0 ? pct_decrease(report.baseline.accuracy, m.accuracy)
                                                       : std::nan("");
      t.rows.push_back({r.mask, r.k, m.accuracy, m.precision_macro, m.recall_macro, m.f1_macro, drop});
    }
    t.error = report.error;
    return t;
  }

  static ReportTable parse(std::istream& in, const std::string& source) {
    detail::CsvReader reader(in, source);
    ReportTable table;
    auto on_comment = [&](std::string_view text) {
      text = detail::trim(text);
      if (text.starts_with("error:")) {
        table.error = std::string(detail::trim(text.substr(6)));
      } else if (text.starts_with("baseline ")) {
        const auto pos = text.find("accuracy=");
        if (pos != std::string_view::npos) {
          auto rest = text.substr(pos + 9);
          table.baseline_accuracy = detail::parse_double(rest.substr(0, rest.find(' ')));
        }
      }
    };
    const std::vector<std::string> expected{"mask",         "k",        "accuracy",    "precision_macro",
                                            "recall_macro", "f1_macro", "pct_decrease"};
    auto header = reader.next(on_comment);
    if (!header || *header != expected)
      reader.fail("expected header 'mask,k,accuracy,precision_macro,recall_macro,f1_macro,pct_decrease'");
    while (auto row = reader.next(on_comment)) {
      if (row->size() != expected.size()) reader.fail("expected 7 fields, got " + std::to_string(row->size()));
      ReportRow r{};
      try {
        r.mask = parse_mask_id((*row)[0]);
      } catch (const InvalidArgument& e) {
        reader.fail(e.what());
      }
      double* targets[] = {&r.k, &r.accuracy, &r.precision_macro, &r.recall_macro, &r.f1_macro, &r.pct_decrease};
      for (std::size_t i = 0; i < 6; ++i) {
        auto v = detail::parse_double((*row)[i + 1]);
        if (!v) reader.fail("invalid number '" + (*row)[i + 1] + "' in column " + expected[i + 1]);
        *targets[i] = *v;
      }
      table.rows.push_back(r);
    }
    return table;
  }

  static ReportTable read(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return parse(in, path.string());
  }
};

struct ComparisonRow {
  MaskId mask;
  double k;
  double attacked_accuracy;
  double defended_accuracy;
  double pct_increase;  // NaN when the attacked accuracy is 0
};

/// k at which per-mask summaries are reported.
inline constexpr double kSummaryWeight = -1.4;

struct Comparison {
  std::vector<ComparisonRow> rows;

  std::vector<ComparisonRow> summary(double k = kSummaryWeight) const {
    std::vector<ComparisonRow> out;
    for (const auto& r : rows)
      if (std::abs(r.k - k) < 1e-6) out.push_back(r);
    return out;
  }

  std::string to_csv() const {
    std::string out = "mask,k,attacked_accuracy,defended_accuracy,pct_increase\n";
    for (const auto& r : rows)
      out += to_string(r.mask) + "," + detail::fixed6(r.k) + "," + detail::fixed6(r.attacked_accuracy) + "," +
             detail::fixed6(r.defended_accuracy) + "," + detail::fixed6(r.pct_increase) + "\n";
    return out;
  }
};

/// Row-by-row percentage increase from `attacked` to `defended`. Both must cover the
/// same (mask, k) grid in the same order.
inline Comparison compare_reports(const ReportTable& attacked, const ReportTable& defended) {
  auto cell_name = [](const ReportRow& r) { return "(mask " + to_string(r.mask) + ", k " + detail::fixed6(r.k) + ")"; };
  const auto common = std::min(attacked.rows.size(), defended.rows.size());
  for (std::size_t i = 0; i < common; ++i) {
    const auto& a = attacked.rows[i];
    const auto& d = defended.rows[i];
    if (a.mask != d.mask || std::abs(a.k - d.k) > 5e-7)
      throw InvalidArgument("report grids differ at row " + std::to_string(i + 1) + ": attacked " + cell_name(a) +
                            " vs defended " + cell_name(d));
  }
  if (attacked.rows.size() != defended.rows.size()) {
    const bool attacked_longer = attacked.rows.size() > defended.rows.size();
    const auto& extra = attacked_longer ? attacked.rows[common] : defended.rows[common];
    throw InvalidArgument("report grids differ at row " + std::to_string(common + 1) + ": " +
                          (attacked_longer ? "attacked" : "defended") + " has extra cell " + cell_name(extra));
  }
  Comparison cmp;
  for (std::size_t i = 0; i < common; ++i) {
    const auto& a = attacked.rows[i];
    const auto& d = defended.rows[i];
    const double gain = a.accuracy > 0.0 ? pct_increase(a.accuracy, d.accuracy) : std::nan("");
    cmp.rows.push_back({a.mask, a.k, a.accuracy, d.accuracy, gain});
  }
  return cmp;
}

inline Comparison compare_reports(const SweepReport& attacked, const SweepReport& defended) {
  return compare_reports(ReportTable::from(attacked), ReportTable::from(defended));
}

}  // namespace nui
