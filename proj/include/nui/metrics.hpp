#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "nui/error.hpp"

namespace nui {

/// Counts indexed by (true class, predicted class). Column C (one past the last class)
/// counts samples without a usable prediction, so every sample lands in exactly one
/// cell and accuracy = trace / total.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes = 0) : classes_(classes), counts_(classes * (classes + 1), 0) {}

  /// Row-major C x C counts with no missing predictions.
  static ConfusionMatrix from_counts(std::size_t classes, const std::vector<std::uint64_t>& counts) {
    if (counts.size() != classes * classes) throw InvalidArgument("confusion counts must be C*C");
    ConfusionMatrix m(classes);
    for (std::size_t t = 0; t < classes; ++t)
      for (std::size_t p = 0; p < classes; ++p) m.cell(t, p) = counts[t * classes + p];
    return m;
  }

  std::size_t classes() const noexcept { return classes_; }

  void add(std::size_t truth, std::optional<std::size_t> predicted, std::uint64_t count = 1) {
    if (truth >= classes_ || (predicted && *predicted >= classes_))
      throw InvalidArgument("class index out of range");
    cell(truth, predicted.value_or(classes_)) += count;
  }

  std::uint64_t at(std::size_t truth, std::size_t predicted) const { return counts_[truth * (classes_ + 1) + predicted]; }
  std::uint64_t missing(std::size_t truth) const { return at(truth, classes_); }

  std::uint64_t missing_total() const {
    std::uint64_t sum = 0;
    for (std::size_t t = 0; t < classes_; ++t) sum += missing(t);
    return sum;
  }

  std::uint64_t trace() const {
    std::uint64_t sum = 0;
    for (std::size_t c = 0; c < classes_; ++c) sum += at(c, c);
    return sum;
  }

  std::uint64_t total() const {
    std::uint64_t sum = 0;
    for (auto v : counts_) sum += v;
    return sum;
  }

  std::uint64_t row_sum(std::size_t truth) const {
    std::uint64_t sum = 0;
    for (std::size_t p = 0; p <= classes_; ++p) sum += at(truth, p);
    return sum;
  }

  std::uint64_t column_sum(std::size_t predicted) const {
    std::uint64_t sum = 0;
    for (std::size_t t = 0; t < classes_; ++t) sum += at(t, predicted);
    return sum;
  }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::uint64_t& cell(std::size_t t, std::size_t p) { return counts_[t * (classes_ + 1) + p]; }

  std::size_t classes_;
  std::vector<std::uint64_t> counts_;
};

/// Accuracy plus macro (unweighted per-class mean) precision, recall and F1.
/// A class whose denominator is zero contributes 0 to that average.
struct MetricsRecord {
  double accuracy = 0.0;
  double precision_macro = 0.0;
  double recall_macro = 0.0;
  double f1_macro = 0.0;
  ConfusionMatrix confusion;

  friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

inline MetricsRecord compute_metrics(const ConfusionMatrix& confusion) {
  MetricsRecord r;
  r.confusion = confusion;
  const auto total = confusion.total();
  const auto classes = confusion.classes();
  if (total == 0 || classes == 0) return r;
  r.accuracy = static_cast<double>(confusion.trace()) / static_cast<double>(total);

  double precision_sum = 0.0, recall_sum = 0.0, f1_sum = 0.0;
  for (std::size_t c = 0; c < classes; ++c) {
    const double tp = static_cast<double>(confusion.at(c, c));
    const auto predicted = confusion.column_sum(c);
    const auto actual = confusion.row_sum(c);
    const double precision = predicted ? tp / static_cast<double>(predicted) : 0.0;
    const double recall = actual ? tp / static_cast<double>(actual) : 0.0;
    precision_sum += precision;
    recall_sum += recall;
    f1_sum += (precision + recall) > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
  }
  const double n = static_cast<double>(classes);
  r.precision_macro = precision_sum / n;
  r.recall_macro = recall_sum / n;
  r.f1_macro = f1_sum / n;
  return r;
}

/// Relative accuracy drop in percent: 100 * (baseline - attacked) / baseline.
inline double pct_decrease(double baseline_acc, double attacked_acc) {
  if (!(baseline_acc > 0.0)) throw UndefinedBaseline("percentage decrease needs a positive baseline accuracy");
  return 100.0 * (baseline_acc - attacked_acc) / baseline_acc;
}

/// Relative accuracy gain in percent: 100 * (defended - attacked) / attacked.
inline double pct_increase(double attacked_acc, double defended_acc) {
  if (!(attacked_acc > 0.0)) throw UndefinedBaseline("percentage increase needs a positive attacked accuracy");
  return 100.0 * (defended_acc - attacked_acc) / attacked_acc;
}

}  // namespace nui
