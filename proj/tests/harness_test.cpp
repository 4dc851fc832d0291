#include <gtest/gtest.h>

#include <sstream>

#include "nui/harness.hpp"
#include "test_support.hpp"

namespace nui {
namespace {

using test::TempDir;

ClassifierAdapter stub(const std::string& args) {
  return {test::stub_classifier() + " " + args + " --in {input_dir} --out {output_csv}"};
}

LabeledDataset small_dataset(const fs::path& root, int per_class = 2) {
  test::write_folder_dataset(root, {"a", "b"}, per_class);
  return load_dataset(root, DatasetLayout::folder_per_class);
}

TEST(Adapter, RequiresPlaceholdersAndQuotesPaths) {
  EXPECT_THROW(ClassifierAdapter{"run {input_dir}"}.validate(), InvalidArgument);
  EXPECT_THROW(ClassifierAdapter{"run {output_csv}"}.validate(), InvalidArgument);
  const ClassifierAdapter a{"run {input_dir} > {output_csv}"};
  EXPECT_EQ(a.expand("/tmp/it's here", "/o.csv"), "run '/tmp/it'\\''s here' > '/o.csv'");
}

TEST(Evaluate, TruthStubIsPerfect) {
  TempDir in, ws;
  const auto data = small_dataset(in.path(), 3);
  const auto eval = evaluate(data, {MaskId::M6, 1.0, {}}, stub("--mode truth"), ws.path());
  EXPECT_EQ(eval.metrics.accuracy, 1.0);
  EXPECT_EQ(eval.metrics.f1_macro, 1.0);
  EXPECT_EQ(eval.missing_predictions, 0u);
  EXPECT_TRUE(fs::exists(ws / "manifest.csv"));
  EXPECT_FALSE(fs::exists(ws / "images/manifest.csv"));
  EXPECT_FALSE(fs::exists(ws / "images/labels.csv"));
}

TEST(Evaluate, ConstantStubOnBalancedPair) {
  TempDir in, ws;
  const auto data = small_dataset(in.path(), 4);
  const auto eval = evaluate(data, {MaskId::M1, 0.0, {}}, stub("--mode constant --label a"), ws.path());
  EXPECT_DOUBLE_EQ(eval.metrics.accuracy, 0.5);
  EXPECT_DOUBLE_EQ(eval.metrics.recall_macro, 0.5);
  EXPECT_DOUBLE_EQ(eval.metrics.precision_macro, 0.25);
  EXPECT_NEAR(eval.metrics.f1_macro, 1.0 / 3.0, 1e-12);
}

TEST(Evaluate, UnknownLabelsAreMisclassified) {
  TempDir in, ws;
  const auto data = small_dataset(in.path());
  const auto eval = evaluate(data, {MaskId::M1, 0.0, {}}, stub("--mode constant --label zebra"), ws.path());
  EXPECT_EQ(eval.metrics.accuracy, 0.0);
  EXPECT_EQ(eval.unknown_labels, 4u);
}

TEST(Evaluate, FailingAdapterIsAnEvaluationError) {
  TempDir in, ws;
  const auto data = small_dataset(in.path());
  try {
    evaluate(data, {MaskId::M1, 1.0, {}}, {"echo boom >&2; exit 1 # {input_dir} {output_csv}"}, ws.path());
    ADD_FAILURE();
  } catch (const EvaluationError& e) {
    EXPECT_NE(std::string(e.what()).find("status 1"), std::string::npos);
    EXPECT_NE(e.diagnostics().find("boom"), std::string::npos);
  }
  EXPECT_THROW(evaluate(data, {MaskId::M1, 1.0, {}}, {"true {input_dir} {output_csv}"}, ws.path()), EvaluationError);
}

TEST(Evaluate, UnparsablePredictionsReportTheLine) {
  TempDir in, ws;
  const auto data = small_dataset(in.path());
  const ClassifierAdapter bad{"printf 'path,label\\na/img0.png,a\\nonly-one-field\\n' > {output_csv} # {input_dir}"};
  try {
    evaluate(data, {MaskId::M1, 0.0, {}}, bad, ws.path());
    ADD_FAILURE();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Evaluate, MissingPredictionsCountAsWrong) {
  TempDir in, ws;
  const auto data = small_dataset(in.path());
  const ClassifierAdapter partial{
      "printf 'path,label\\na/img0.png,a\\n%s/b/img1.png,b\\nghost.png,a\\n' {input_dir} > {output_csv}"};
  const auto eval = evaluate(data, {MaskId::M1, 0.0, {}}, partial, ws.path());
  EXPECT_EQ(eval.missing_predictions, 2u);
  EXPECT_EQ(eval.unknown_paths, 1u);
  EXPECT_DOUBLE_EQ(eval.metrics.accuracy, 0.5);
  EXPECT_EQ(eval.metrics.confusion.missing_total(), 2u);
}

TEST(Predictions, ParseRules) {
  std::istringstream ok("path,label,confidence\nx.png,a,0.9\ny.png,b,\n");
  const auto set = PredictionSet::parse(ok, "p");
  ASSERT_EQ(set.rows.size(), 2u);
  EXPECT_EQ(*set.rows[0].confidence, 0.9);
  EXPECT_FALSE(set.rows[1].confidence);

  auto line_of = [](const std::string& text) -> std::size_t {
    std::istringstream in(text);
    try {
      PredictionSet::parse(in, "p");
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  std::istringstream empty("");
  EXPECT_THROW(PredictionSet::parse(empty, "p"), ParseError);
  EXPECT_EQ(line_of("file,label\n"), 1u);
  EXPECT_EQ(line_of("path,label\nx.png,a\nx.png,b\n"), 3u);
  EXPECT_EQ(line_of("path,label,confidence\nx.png,a,1.5\n"), 2u);
  EXPECT_EQ(line_of("path,label,confidence\nx.png,a,high\n"), 2u);
}

TEST(Sweep, DefaultGridHas276RowsAndZeroRowsRepeatBaseline) {
  TempDir in, ws;
  test::write_intensity_dataset(in.path(), 2);
  const auto data = load_dataset(in.path(), DatasetLayout::folder_per_class);
  const auto report = sweep(data, {kAttackMasks.begin(), kAttackMasks.end()}, standard_weight_grid(),
                            {test::intensity_stub_command()}, ws.path(), 4);
  ASSERT_EQ(report.rows.size(), 276u);
  EXPECT_FALSE(report.error);
  std::size_t zero_rows = 0;
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& row = report.rows[i];
    EXPECT_EQ(row.mask, kAttackMasks[i / 23]);
    EXPECT_EQ(row.k, standard_weight_grid()[i % 23]);
    if (row.k == 0.0) {
      ++zero_rows;
      EXPECT_NEAR(row.metrics.accuracy, report.baseline.accuracy, 1e-12);
      EXPECT_EQ(row.metrics, report.baseline);
    }
  }
  EXPECT_EQ(zero_rows, 12u);
  EXPECT_EQ(report.baseline.accuracy, 1.0);

  const auto csv = report.to_csv();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 278);
  std::istringstream text(csv);
  const auto table = ReportTable::parse(text, "report");
  EXPECT_EQ(table.rows.size(), 276u);
  EXPECT_EQ(*table.baseline_accuracy, 1.0);
}

TEST(Sweep, NormalisesInputs) {
  EXPECT_EQ(normalise_masks({MaskId::M3, MaskId::M1, MaskId::M3}), (std::vector<MaskId>{MaskId::M1, MaskId::M3}));
  EXPECT_THROW(normalise_masks({}), InvalidArgument);
  EXPECT_THROW(normalise_masks({MaskId::M12Train}), InvalidArgument);
  EXPECT_EQ(normalise_weights({0.4, -0.2, 0.4}), (std::vector<double>{-0.2, 0.4}));
  EXPECT_THROW(normalise_weights({}), InvalidArgument);
  EXPECT_THROW(normalise_weights({INFINITY}), InvalidArgument);
}

TEST(Sweep, FailureCarriesPartialReport) {
  TempDir in, ws;
  const auto data = small_dataset(in.path());
  // Fails only for attacked inputs, detected via the sibling manifest the harness writes.
  const ClassifierAdapter flaky{"grep -q ',6,' {input_dir}/../manifest.csv && exit 3; " + test::stub_classifier() +
                                " --mode truth --in {input_dir} --out {output_csv}"};
  try {
    sweep(data, {MaskId::M1, MaskId::M6}, {-0.2, 0.0, 0.2}, flaky, ws.path(), 1);
    ADD_FAILURE();
  } catch (const SweepError& e) {
    const auto& partial = e.partial();
    ASSERT_TRUE(partial.error);
    EXPECT_NE(partial.error->find("status 3"), std::string::npos);
    ASSERT_GE(partial.rows.size(), 3u);
    EXPECT_EQ(partial.rows[0].mask, MaskId::M1);
    for (const auto& r : partial.rows) {
      if (r.mask == MaskId::M6) {
        EXPECT_EQ(r.k, 0.0);
      }
    }
    EXPECT_NE(partial.to_csv().find("\n# error: "), std::string::npos);
  }
}

ReportTable table_of(std::vector<std::pair<MaskId, double>> cells, double accuracy) {
  ReportTable t;
  t.baseline_accuracy = accuracy;
  for (auto [m, k] : cells) t.rows.push_back({m, k, accuracy, 0, 0, 0, 0});
  return t;
}

TEST(Compare, IdenticalReportsGiveZeroGain) {
  const auto a = table_of({{MaskId::M1, -1.4}, {MaskId::M6, -1.4}, {MaskId::M6, 0.2}}, 0.5);
  const auto cmp = compare_reports(a, a);
  ASSERT_EQ(cmp.rows.size(), 3u);
  for (const auto& r : cmp.rows) EXPECT_EQ(r.pct_increase, 0.0);
  EXPECT_EQ(cmp.summary().size(), 2u);
}

TEST(Compare, UniformImprovement) {
  const auto a = table_of({{MaskId::M1, -1.4}, {MaskId::M2, 2.2}}, 0.5);
  const auto d = table_of({{MaskId::M1, -1.4}, {MaskId::M2, 2.2}}, 0.6);
  const auto cmp = compare_reports(a, d);
  for (const auto& r : cmp.rows) EXPECT_NEAR(r.pct_increase, 20.0, 1e-9);
  EXPECT_EQ(cmp.to_csv(),
            "mask,k,attacked_accuracy,defended_accuracy,pct_increase\n"
            "1,-1.400000,0.500000,0.600000,20.000000\n2,2.200000,0.500000,0.600000,20.000000\n");
}

TEST(Compare, ZeroAttackedAccuracyIsNan) {
  const auto cmp = compare_reports(table_of({{MaskId::M1, 1.0}}, 0.0), table_of({{MaskId::M1, 1.0}}, 0.3));
  EXPECT_TRUE(std::isnan(cmp.rows[0].pct_increase));
  EXPECT_NE(cmp.to_csv().find(",nan\n"), std::string::npos);
}

TEST(Compare, GridMismatchNamesTheCell) {
  const auto a = table_of({{MaskId::M1, -1.4}, {MaskId::M6, -1.4}}, 0.5);
  const auto d = table_of({{MaskId::M1, -1.4}, {MaskId::M7, -1.4}}, 0.5);
  try {
    compare_reports(a, d);
    ADD_FAILURE();
  } catch (const InvalidArgument& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("mask 6"), std::string::npos) << msg;
    EXPECT_NE(msg.find("mask 7"), std::string::npos) << msg;
  }
  const auto shorter = table_of({{MaskId::M1, -1.4}}, 0.5);
  try {
    compare_reports(a, shorter);
    ADD_FAILURE();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("extra cell (mask 6"), std::string::npos) << e.what();
  }
}

TEST(ReportTable, ParsesWrittenReportsAndErrors) {
  std::istringstream text(
      "# baseline accuracy=0.900000 precision_macro=0.9 recall_macro=0.9 f1_macro=0.9\n"
      "mask,k,accuracy,precision_macro,recall_macro,f1_macro,pct_decrease\n"
      "6,-1.400000,0.300000,0.1,0.2,0.3,66.666667\n"
      "# error: adapter failed\n");
  const auto t = ReportTable::parse(text, "r");
  EXPECT_EQ(*t.baseline_accuracy, 0.9);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0].mask, MaskId::M6);
  EXPECT_EQ(*t.error, "adapter failed");

  std::istringstream bad("mask,k,accuracy,precision_macro,recall_macro,f1_macro,pct_decrease\n6,x,0,0,0,0,0\n");
  try {
    ReportTable::parse(bad, "r");
    ADD_FAILURE();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

}  // namespace
}  // namespace nui
