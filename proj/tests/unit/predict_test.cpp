#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "molex/predict/dataset.hpp"
#include "molex/predict/evaluate.hpp"
#include "molex/predict/knn.hpp"
#include "test_util.hpp"

using namespace molex;
using namespace molex::predict;

namespace {

// Points on the unit circle in 2-d, labelled by hand.
LabeledDataset circle(const std::vector<double>& angles, const std::vector<std::string>& labels,
                      const std::vector<double>& values = {}) {
  LabeledDataset ds;
  ds.embeddings.dim = 2;
  ds.embeddings.count = angles.size();
  for (std::size_t i = 0; i < angles.size(); ++i) {
    ds.embeddings.data.push_back(static_cast<float>(std::cos(angles[i])));
    ds.embeddings.data.push_back(static_cast<float>(std::sin(angles[i])));
    ds.rows.smiles.push_back("C" + std::to_string(i));
    ds.rows.input.push_back(ds.rows.smiles.back());
    ds.rows.lines.push_back(static_cast<int>(i + 2));
    ds.rows.ordinals.push_back(i);
  }
  ds.rows.data_lines = static_cast<int>(angles.size());
  ds.rows.labeled = !labels.empty();
  ds.rows.class_labels = labels;
  if (!values.empty()) {
    ds.rows.target_names = {"y"};
    ds.rows.targets = {values};
  }
  ds.embeddings.ids = ds.rows.smiles;
  return ds;
}

std::vector<float> at(double angle) { return {static_cast<float>(std::cos(angle)), static_cast<float>(std::sin(angle))}; }

}  // namespace

TEST(Csv, LabelsTargetsAndRejects) {
  const auto rows = parse_labeled_csv("smiles,label,hba\nCCO,a,1\n\"C(N)C\",b,1\nC1CC,a,2\nCCC,a,x\n");
  EXPECT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows.mode(), LabelMode::Classification);
  EXPECT_EQ(rows.class_labels, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(rows.target_names, (std::vector<std::string>{"hba"}));
  ASSERT_EQ(rows.rejects.size(), 2u);
  EXPECT_EQ(rows.rejects[0].line, 4);
  EXPECT_EQ(rows.rejects[1].line, 5);
  EXPECT_EQ(rows.ordinals, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(rows.data_lines, 4);
}

TEST(Csv, RegressionOnlyAndBadHeaders) {
  const auto rows = parse_labeled_csv("\xEF\xBB\xBFsmiles,hba,hbd\nCCO,1,1\n");
  EXPECT_EQ(rows.mode(), LabelMode::Regression);
  EXPECT_THROW(parse_labeled_csv("mol,label\nCCO,a\n"), std::invalid_argument);
  EXPECT_THROW(parse_labeled_csv(""), std::invalid_argument);
}

TEST(Csv, PlainListsAreDetected) {
  const auto rows = parse_dataset_text("CCO\nc1ccccc1 benzene\n# note\nC(\n");
  EXPECT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows.mode(), LabelMode::None);
  EXPECT_EQ(rows.rejects.size(), 1u);
  EXPECT_EQ(parse_dataset_text("smiles,label\nCCO,x\n").mode(), LabelMode::Classification);
}

TEST(EmbedRows, ProvidedRowsFollowDataLineOrdinals) {
  auto rows = parse_smiles_list("CCO\nC(\nCCN\n");
  embed::EmbedderConfig cfg;
  cfg.dim_full = 8;
  cfg.dim_reduced = 4;
  embed::EmbeddingMatrix provided;
  provided.count = 3;
  provided.dim = 8;
  provided.data.assign(24, 0.f);
  provided.data[0] = 1;    // row 0 -> CCO
  provided.data[8] = 5;    // row 1 -> rejected line
  provided.data[16] = -1;  // row 2 -> CCN
  embed::EmbeddingMatrix full;
  const auto ds = embed_rows(rows, cfg, &provided, &full);
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_FLOAT_EQ(full.row(0)[0], 1.f);
  EXPECT_FLOAT_EQ(full.row(1)[0], -1.f);
  EXPECT_TRUE(ds.embeddings.is_normalized());
  EXPECT_EQ(ds.embeddings.ids, ds.rows.smiles);

  provided.count = 2;
  provided.data.resize(16);
  EXPECT_THROW(embed_rows(rows, cfg, &provided), std::invalid_argument);
}

TEST(Split, StratifiedAndDeterministic) {
  std::vector<double> angles;
  std::vector<std::string> labels;
  for (int i = 0; i < 100; ++i) {
    angles.push_back(i * 0.05);
    labels.push_back(i < 70 ? "x" : "y");
  }
  const auto ds = circle(angles, labels);
  const auto s = split(ds, 0.2, 3);
  EXPECT_EQ(s.test.size(), 20u);
  EXPECT_EQ(s.train.size(), 80u);
  const auto ys = std::count_if(s.test.begin(), s.test.end(), [&](std::size_t i) { return labels[i] == "y"; });
  EXPECT_EQ(ys, 6);
  const auto again = split(ds, 0.2, 3);
  EXPECT_EQ(again.test, s.test);
  EXPECT_NE(split(ds, 0.2, 4).test, s.test);
  EXPECT_THROW(split(ds, 0.0, 3), std::invalid_argument);
}

TEST(Knn, VotesAndTieBreaks) {
  const auto ds = circle({0.0, 0.1, 0.2, 3.0, 3.1}, {"a", "a", "b", "c", "c"});
  KnnParams p;
  p.k = 3;
  EXPECT_EQ(knn_classify(ds, at(0.05), p).label, "a");
  EXPECT_EQ(knn_classify(ds, at(3.05), p).label, "c");
  p.k = 2;
  // One vote each; "b" at 0.2 is closer to the query than "a" at 0.0.
  EXPECT_EQ(knn_classify(circle({0.0, 0.2}, {"a", "b"}), at(0.15), p).label, "b");
  // Equal distances fall back to the label order.
  EXPECT_EQ(knn_classify(circle({0.1, -0.1}, {"z", "m"}), at(0.0), p).label, "m");
}

TEST(Knn, RegressionAveragesNeighbours) {
  const auto ds = circle({0.0, 0.1, 0.2, 3.0}, {}, {1.0, 2.0, 3.0, 100.0});
  KnnParams p;
  p.k = 3;
  EXPECT_DOUBLE_EQ(knn_regress(ds, at(0.1), "y", p), 2.0);
  EXPECT_THROW(knn_regress(ds, at(0.1), "missing", p), std::invalid_argument);
}

TEST(Knn, HnswBackendMatchesExactOnSmallSets) {
  std::vector<double> angles;
  std::vector<std::string> labels;
  for (int i = 0; i < 300; ++i) {
    angles.push_back(i * 0.021);
    labels.push_back(std::to_string(i / 30));
  }
  const auto ds = circle(angles, labels);
  KnnModel exact(ds, {3, Backend::Exact, 64});
  KnnModel approx(ds, {3, Backend::Hnsw, 200});
  for (double a = 0; a < 6.2; a += 0.1) EXPECT_EQ(exact.classify(at(a)).label, approx.classify(at(a)).label);
}

TEST(Metrics, RSquaredAndConfusion) {
  EXPECT_DOUBLE_EQ(*r_squared({1, 2, 3}, {1, 2, 3}), 1.0);
  EXPECT_DOUBLE_EQ(*r_squared({2, 2, 2}, {1, 2, 3}), 0.0);
  EXPECT_FALSE(r_squared({1, 2}, {5, 5}).has_value());
  const auto c = evaluate_classification({"a", "b", "b"}, {"a", "a", "b"});
  EXPECT_EQ(c.labels, (std::vector<std::string>{"a", "b"}));
  EXPECT_NEAR(c.accuracy, 2.0 / 3, 1e-12);
  EXPECT_EQ(c.confusion[0][1], 1);
  EXPECT_EQ(c.confusion[1][1], 1);
}

TEST(Evaluate, FullModeReportSchema) {
  std::vector<double> angles, values;
  std::vector<std::string> labels;
  for (int i = 0; i < 200; ++i) {
    angles.push_back(i * 0.03);
    labels.push_back(i < 100 ? "lo" : "hi");
    values.push_back(i * 0.03);
  }
  const auto ds = circle(angles, labels, values);
  EvalOptions o;
  o.seed = 11;
  const auto report = run_evaluation(ds, o);
  ASSERT_TRUE(report.classification && report.regression);
  EXPECT_EQ(report.n_test, 40u);
  EXPECT_GT(report.classification->accuracy, 0.9);
  EXPECT_GT(*report.regression->targets[0].r2, 0.9);
  const auto j = to_json(report);
  for (const char* key : {"mode", "n_train", "n_test", "test_fraction", "seed", "classification", "regression"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(to_json(run_evaluation(ds, o)).dump(), j.dump());

  o.mode = EvalMode::Classification;
  EXPECT_FALSE(run_evaluation(ds, o).regression.has_value());
  EXPECT_THROW(run_evaluation(circle(angles, {}, values), o), std::invalid_argument);
  EXPECT_THROW(parse_eval_mode("bogus"), std::invalid_argument);
}
