#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "molex/predict/dataset.hpp"
#include "molex/predict/knn.hpp"

namespace molex::predict {

struct ClassificationMetrics {
  int k = 1;
  double accuracy = 0;
  double baseline_accuracy = 0;  // majority training class predicted for every test row
  std::vector<std::string> labels;           // sorted vocabulary
  std::vector<std::vector<int>> confusion;   // [truth][predicted]
};

struct TargetFit {
  std::string name;
  std::optional<double> r2;  // undefined when the truth has zero variance
  std::vector<double> truth;
  std::vector<double> predicted;
};

struct RegressionMetrics {
  int k = 3;
  std::vector<TargetFit> targets;
  std::optional<double> r2_mean;  // over targets with a defined R²
};

struct EvalReport {
  std::string mode;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  double test_fraction = 0;
  std::uint64_t seed = 0;
  std::optional<ClassificationMetrics> classification;
  std::optional<RegressionMetrics> regression;
};

/// Accuracy and confusion matrix over the sorted union of labels.
ClassificationMetrics evaluate_classification(const std::vector<std::string>& predicted,
                                              const std::vector<std::string>& truth);

/// R² = 1 - SS_res / SS_tot.
std::optional<double> r_squared(const std::vector<double>& predicted, const std::vector<double>& truth);

RegressionMetrics evaluate_regression(const std::vector<std::string>& names,
                                      const std::vector<std::vector<double>>& predicted,
                                      const std::vector<std::vector<double>>& truth);

enum class EvalMode { Classification, Regression, Full };

EvalMode parse_eval_mode(std::string_view s);

struct EvalOptions {
  EvalMode mode = EvalMode::Full;
  int k_classification = 1;
  int k_regression = 3;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
  std::vector<std::string> targets;  // empty selects every numeric target
  std::optional<Backend> backend;     // unset: exact below exact_threshold training rows, hnsw above
  std::size_t exact_threshold = 100000;
};

/// Split, predict and score. Throws std::invalid_argument when the dataset
/// lacks the labels or targets the mode needs.
EvalReport run_evaluation(const LabeledDataset& ds, const EvalOptions& options);

nlohmann::json to_json(const EvalReport& report, bool include_points = true);

}  // namespace molex::predict
