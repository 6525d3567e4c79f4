#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "molex/predict/evaluate.hpp"

namespace molex::predict {

ClassificationMetrics evaluate_classification(const std::vector<std::string>& predicted,
                                              const std::vector<std::string>& truth) {
  if (predicted.size() != truth.size()) throw std::invalid_argument("prediction and truth lengths differ");
  if (truth.empty()) throw std::invalid_argument("cannot evaluate an empty prediction set");
  ClassificationMetrics m;
  std::set<std::string> vocab(truth.begin(), truth.end());
  vocab.insert(predicted.begin(), predicted.end());
  m.labels.assign(vocab.begin(), vocab.end());
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < m.labels.size(); ++i) index[m.labels[i]] = i;
  m.confusion.assign(m.labels.size(), std::vector<int>(m.labels.size(), 0));
  for (std::size_t i = 0; i < truth.size(); ++i) m.confusion[index[truth[i]]][index[predicted[i]]]++;
  long trace = 0;
  for (std::size_t i = 0; i < m.labels.size(); ++i) trace += m.confusion[i][i];
  m.accuracy = double(trace) / truth.size();
  return m;
}

std::optional<double> r_squared(const std::vector<double>& predicted, const std::vector<double>& truth) {
  if (predicted.size() != truth.size()) throw std::invalid_argument("prediction and truth lengths differ");
  if (truth.empty()) throw std::invalid_argument("cannot evaluate an empty prediction set");
  double mean = 0;
  for (double t : truth) mean += t;
  mean /= truth.size();
  double ss_tot = 0, ss_res = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ss_tot += (truth[i] - mean) * (truth[i] - mean);
    ss_res += (truth[i] - predicted[i]) * (truth[i] - predicted[i]);
  }
  if (ss_tot == 0) return std::nullopt;
  return 1.0 - ss_res / ss_tot;
}

RegressionMetrics evaluate_regression(const std::vector<std::string>& names,
                                      const std::vector<std::vector<double>>& predicted,
                                      const std::vector<std::vector<double>>& truth) {
  if (names.size() != predicted.size() || names.size() != truth.size())
    throw std::invalid_argument("target names, predictions and truth differ in count");
  RegressionMetrics m;
  double sum = 0;
  int defined = 0;
  for (std::size_t t = 0; t < names.size(); ++t) {
    TargetFit fit{names[t], r_squared(predicted[t], truth[t]), truth[t], predicted[t]};
    if (fit.r2) {
      sum += *fit.r2;
      ++defined;
    }
    m.targets.push_back(std::move(fit));
  }
  if (defined) m.r2_mean = sum / defined;
  return m;
}

EvalMode parse_eval_mode(std::string_view s) {
  if (s == "classification") return EvalMode::Classification;
  if (s == "regression") return EvalMode::Regression;
  if (s == "full") return EvalMode::Full;
  throw std::invalid_argument("unknown evaluation mode `" + std::string(s) + "`");
}

EvalReport run_evaluation(const LabeledDataset& ds, const EvalOptions& options) {
  const bool classify = options.mode != EvalMode::Regression;
  const bool regress = options.mode != EvalMode::Classification;
  if (classify && !ds.rows.labeled) throw std::invalid_argument("classification needs a `label` column");
  std::vector<std::string> targets = options.targets.empty() ? ds.rows.target_names : options.targets;
  if (regress) {
    if (targets.empty()) throw std::invalid_argument("regression needs at least one numeric target column");
    for (const auto& t : targets)
      if (ds.target_index(t) < 0) throw std::invalid_argument("dataset has no target column `" + t + "`");
  }

  const Split parts = split(ds, options.test_fraction, options.seed);
  const LabeledDataset train = ds.subset(parts.train);
  const LabeledDataset test = ds.subset(parts.test);
  const Backend backend =
      options.backend.value_or(train.size() < options.exact_threshold ? Backend::Exact : Backend::Hnsw);

  EvalReport report;
  report.mode = options.mode == EvalMode::Full ? "full" : classify ? "classification" : "regression";
  report.n_train = train.size();
  report.n_test = test.size();
  report.test_fraction = options.test_fraction;
  report.seed = options.seed;

  if (classify) {
    const KnnModel model(train, {options.k_classification, backend});
    std::vector<std::string> predicted;
    predicted.reserve(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) predicted.push_back(model.classify(test.embeddings.row(i)).label);
    auto metrics = evaluate_classification(predicted, test.rows.class_labels);
    metrics.k = options.k_classification;
    // Majority training class, ties to the smaller label.
    std::map<std::string, int> counts;
    for (const auto& l : train.rows.class_labels) counts[l]++;
    const auto majority = std::max_element(counts.begin(), counts.end(), [](const auto& a, const auto& b) {
      return a.second < b.second;
    })->first;
    const auto hits = std::count(test.rows.class_labels.begin(), test.rows.class_labels.end(), majority);
    metrics.baseline_accuracy = double(hits) / test.size();
    report.classification = std::move(metrics);
  }
  if (regress) {
    const KnnModel model(train, {options.k_regression, backend});
    std::vector<std::vector<double>> predicted(targets.size()), truth(targets.size());
    for (std::size_t i = 0; i < test.size(); ++i) {
      const auto hits = model.neighbors(test.embeddings.row(i));
      for (std::size_t t = 0; t < targets.size(); ++t) {
        const int col = train.target_index(targets[t]);
        double sum = 0;
        for (const auto& h : hits) sum += train.rows.targets[col][h.id];
        predicted[t].push_back(sum / hits.size());
        truth[t].push_back(test.rows.targets[col][i]);
      }
    }
    auto metrics = evaluate_regression(targets, predicted, truth);
    metrics.k = options.k_regression;
    report.regression = std::move(metrics);
  }
  return report;
}

nlohmann::json to_json(const EvalReport& report, bool include_points) {
  using nlohmann::json;
  json j;
  j["mode"] = report.mode;
  j["n_train"] = report.n_train;
  j["n_test"] = report.n_test;
  j["test_fraction"] = report.test_fraction;
  j["seed"] = report.seed;
  j["classification"] = nullptr;
  j["regression"] = nullptr;
  if (const auto& c = report.classification) {
    j["classification"] = {{"k", c->k},
                           {"accuracy", c->accuracy},
                           {"baseline_accuracy", c->baseline_accuracy},
                           {"labels", c->labels},
                           {"confusion", c->confusion}};
  }
  if (const auto& r = report.regression) {
    json per_target = json::object();
    json points = json::object();
    for (const auto& t : r->targets) {
      per_target[t.name] = t.r2 ? json(*t.r2) : json(nullptr);
      if (include_points) points[t.name] = {{"truth", t.truth}, {"predicted", t.predicted}};
    }
    j["regression"] = {{"k", r->k},
                       {"r2_per_target", per_target},
                       {"r2_mean", r->r2_mean ? json(*r->r2_mean) : json(nullptr)}};
    if (include_points) j["regression"]["points"] = points;
  }
  return j;
}

}  // namespace molex::predict
