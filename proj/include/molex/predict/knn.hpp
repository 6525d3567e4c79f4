#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "molex/ann/hnsw.hpp"
#include "molex/predict/dataset.hpp"

namespace molex::predict {

enum class Backend { Exact, Hnsw };

struct KnnParams {
  int k = 3;
  Backend backend = Backend::Exact;
  int ef_search = 64;  // hnsw backend only
};

struct ClassPrediction {
  std::string label;
  std::vector<ann::SearchHit> neighbors;
  std::map<std::string, int> votes;
};

/// k-NN over a training set. The hnsw backend builds its index once at
/// construction; the exact backend scans every row.
class KnnModel {
 public:
  KnnModel(const LabeledDataset& train, KnnParams params, const ann::HnswParams& index_params = {});

  std::vector<ann::SearchHit> neighbors(std::span<const float> query) const;

  /// Majority vote; ties go to the smaller summed distance, then to the
  /// lexicographically smaller label.
  ClassPrediction classify(std::span<const float> query) const;

  /// Unweighted mean of the neighbours' target values.
  double regress(std::span<const float> query, std::string_view target) const;

  const KnnParams& params() const { return params_; }

 private:
  const LabeledDataset& train_;
  KnnParams params_;
  std::unique_ptr<ann::HnswIndex> index_;
};

ClassPrediction knn_classify(const LabeledDataset& train, std::span<const float> query, const KnnParams& p);
double knn_regress(const LabeledDataset& train, std::span<const float> query, std::string_view target,
                   const KnnParams& p);

}  // namespace molex::predict
