#include <algorithm>
#include <stdexcept>

#include "molex/predict/knn.hpp"

namespace molex::predict {

KnnModel::KnnModel(const LabeledDataset& train, KnnParams params, const ann::HnswParams& index_params)
    : train_(train), params_(params) {
  if (params_.k < 1) throw std::invalid_argument("k must be at least 1");
  if (train.size() == 0) throw std::invalid_argument("k-NN needs a non-empty training set");
  if (static_cast<std::size_t>(params_.k) > train.size())
    throw std::invalid_argument("k = " + std::to_string(params_.k) + " exceeds the training set size " +
                                std::to_string(train.size()));
  if (params_.backend == Backend::Hnsw) {
    index_ = std::make_unique<ann::HnswIndex>(ann::HnswIndex::build(train.embeddings, index_params));
    index_->set_ef_search(params_.ef_search);
  }
}

std::vector<ann::SearchHit> KnnModel::neighbors(std::span<const float> query) const {
  if (index_) return index_->search(query, params_.k);
  return ann::brute_force_search(train_.embeddings, query, params_.k);
}

ClassPrediction KnnModel::classify(std::span<const float> query) const {
  if (!train_.rows.labeled) throw std::invalid_argument("training set has no class labels");
  ClassPrediction out;
  out.neighbors = neighbors(query);
  std::map<std::string, double> summed;
  for (const auto& hit : out.neighbors) {
    const auto& label = train_.rows.class_labels[hit.id];
    out.votes[label]++;
    summed[label] += hit.distance;
  }
  // Map iteration is in label order, so a strict comparison keeps the
  // lexicographically smaller label on a full tie.
  const std::string* best = nullptr;
  for (const auto& [label, votes] : out.votes) {
    if (!best) {
      best = &label;
      continue;
    }
    const int bv = out.votes[*best];
    if (votes > bv || (votes == bv && summed[label] < summed[*best])) best = &label;
  }
  out.label = *best;
  return out;
}

double KnnModel::regress(std::span<const float> query, std::string_view target) const {
  const int t = train_.target_index(target);
  if (t < 0) throw std::invalid_argument("unknown target `" + std::string(target) + "`");
  const auto hits = neighbors(query);
  double sum = 0;
  for (const auto& hit : hits) sum += train_.rows.targets[t][hit.id];
  return sum / hits.size();
}

ClassPrediction knn_classify(const LabeledDataset& train, std::span<const float> query, const KnnParams& p) {
  return KnnModel(train, p).classify(query);
}

double knn_regress(const LabeledDataset& train, std::span<const float> query, std::string_view target,
                   const KnnParams& p) {
  return KnnModel(train, p).regress(query, target);
}

}  // namespace molex::predict
