#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "molex/embed/embedding.hpp"

namespace molex::predict {

enum class LabelMode { None, Classification, Regression };

std::string_view to_string(LabelMode mode);

struct Reject {
  int line;  // 1-based line in the source file
  std::string reason;
};

/// Parsed and canonicalized rows of a labeled CSV or SMILES list.
struct LabeledRows {
  std::vector<std::string> smiles;  // canonical
  std::vector<std::string> input;   // as written in the file
  std::vector<int> lines;
  std::vector<std::size_t> ordinals;  // 0-based position among the data lines
  bool labeled = false;                      // a label column was present
  std::vector<std::string> class_labels;
  std::vector<std::string> target_names;
  std::vector<std::vector<double>> targets;  // targets[t][row]
  std::vector<Reject> rejects;
  int data_lines = 0;  // non-empty data lines seen, accepted or rejected

  std::size_t size() const { return smiles.size(); }
  LabelMode mode() const;
};

/// CSV with a header row. The first column must be `smiles`; a column named
/// `label` (or `label_column` when given) holds class labels and every other
/// column must be numeric. Rows with unparseable SMILES or non-numeric
/// targets are rejected with their line numbers. Throws std::invalid_argument
/// on a malformed header.
LabeledRows parse_labeled_csv(std::string_view text, std::string_view label_column = "label");

/// One SMILES per line, `#` comments and blank lines skipped.
LabeledRows parse_smiles_list(std::string_view text);

/// Chooses CSV or plain-list parsing from the first line.
LabeledRows parse_dataset_text(std::string_view text);

/// Rows with their reduced, L2-normalized embeddings.
struct LabeledDataset {
  LabeledRows rows;
  embed::EmbeddingMatrix embeddings;  // ids are the canonical SMILES

  std::size_t size() const { return rows.size(); }
  LabelMode mode() const { return rows.mode(); }
  int target_index(std::string_view name) const;  // -1 when absent
  LabeledDataset subset(const std::vector<std::size_t>& indices) const;
};

/// Embeds rows with the surrogate, or, when `provided` is given, takes the
/// row of `provided` at each record's data-line ordinal (so rejected lines
/// keep their slot). The result is DCT-reduced and normalized. Throws when
/// `provided` does not have one row per data line or has another dimension.
/// `full_out`, when given, receives the full-dimension rows.
LabeledDataset embed_rows(LabeledRows rows, const embed::EmbedderConfig& cfg,
                          const embed::EmbeddingMatrix* provided = nullptr,
                          embed::EmbeddingMatrix* full_out = nullptr);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Deterministic shuffled split with round(n * test_fraction) test rows.
/// With class labels it is stratified: each class contributes its share
/// within one record. Throws when either side would be empty.
Split split(const LabeledDataset& ds, double test_fraction, std::uint64_t seed);

}  // namespace molex::predict
