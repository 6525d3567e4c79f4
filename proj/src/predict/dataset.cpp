#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <map>
#include <random>
#include <stdexcept>

#include "molex/chem/canonical.hpp"
#include "molex/chem/smiles.hpp"
#include "molex/predict/dataset.hpp"

namespace molex::predict {
namespace {

// Splits one CSV record. Quoted fields may contain commas and doubled
// quotes; embedded newlines are not supported.
std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(std::move(field));
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(pos, end - pos));
    pos = end + 1;
  }
  return lines;
}

std::optional<double> parse_number(const std::string& s) {
  double v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

void strip_bom(std::string_view& text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
}

std::uint64_t next(std::mt19937_64& rng, std::uint64_t bound) { return rng() % bound; }

template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[next(rng, i)]);
}

}  // namespace

std::string_view to_string(LabelMode mode) {
  switch (mode) {
    case LabelMode::Classification: return "classification";
    case LabelMode::Regression: return "regression";
    case LabelMode::None: break;
  }
  return "none";
}

LabelMode LabeledRows::mode() const {
  if (labeled) return LabelMode::Classification;
  if (!target_names.empty()) return LabelMode::Regression;
  return LabelMode::None;
}

LabeledRows parse_labeled_csv(std::string_view text, std::string_view label_column) {
  strip_bom(text);
  const auto lines = split_lines(text);
  LabeledRows rows;
  std::size_t first = 0;
  while (first < lines.size() && trim(lines[first]).empty()) ++first;
  if (first == lines.size()) throw std::invalid_argument("CSV is empty");
  std::vector<std::string> header;
  for (auto& h : split_csv(lines[first])) header.push_back(trim(h));
  if (header.empty() || header[0] != "smiles")
    throw std::invalid_argument("CSV header must start with a `smiles` column (line " + std::to_string(first + 1) + ")");

  int label_col = -1;
  std::vector<int> target_cols;
  for (std::size_t c = 1; c < header.size(); ++c) {
    if (header[c].empty()) throw std::invalid_argument("CSV header has an empty column name");
    if (header[c] == label_column) {
      label_col = static_cast<int>(c);
    } else {
      target_cols.push_back(static_cast<int>(c));
      rows.target_names.push_back(header[c]);
    }
  }
  rows.targets.assign(target_cols.size(), {});
  const bool has_label = label_col >= 0;
  rows.labeled = has_label;

  for (std::size_t i = first + 1; i < lines.size(); ++i) {
    const int line_no = static_cast<int>(i + 1);
    if (trim(lines[i]).empty()) continue;
    ++rows.data_lines;
    auto fields = split_csv(lines[i]);
    if (fields.size() != header.size()) {
      rows.rejects.push_back({line_no, "expected " + std::to_string(header.size()) + " fields, found " +
                                           std::to_string(fields.size())});
      continue;
    }
    const std::string smiles = trim(fields[0]);
    std::string canonical;
    try {
      canonical = chem::canonical_smiles(smiles);
    } catch (const std::exception& e) {
      rows.rejects.push_back({line_no, e.what()});
      continue;
    }
    std::vector<double> values;
    bool ok = true;
    for (std::size_t t = 0; t < target_cols.size(); ++t) {
      const auto v = parse_number(trim(fields[target_cols[t]]));
      if (!v) {
        rows.rejects.push_back({line_no, "column `" + rows.target_names[t] + "` is not numeric"});
        ok = false;
        break;
      }
      values.push_back(*v);
    }
    if (!ok) continue;
    std::string label;
    if (has_label) {
      label = trim(fields[label_col]);
      if (label.empty()) {
        rows.rejects.push_back({line_no, "empty label"});
        continue;
      }
    }
    rows.smiles.push_back(std::move(canonical));
    rows.input.push_back(smiles);
    rows.lines.push_back(line_no);
    rows.ordinals.push_back(rows.data_lines - 1);
    if (has_label) rows.class_labels.push_back(std::move(label));
    for (std::size_t t = 0; t < values.size(); ++t) rows.targets[t].push_back(values[t]);
  }
  return rows;
}

LabeledRows parse_smiles_list(std::string_view text) {
  strip_bom(text);
  LabeledRows rows;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string line = trim(lines[i]);
    if (line.empty() || line[0] == '#') continue;
    ++rows.data_lines;
    const std::string token = line.substr(0, line.find_first_of(" \t"));
    try {
      rows.smiles.push_back(chem::canonical_smiles(token));
    } catch (const std::exception& e) {
      rows.rejects.push_back({static_cast<int>(i + 1), e.what()});
      continue;
    }
    rows.input.push_back(token);
    rows.lines.push_back(static_cast<int>(i + 1));
    rows.ordinals.push_back(rows.data_lines - 1);
  }
  return rows;
}

LabeledRows parse_dataset_text(std::string_view text) {
  std::string_view t = text;
  strip_bom(t);
  const auto nl = t.find('\n');
  const std::string first = trim(t.substr(0, nl));
  if (first == "smiles" || first.starts_with("smiles,")) return parse_labeled_csv(text);
  return parse_smiles_list(text);
}

int LabeledDataset::target_index(std::string_view name) const {
  for (std::size_t t = 0; t < rows.target_names.size(); ++t)
    if (rows.target_names[t] == name) return static_cast<int>(t);
  return -1;
}

LabeledDataset LabeledDataset::subset(const std::vector<std::size_t>& indices) const {
  LabeledDataset out;
  out.rows.target_names = rows.target_names;
  out.rows.labeled = rows.labeled;
  out.rows.targets.assign(rows.targets.size(), {});
  out.embeddings.dim = embeddings.dim;
  for (std::size_t i : indices) {
    out.rows.smiles.push_back(rows.smiles[i]);
    if (i < rows.input.size()) out.rows.input.push_back(rows.input[i]);
    if (i < rows.lines.size()) out.rows.lines.push_back(rows.lines[i]);
    if (i < rows.ordinals.size()) out.rows.ordinals.push_back(rows.ordinals[i]);
    if (!rows.class_labels.empty()) out.rows.class_labels.push_back(rows.class_labels[i]);
    for (std::size_t t = 0; t < rows.targets.size(); ++t) out.rows.targets[t].push_back(rows.targets[t][i]);
    const auto r = embeddings.row(i);
    out.embeddings.data.insert(out.embeddings.data.end(), r.begin(), r.end());
    out.embeddings.ids.push_back(embeddings.ids[i]);
    ++out.embeddings.count;
  }
  out.rows.data_lines = static_cast<int>(indices.size());
  return out;
}

LabeledDataset embed_rows(LabeledRows rows, const embed::EmbedderConfig& cfg, const embed::EmbeddingMatrix* provided,
                          embed::EmbeddingMatrix* full_out) {
  cfg.validate();
  embed::EmbeddingMatrix full;
  full.dim = cfg.dim_full;
  full.count = rows.size();
  full.data.reserve(rows.size() * cfg.dim_full);
  if (provided) {
    if (provided->count != static_cast<std::size_t>(rows.data_lines))
      throw std::invalid_argument("dim/count mismatch: embedding file has " + std::to_string(provided->count) +
                                  " rows for " + std::to_string(rows.data_lines) + " input lines");
    if (provided->dim != cfg.dim_full)
      throw std::invalid_argument("dim/count mismatch: embedding file dimension " + std::to_string(provided->dim) +
                                  " differs from the configured " + std::to_string(cfg.dim_full));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto r = provided->row(rows.ordinals[i]);
      full.data.insert(full.data.end(), r.begin(), r.end());
    }
  } else {
    for (const auto& s : rows.smiles) {
      const auto v = embed::surrogate_embed(s, cfg);
      full.data.insert(full.data.end(), v.begin(), v.end());
    }
  }
  full.ids = rows.smiles;
  LabeledDataset ds;
  ds.embeddings = embed::reduce_rows(full, cfg.dim_reduced);
  ds.rows = std::move(rows);
  if (full_out) *full_out = std::move(full);
  return ds;
}

Split split(const LabeledDataset& ds, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0 && test_fraction < 1)) throw std::invalid_argument("test_fraction must be in (0, 1)");
  const std::size_t n = ds.size();
  if (n < 2) throw std::invalid_argument("split needs at least 2 records");
  const auto n_test = static_cast<std::size_t>(std::llround(n * test_fraction));
  if (n_test == 0 || n_test == n)
    throw std::invalid_argument("split of " + std::to_string(n) + " records at " + std::to_string(test_fraction) +
                                " leaves one side empty");
  std::mt19937_64 rng(seed);
  Split out;
  if (ds.rows.class_labels.empty()) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    shuffle(order, rng);
    out.test.assign(order.begin(), order.begin() + n_test);
    out.train.assign(order.begin() + n_test, order.end());
  } else {
    // Largest-remainder allocation of test rows per class (sorted labels).
    std::map<std::string, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < n; ++i) by_class[ds.rows.class_labels[i]].push_back(i);
    struct Share {
      std::vector<std::size_t>* members;
      std::size_t take;
      double remainder;
      std::size_t order;
    };
    std::vector<Share> shares;
    std::size_t allocated = 0;
    for (auto& [label, members] : by_class) {
      const double ideal = members.size() * (double(n_test) / n);
      const auto base = static_cast<std::size_t>(std::floor(ideal));
      shares.push_back({&members, base, ideal - base, shares.size()});
      allocated += base;
    }
    std::vector<Share*> by_remainder;
    for (auto& s : shares) by_remainder.push_back(&s);
    std::stable_sort(by_remainder.begin(), by_remainder.end(),
                     [](const Share* a, const Share* b) { return a->remainder > b->remainder; });
    for (std::size_t i = 0; allocated < n_test; ++i, ++allocated) by_remainder[i % by_remainder.size()]->take++;
    for (auto& s : shares) {
      shuffle(*s.members, rng);
      out.test.insert(out.test.end(), s.members->begin(), s.members->begin() + s.take);
      out.train.insert(out.train.end(), s.members->begin() + s.take, s.members->end());
    }
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

}  // namespace molex::predict
