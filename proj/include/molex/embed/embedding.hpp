#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace molex::embed {

enum class EmbeddingSource { File, Surrogate };

struct EmbedderConfig {
  int dim_full = 768;
  int dim_reduced = 128;
  EmbeddingSource source = EmbeddingSource::Surrogate;
  std::uint64_t surrogate_seed = 0;

  void validate() const;
};

/// Row-major float32 matrix with one record id per row.
struct EmbeddingMatrix {
  std::size_t count = 0;
  int dim = 0;
  std::vector<float> data;
  std::vector<std::string> ids;  // one per row, or empty

  std::span<const float> row(std::size_t i) const { return {data.data() + i * dim, static_cast<std::size_t>(dim)}; }
  std::span<float> row(std::size_t i) { return {data.data() + i * dim, static_cast<std::size_t>(dim)}; }
  bool is_normalized(double tolerance = 1e-5) const;
};

/// Malformed embedding file; `offset()` is the byte offset of the problem.
class EmbeddingFileError : public std::runtime_error {
 public:
  EmbeddingFileError(const std::string& what, std::uint64_t offset)
      : std::runtime_error(what + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

/// Sidecar path for an embedding file: same stem with extension ".smi".
std::filesystem::path sidecar_path(const std::filesystem::path& path);

/// Reads a MOLV file. Row ids come from the sidecar when present (its line
/// count must equal the row count), otherwise `ids` is left empty.
EmbeddingMatrix load_embedding_file(const std::filesystem::path& path);

/// Parses MOLV bytes held in memory; `ids` is left empty.
EmbeddingMatrix read_embedding_bytes(std::string_view bytes);

/// Writes a MOLV file, plus the sidecar when the matrix carries ids.
void write_embedding_file(const EmbeddingMatrix& m, const std::filesystem::path& path);

/// Deterministic stand-in embedding: every character n-gram (lengths 1..8) of
/// the canonical string is feature-hashed into dim_full signed bins, then the
/// vector is L2-normalized.
std::vector<float> surrogate_embed(std::string_view canonical_smiles, const EmbedderConfig& cfg);

/// Orthonormal DCT-II of `v`, truncated to the first `dim_reduced`
/// coefficients. Throws on non-finite input or dim_reduced out of range.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> dct_reduce(const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& v,
                                                    int dim_reduced);

extern template Eigen::VectorXd dct_reduce<double>(const Eigen::Ref<const Eigen::VectorXd>&, int);
extern template Eigen::VectorXf dct_reduce<float>(const Eigen::Ref<const Eigen::VectorXf>&, int);

/// Reduces every row with dct_reduce and L2-normalizes the result, which is
/// the representation the index is built on. Ids are carried over.
EmbeddingMatrix reduce_rows(const EmbeddingMatrix& full, int dim_reduced);

/// L2-normalizes `v` in place; zero vectors are left unchanged.
void normalize(std::span<float> v);

}  // namespace molex::embed
