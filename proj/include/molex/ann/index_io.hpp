#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string_view>

#include "molex/ann/hnsw.hpp"

namespace molex::ann {

class IndexFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// CRC-64/XZ (ECMA-182 polynomial, reflected, init and xorout all ones).
std::uint64_t crc64(std::string_view bytes, std::uint64_t crc = 0);

/// Path of the vector file stored next to an index: same stem, ".molv".
std::filesystem::path vectors_path(const std::filesystem::path& index_path);

/// Writes the graph to `path` and the indexed vectors (with their ids as the
/// ".smi" sidecar) to vectors_path(path).
void save_index(const HnswIndex& index, const std::filesystem::path& path);

/// Graph bytes as written by save_index, checksum included.
std::string serialize_graph(const HnswIndex& index);

HnswIndex load_index(const std::filesystem::path& path);

}  // namespace molex::ann
