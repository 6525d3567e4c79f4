#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "molex/embed/embedding.hpp"

namespace molex::embed {
namespace {

static_assert(std::endian::native == std::endian::little, "MOLV I/O assumes a little-endian host");

constexpr char kMagic[4] = {'M', 'O', 'L', 'V'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderSize = 4 + 4 + 4 + 8;

template <typename T>
T read_le(std::string_view bytes, std::size_t offset) {
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;
}

template <typename T>
void write_le(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

}  // namespace

void EmbedderConfig::validate() const {
  if (dim_full <= 0 || dim_reduced <= 0 || dim_reduced > dim_full)
    throw std::invalid_argument("embedder config requires 0 < dim_reduced <= dim_full");
}

bool EmbeddingMatrix::is_normalized(double tolerance) const {
  for (std::size_t i = 0; i < count; ++i) {
    double sq = 0;
    for (float x : row(i)) sq += double(x) * x;
    if (std::abs(std::sqrt(sq) - 1.0) > tolerance) return false;
  }
  return true;
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  auto p = path;
  p.replace_extension(".smi");
  return p;
}

EmbeddingMatrix read_embedding_bytes(std::string_view bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw EmbeddingFileError("bad magic", 0);
  if (bytes.size() < kHeaderSize) throw EmbeddingFileError("truncated header", bytes.size());
  const auto version = read_le<std::uint32_t>(bytes, 4);
  if (version != kVersion) throw EmbeddingFileError("unsupported version " + std::to_string(version), 4);
  const auto dim = read_le<std::uint32_t>(bytes, 8);
  const auto count = read_le<std::uint64_t>(bytes, 12);
  if (dim == 0) throw EmbeddingFileError("dim/count mismatch: zero dimension", 8);

  const std::uint64_t payload = bytes.size() - kHeaderSize;
  if (count > payload / (4ull * dim))
    throw EmbeddingFileError("truncated payload: expected " + std::to_string(count * dim * 4ull) + " bytes",
                             bytes.size());
  if (payload != count * dim * 4ull)
    throw EmbeddingFileError("dim/count mismatch: trailing bytes after payload", kHeaderSize + count * dim * 4ull);

  EmbeddingMatrix m;
  m.count = count;
  m.dim = static_cast<int>(dim);
  m.data.resize(count * dim);
  std::memcpy(m.data.data(), bytes.data() + kHeaderSize, payload);
  for (std::size_t i = 0; i < m.data.size(); ++i)
    if (!std::isfinite(m.data[i])) throw EmbeddingFileError("non-finite value", kHeaderSize + 4 * i);
  return m;
}

EmbeddingMatrix load_embedding_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open embedding file " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EmbeddingMatrix m = read_embedding_bytes(bytes);
  const std::uint64_t count = m.count;
  const auto side = sidecar_path(path);
  if (std::filesystem::exists(side)) {
    std::ifstream s(side);
    std::string line;
    while (std::getline(s, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      m.ids.push_back(line);
    }
    if (m.ids.size() != count)
      throw EmbeddingFileError("dim/count mismatch: sidecar has " + std::to_string(m.ids.size()) + " lines for " +
                                   std::to_string(count) + " rows",
                               12);
  }
  return m;
}

void write_embedding_file(const EmbeddingMatrix& m, const std::filesystem::path& path) {
  if (m.data.size() != m.count * static_cast<std::size_t>(m.dim))
    throw std::invalid_argument("embedding matrix data length does not match count x dim");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write embedding file " + path.string());
  out.write(kMagic, 4);
  write_le<std::uint32_t>(out, kVersion);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.dim));
  write_le<std::uint64_t>(out, m.count);
  out.write(reinterpret_cast<const char*>(m.data.data()), static_cast<std::streamsize>(m.data.size() * 4));
  if (!out) throw std::runtime_error("short write to " + path.string());

  if (!m.ids.empty()) {
    std::ofstream s(sidecar_path(path), std::ios::trunc);
    for (const auto& id : m.ids) s << id << '\n';
  }
}

}  // namespace molex::embed
