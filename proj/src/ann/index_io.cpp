#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "molex/ann/index_io.hpp"

namespace molex::ann {
namespace {

static_assert(std::endian::native == std::endian::little, "index I/O assumes a little-endian host");

constexpr char kMagic[5] = {'H', 'N', 'S', 'W', '1'};
constexpr std::uint32_t kVersion = 1;

constexpr std::array<std::uint64_t, 256> make_crc_table() {
  std::array<std::uint64_t, 256> table{};
  for (std::uint64_t i = 0; i < 256; ++i) {
    std::uint64_t c = i;
    for (int b = 0; b < 8; ++b) c = (c & 1) ? (c >> 1) ^ 0xc96c5795d7870f42ull : c >> 1;
    table[i] = c;
  }
  return table;
}

constexpr auto kCrcTable = make_crc_table();

class Writer {
 public:
  template <typename T>
  void put(T v) {
    const auto* p = reinterpret_cast<const char*>(&v);
    bytes.append(p, sizeof(T));
  }
  std::string bytes;
};

class Reader {
 public:
  explicit Reader(std::string_view b) : bytes_(b) {}
  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > bytes_.size()) throw IndexFileError("index file truncated at byte " + std::to_string(pos_));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::size_t pos() const { return pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t crc64(std::string_view bytes, std::uint64_t crc) {
  crc = ~crc;
  for (unsigned char c : bytes) crc = kCrcTable[(crc ^ c) & 0xff] ^ (crc >> 8);
  return ~crc;
}

std::filesystem::path vectors_path(const std::filesystem::path& index_path) {
  auto p = index_path;
  p.replace_extension(".molv");
  return p;
}

std::string serialize_graph(const HnswIndex& index) {
  Writer w;
  w.bytes.append(kMagic, 5);
  w.put<std::uint32_t>(kVersion);
  const auto& p = index.params();
  w.put<std::uint32_t>(p.m);
  w.put<std::uint32_t>(p.m0);
  w.put<std::uint32_t>(p.ef_construction);
  w.put<std::uint32_t>(p.ef_search);
  w.put<double>(p.level_lambda);
  w.put<std::uint64_t>(p.rng_seed);
  w.put<std::uint32_t>(index.dim());
  w.put<std::uint32_t>(index.entry_point());
  w.put<std::int32_t>(index.max_level());
  w.put<std::uint64_t>(index.size());
  for (std::uint32_t i = 0; i < index.size(); ++i) w.put<std::uint32_t>(index.level(i));
  for (std::uint32_t i = 0; i < index.size(); ++i)
    for (int l = 0; l <= index.level(i); ++l) {
      const auto& list = index.neighbors(i, l);
      w.put<std::uint32_t>(static_cast<std::uint32_t>(list.size()));
      for (std::uint32_t e : list) w.put<std::uint32_t>(e);
    }
  w.put<std::uint64_t>(crc64(w.bytes));
  return w.bytes;
}

void save_index(const HnswIndex& index, const std::filesystem::path& path) {
  const std::string bytes = serialize_graph(index);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write index file " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("short write to " + path.string());
  embed::write_embedding_file(index.vectors(), vectors_path(path));
}

class IndexReader {
 public:
  static HnswIndex read(const std::string& bytes, EmbeddingMatrix vectors) {
    if (bytes.size() < 5 || std::memcmp(bytes.data(), kMagic, 5) != 0) throw IndexFileError("bad magic");
    Reader r(bytes);
    for (int i = 0; i < 5; ++i) r.get<char>();
    const auto version = r.get<std::uint32_t>();
    if (version != kVersion) throw IndexFileError("version mismatch: file has " + std::to_string(version));
    if (bytes.size() < 5 + 4 + 8) throw IndexFileError("index file truncated");
    const std::size_t body = bytes.size() - 8;
    std::uint64_t stored;
    std::memcpy(&stored, bytes.data() + body, 8);
    if (crc64(std::string_view(bytes).substr(0, body)) != stored) throw IndexFileError("checksum failure");

    HnswIndex index;
    auto& p = index.params_;
    p.m = static_cast<int>(r.get<std::uint32_t>());
    p.m0 = static_cast<int>(r.get<std::uint32_t>());
    p.ef_construction = static_cast<int>(r.get<std::uint32_t>());
    p.ef_search = static_cast<int>(r.get<std::uint32_t>());
    p.level_lambda = r.get<double>();
    p.rng_seed = r.get<std::uint64_t>();
    const auto dim = r.get<std::uint32_t>();
    index.entry_ = r.get<std::uint32_t>();
    index.max_level_ = r.get<std::int32_t>();
    const auto count = r.get<std::uint64_t>();
    if (dim != static_cast<std::uint32_t>(vectors.dim) || count != vectors.count)
      throw IndexFileError("index describes " + std::to_string(count) + "x" + std::to_string(dim) +
                           " vectors but the vector file holds " + std::to_string(vectors.count) + "x" +
                           std::to_string(vectors.dim));
    index.levels_.resize(count);
    index.links_.resize(count);
    for (auto& l : index.levels_) l = static_cast<int>(r.get<std::uint32_t>());
    for (std::size_t i = 0; i < count; ++i) {
      index.links_[i].resize(index.levels_[i] + 1);
      for (auto& list : index.links_[i]) {
        list.resize(r.get<std::uint32_t>());
        for (auto& e : list) {
          e = r.get<std::uint32_t>();
          if (e >= count) throw IndexFileError("neighbour id out of range at byte " + std::to_string(r.pos() - 4));
        }
      }
    }
    if (r.pos() != body) throw IndexFileError("unexpected trailing bytes before checksum");
    if (count && (index.entry_ >= count || index.levels_[index.entry_] != index.max_level_))
      throw IndexFileError("inconsistent entry point");
    index.vectors_ = std::move(vectors);
    return index;
  }
};

HnswIndex load_index(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open index file " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 5 || std::memcmp(bytes.data(), kMagic, 5) != 0) throw IndexFileError("bad magic");
  return IndexReader::read(bytes, embed::load_embedding_file(vectors_path(path)));
}

}  // namespace molex::ann
