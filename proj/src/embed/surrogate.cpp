#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "molex/embed/embedding.hpp"

namespace molex::embed {
namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// basis(k, i) = s_k cos(pi (2i + 1) k / 2n). The angle index is reduced
// modulo 4n before the cosine so equal angles give bit-equal values.
template <typename Scalar>
const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& dct_basis(int n, int k) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  static std::mutex mu;
  static std::map<std::pair<int, int>, Mat> cache;
  std::lock_guard lock(mu);
  auto it = cache.find({n, k});
  if (it != cache.end()) return it->second;
  Mat basis(k, n);
  const long double scale0 = std::sqrt(1.0L / n), scale = std::sqrt(2.0L / n);
  for (int row = 0; row < k; ++row)
    for (int i = 0; i < n; ++i) {
      const long long idx = (static_cast<long long>(2 * i + 1) * row) % (4LL * n);
      const long double c = std::cos(std::numbers::pi_v<long double> * idx / (2.0L * n));
      basis(row, i) = static_cast<Scalar>((row == 0 ? scale0 : scale) * c);
    }
  return cache.emplace(std::make_pair(n, k), std::move(basis)).first->second;
}

}  // namespace

std::vector<float> surrogate_embed(std::string_view s, const EmbedderConfig& cfg) {
  if (s.empty()) throw std::invalid_argument("surrogate_embed: empty SMILES");
  cfg.validate();
  std::vector<double> acc(cfg.dim_full, 0.0);
  for (std::size_t len = 1; len <= 8 && len <= s.size(); ++len)
    for (std::size_t i = 0; i + len <= s.size(); ++i) {
      const std::string_view gram = s.substr(i, len);
      const std::uint64_t h = splitmix64(fnv1a(gram) ^ cfg.surrogate_seed);
      const auto bin = static_cast<std::size_t>((h & 0x7fffffffffffffffull) % cfg.dim_full);
      acc[bin] += (h >> 63) ? -1.0 : 1.0;
    }
  double sq = 0;
  for (double x : acc) sq += x * x;
  const double inv = sq > 0 ? 1.0 / std::sqrt(sq) : 0.0;
  std::vector<float> out(cfg.dim_full);
  for (int i = 0; i < cfg.dim_full; ++i) out[i] = static_cast<float>(acc[i] * inv);
  return out;
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> dct_reduce(const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& v,
                                                    int dim_reduced) {
  const int n = static_cast<int>(v.size());
  if (dim_reduced < 1 || dim_reduced > n) throw std::invalid_argument("dct_reduce: dim_reduced must be in [1, n]");
  if (!v.allFinite()) throw std::invalid_argument("dct_reduce: non-finite input");
  return dct_basis<Scalar>(n, dim_reduced) * v;
}

template Eigen::VectorXd dct_reduce<double>(const Eigen::Ref<const Eigen::VectorXd>&, int);
template Eigen::VectorXf dct_reduce<float>(const Eigen::Ref<const Eigen::VectorXf>&, int);

void normalize(std::span<float> v) {
  double sq = 0;
  for (float x : v) sq += double(x) * x;
  if (sq <= 0) return;
  const double inv = 1.0 / std::sqrt(sq);
  for (float& x : v) x = static_cast<float>(x * inv);
}

EmbeddingMatrix reduce_rows(const EmbeddingMatrix& full, int dim_reduced) {
  EmbeddingMatrix out;
  out.count = full.count;
  out.dim = dim_reduced;
  out.ids = full.ids;
  out.data.resize(full.count * static_cast<std::size_t>(dim_reduced));
  Eigen::VectorXd row(full.dim);
  for (std::size_t i = 0; i < full.count; ++i) {
    const auto src = full.row(i);
    for (int j = 0; j < full.dim; ++j) row[j] = src[j];
    const Eigen::VectorXd r = dct_reduce<double>(row, dim_reduced);
    auto dst = out.row(i);
    for (int j = 0; j < dim_reduced; ++j) dst[j] = static_cast<float>(r[j]);
    normalize(dst);
  }
  return out;
}

}  // namespace molex::embed
