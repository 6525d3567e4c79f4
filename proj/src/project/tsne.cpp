#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <limits>
#include <random>

#include "molex/project/tsne.hpp"

namespace molex::project {
namespace {

constexpr double kDistanceGuard = 1e-12;

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& x) {
  const Eigen::VectorXd norms = x.rowwise().squaredNorm();
  Eigen::MatrixXd d = (-2.0 * x * x.transpose()).colwise() + norms;
  d.rowwise() += norms.transpose();
  d = d.cwiseMax(0.0);
  d.diagonal().setZero();
  return d;
}

// Entropy in bits of the row distribution exp(-beta * d), self excluded.
double row_entropy(const Eigen::MatrixXd& d, Eigen::Index i, double beta, double dmin, Eigen::VectorXd& p) {
  const Eigen::Index n = d.cols();
  double sum = 0, weighted = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j == i) {
      p[j] = 0;
      continue;
    }
    const double shifted = d(i, j) - dmin;
    p[j] = std::exp(-beta * shifted);
    sum += p[j];
    weighted += p[j] * shifted;
  }
  p /= sum;
  return (std::log(sum) + beta * weighted / sum) / std::log(2.0);
}

double gaussian(std::mt19937_64& rng) {
  // Box-Muller on the top 53 bits, so the sequence does not depend on the
  // standard library's distribution implementation.
  const double u1 = double((rng() >> 11) + 1) * 0x1.0p-53;
  const double u2 = double(rng() >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace

void TsneParams::validate(std::size_t n) const {
  if (!(perplexity > 0)) throw std::invalid_argument("perplexity must be positive");
  if (!(3 * perplexity < double(n)))
    throw std::invalid_argument("t-SNE needs more than 3 * perplexity points (" + std::to_string(n) + " given)");
  if (iterations < 250) throw std::invalid_argument("t-SNE needs at least 250 iterations");
  if (!(learning_rate > 0)) throw std::invalid_argument("learning rate must be positive");
}

Eigen::MatrixXd conditional_affinities(const Eigen::MatrixXd& x, double perplexity) {
  const Eigen::Index n = x.rows();
  if (n < 2) throw std::invalid_argument("affinities need at least 2 points");
  const Eigen::MatrixXd d = squared_distances(x).array() + kDistanceGuard;
  if ((d.array() - kDistanceGuard).maxCoeff() <= 0)
    throw std::invalid_argument("degenerate input: all points are identical");
  const double target = std::log2(perplexity);
  Eigen::MatrixXd p(n, n);
  Eigen::VectorXd row(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double dmin = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) dmin = std::min(dmin, d(i, j));
    double beta = 1.0, lo = 0.0, hi = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 200; ++iter) {
      const double h = row_entropy(d, i, beta, dmin, row);
      if (std::abs(h - target) < 1e-10) break;
      if (h > target) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2 : (beta + hi) / 2;
      } else {
        hi = beta;
        beta = (beta + lo) / 2;
      }
    }
    p.row(i) = row.transpose();
  }
  return p;
}

Eigen::MatrixXd perplexity_affinities(const Eigen::MatrixXd& x, double perplexity) {
  const Eigen::MatrixXd cond = conditional_affinities(x, perplexity);
  Eigen::MatrixXd p = (cond + cond.transpose()) / (2.0 * x.rows());
  return p / p.sum();
}

Projection tsne_run(const Eigen::MatrixXd& x, const TsneParams& params, const TsneProgress& progress) {
  const Eigen::Index n = x.rows();
  params.validate(n);
  const Eigen::MatrixXd p = perplexity_affinities(x, params.perplexity);

  std::mt19937_64 rng(params.seed);
  Eigen::MatrixX2d y(n, 2);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int c = 0; c < 2; ++c) y(i, c) = 1e-4 * gaussian(rng);
  y.rowwise() -= y.colwise().mean();

  Eigen::MatrixX2d update = Eigen::MatrixX2d::Zero(n, 2);
  Eigen::MatrixX2d gains = Eigen::MatrixX2d::Ones(n, 2);
  Eigen::MatrixX2d grad(n, 2);
  Eigen::MatrixXd num(n, n);

  Projection out;
  out.params = params;
  out.kl_trace.reserve(params.iterations);
  for (int iter = 0; iter < params.iterations; ++iter) {
    const double exaggeration = iter < params.exaggeration_iterations ? params.early_exaggeration : 1.0;
    const double momentum = iter < params.momentum_switch ? params.momentum_initial : params.momentum_final;

    double z = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      num(i, i) = 0;
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double v = 1.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm() + kDistanceGuard);
        num(i, j) = num(j, i) = v;
        z += 2 * v;
      }
    }

    double kl = 0;
    grad.setZero();
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i == j) continue;
        const double q = num(i, j) / z;
        const double pij = p(i, j);
        if (pij > 0) kl += pij * std::log(pij / std::max(q, 1e-300));
        grad.row(i) += 4.0 * (exaggeration * pij - q) * num(i, j) * (y.row(i) - y.row(j));
      }
    out.kl_trace.push_back(kl);

    for (Eigen::Index i = 0; i < n; ++i)
      for (int c = 0; c < 2; ++c) {
        const bool same_sign = (grad(i, c) > 0) == (update(i, c) > 0);
        gains(i, c) = same_sign ? std::max(gains(i, c) * 0.8, 0.01) : gains(i, c) + 0.2;
        update(i, c) = momentum * update(i, c) - params.learning_rate * gains(i, c) * grad(i, c);
      }
    y += update;
    y.rowwise() -= y.colwise().mean();
    if (!y.allFinite()) throw std::runtime_error("t-SNE diverged at iteration " + std::to_string(iter));
    if (progress && !progress(iter, kl)) throw TsneCanceled(iter);
  }
  out.coords = y;
  return out;
}

double trustworthiness(const Eigen::MatrixXd& high, const Eigen::MatrixXd& low, int k) {
  const Eigen::Index n = high.rows();
  if (low.rows() != n) throw std::invalid_argument("trustworthiness: row counts differ");
  if (k < 1 || k >= n) throw std::invalid_argument("trustworthiness: k must be in [1, n)");
  const Eigen::MatrixXd dh = squared_distances(high);
  const Eigen::MatrixXd dl = squared_distances(low);
  auto order = [&](const Eigen::MatrixXd& d, Eigen::Index i) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) idx.push_back(j);
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return d(i, a) < d(i, b); });
    return idx;
  };
  double penalty = 0;
  std::vector<int> rank(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto oh = order(dh, i);
    for (std::size_t r = 0; r < oh.size(); ++r) rank[oh[r]] = static_cast<int>(r) + 1;
    const auto ol = order(dl, i);
    for (int r = 0; r < k; ++r) {
      const int rh = rank[ol[r]];
      if (rh > k) penalty += rh - k;
    }
  }
  const double nn = double(n), kk = double(k);
  return 1.0 - 2.0 / (nn * kk * (2.0 * nn - 3.0 * kk - 1.0)) * penalty;
}

std::vector<std::size_t> subsample(std::size_t n, std::size_t cap, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (n <= cap) return idx;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < cap; ++i) std::swap(idx[i], idx[i + rng() % (n - i)]);
  idx.resize(cap);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::string projection_csv(const std::vector<std::string>& ids, const Eigen::MatrixX2d& coords,
                           const std::vector<std::string>& labels) {
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  };
  std::string out = labels.empty() ? "id,x,y\n" : "id,x,y,label\n";
  char buf[64];
  for (Eigen::Index i = 0; i < coords.rows(); ++i) {
    out += quote(ids[i]);
    std::snprintf(buf, sizeof buf, ",%.9g,%.9g", coords(i, 0), coords(i, 1));
    out += buf;
    if (!labels.empty()) out += "," + quote(labels[i]);
    out += '\n';
  }
  return out;
}

}  // namespace molex::project
