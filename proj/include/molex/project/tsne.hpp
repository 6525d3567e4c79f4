#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace molex::project {

struct TsneParams {
  double perplexity = 30;
  int iterations = 1000;
  double early_exaggeration = 12;
  int exaggeration_iterations = 250;
  double learning_rate = 200;
  double momentum_initial = 0.5;
  double momentum_final = 0.8;
  int momentum_switch = 250;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument unless 3 * perplexity < n and
  /// iterations >= 250.
  void validate(std::size_t n) const;
};

struct Projection {
  Eigen::MatrixX2d coords;
  std::vector<double> kl_trace;  // KL(P || Q) before each update, unexaggerated P
  TsneParams params;
};

class TsneCanceled : public std::runtime_error {
 public:
  explicit TsneCanceled(int iteration)
      : std::runtime_error("t-SNE canceled at iteration " + std::to_string(iteration)) {}
};

/// Row-conditional Gaussian affinities p(j|i); each row's bandwidth is set by
/// bisection so its Shannon entropy is log2(perplexity). Rows sum to 1.
Eigen::MatrixXd conditional_affinities(const Eigen::MatrixXd& x, double perplexity);

/// Symmetric joint affinities (p(j|i) + p(i|j)) / 2n; sums to 1.
Eigen::MatrixXd perplexity_affinities(const Eigen::MatrixXd& x, double perplexity);

/// Called after every iteration with (iteration, kl); returning false
/// cancels the run with TsneCanceled.
using TsneProgress = std::function<bool(int, double)>;

/// Exact t-SNE: Student-t output kernel, early exaggeration, momentum switch
/// and per-coordinate adaptive gains. Coordinates are recentred every
/// iteration. Throws std::runtime_error naming the iteration on divergence.
Projection tsne_run(const Eigen::MatrixXd& x, const TsneParams& params, const TsneProgress& progress = {});

/// Trustworthiness of a low-dimensional layout with respect to the original
/// k-nearest-neighbour sets; 1 means no intruding neighbours.
double trustworthiness(const Eigen::MatrixXd& high, const Eigen::MatrixXd& low, int k = 12);

/// Sorted, seeded uniform sample of `cap` indices out of n (all of them when
/// n <= cap).
std::vector<std::size_t> subsample(std::size_t n, std::size_t cap, std::uint64_t seed);

/// Projection CSV: header `id,x,y[,label]`, one row per point.
std::string projection_csv(const std::vector<std::string>& ids, const Eigen::MatrixX2d& coords,
                           const std::vector<std::string>& labels = {});

}  // namespace molex::project
