#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "molex/project/tsne.hpp"

using namespace molex::project;

namespace {

Eigen::MatrixXd clusters(int per, int dim, double spread, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd x(3 * per, dim);
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < per; ++i)
      for (int d = 0; d < dim; ++d) x(c * per + i, d) = (d == c ? 10.0 : 0.0) + spread * g(rng);
  return x;
}

double entropy_bits(const Eigen::RowVectorXd& p) {
  double h = 0;
  for (double v : p)
    if (v > 0) h -= v * std::log2(v);
  return h;
}

}  // namespace

TEST(Affinities, RowsHitTheTargetPerplexity) {
  const auto x = clusters(20, 8, 1.0, 1);
  const auto p = conditional_affinities(x, 10);
  for (int i = 0; i < p.rows(); ++i) {
    EXPECT_NEAR(p.row(i).sum(), 1.0, 1e-12);
    EXPECT_EQ(p(i, i), 0.0);
    EXPECT_NEAR(entropy_bits(p.row(i)), std::log2(10.0), 1e-5);
  }
  const auto joint = perplexity_affinities(x, 10);
  EXPECT_NEAR(joint.sum(), 1.0, 1e-12);
  EXPECT_NEAR((joint - joint.transpose()).cwiseAbs().maxCoeff(), 0.0, 1e-15);
}

TEST(Affinities, DuplicatePointsAreRejected) {
  EXPECT_THROW(conditional_affinities(Eigen::MatrixXd::Zero(20, 3), 5), std::invalid_argument);
}

TEST(Tsne, SeparatesClustersDeterministically) {
  const auto x = clusters(20, 8, 1.0, 2);
  TsneParams p;
  p.perplexity = 10;
  p.iterations = 400;
  p.seed = 3;
  const auto a = tsne_run(x, p);
  const auto b = tsne_run(x, p);
  EXPECT_EQ(a.coords, b.coords);
  ASSERT_EQ(a.kl_trace.size(), 400u);
  EXPECT_LT(a.kl_trace.back(), a.kl_trace[250]);
  EXPECT_GE(trustworthiness(x, a.coords, 5), 0.9);
  EXPECT_NEAR(a.coords.col(0).mean(), 0.0, 1e-9);
}

TEST(Tsne, ValidatesAndCancels) {
  const auto x = clusters(5, 4, 1.0, 4);
  TsneParams p;
  EXPECT_THROW(tsne_run(x, p), std::invalid_argument);  // 3 * 30 >= 15 points
  p.perplexity = 3;
  p.iterations = 300;
  int calls = 0;
  EXPECT_THROW(tsne_run(x, p, [&](int, double) { return ++calls < 10; }), TsneCanceled);
  EXPECT_EQ(calls, 10);
}

TEST(Trustworthiness, IdentityIsPerfect) {
  const auto x = clusters(10, 2, 1.0, 5);
  EXPECT_NEAR(trustworthiness(x, x, 5), 1.0, 1e-12);
}

TEST(Subsample, SortedUniqueAndSeeded) {
  const auto s = subsample(1000, 100, 1);
  ASSERT_EQ(s.size(), 100u);
  EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
  EXPECT_EQ(std::adjacent_find(s.begin(), s.end()), s.end());
  EXPECT_EQ(subsample(1000, 100, 1), s);
  EXPECT_EQ(subsample(10, 100, 1).size(), 10u);
}

TEST(ProjectionCsv, HeaderAndRows) {
  Eigen::MatrixX2d c(2, 2);
  c << 1.5, -2, 0, 3;
  EXPECT_EQ(projection_csv({"CCO", "C,C"}, c, {"a", "b"}).substr(0, 13), "id,x,y,label\n");
  const auto plain = projection_csv({"CCO", "CN"}, c);
  EXPECT_EQ(plain.substr(0, 7), "id,x,y\n");
  EXPECT_EQ(std::count(plain.begin(), plain.end(), '\n'), 3);
}
