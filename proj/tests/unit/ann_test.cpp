#include <gtest/gtest.h>

#include <random>

#include "molex/ann/calibrate.hpp"
#include "molex/ann/hnsw.hpp"
#include "molex/ann/index_io.hpp"
#include "test_util.hpp"

using namespace molex;
using ann::HnswIndex;
using embed::EmbeddingMatrix;

namespace {

EmbeddingMatrix unit_rows(std::size_t count, int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g;
  EmbeddingMatrix m;
  m.count = count;
  m.dim = dim;
  m.data.resize(count * dim);
  for (auto& x : m.data) x = g(rng);
  for (std::size_t i = 0; i < count; ++i) embed::normalize(m.row(i));
  return m;
}

}  // namespace

TEST(Hnsw, SelfQueryFindsItself) {
  const auto m = unit_rows(2000, 16, 1);
  const auto index = HnswIndex::build(m, {});
  EXPECT_TRUE(index.layer0_connected());
  for (std::uint32_t i = 0; i < 2000; i += 37) {
    const auto hits = index.search(m.row(i), 1, 64);
    ASSERT_EQ(hits.size(), 1u);
    EXPECT_EQ(hits[0].id, i);
    EXPECT_LE(hits[0].distance, 1e-6);
  }
}

TEST(Hnsw, HighEfMatchesBruteForce) {
  const auto m = unit_rows(3000, 24, 2);
  const auto q = unit_rows(50, 24, 3);
  const auto index = HnswIndex::build(m, {});
  int agree = 0;
  for (std::size_t i = 0; i < q.count; ++i) {
    const auto a = index.search(q.row(i), 10, 400);
    const auto b = ann::brute_force_search(m, q.row(i), 10);
    for (const auto& h : a)
      for (const auto& o : b) agree += h.id == o.id;
  }
  EXPECT_GE(agree, 495);
}

TEST(Hnsw, DegreeBoundsHold) {
  ann::HnswParams p;
  p.m = 8;
  p.m0 = 16;
  const auto index = HnswIndex::build(unit_rows(1500, 8, 4), p);
  for (std::uint32_t n = 0; n < index.size(); ++n)
    for (int l = 0; l <= index.level(n); ++l)
      EXPECT_LE(index.neighbors(n, l).size(), static_cast<std::size_t>(l == 0 ? p.m0 : p.m));
}

TEST(Hnsw, RejectsBadInput) {
  EXPECT_THROW(HnswIndex::build(EmbeddingMatrix{}, {}), std::invalid_argument);
  auto m = unit_rows(10, 4, 5);
  m.data[0] *= 3;
  EXPECT_THROW(HnswIndex::build(m, {}), std::invalid_argument);
  ann::HnswParams p;
  p.m = 1;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Hnsw, SearchReturnsAtMostCount) {
  const auto index = HnswIndex::build(unit_rows(5, 4, 6), {});
  EXPECT_EQ(index.search(index.vectors().row(0), 10).size(), 5u);
}

TEST(IndexIo, RoundTripIsByteIdentical) {
  test::TempDir dir;
  auto m = unit_rows(800, 12, 7);
  for (std::size_t i = 0; i < m.count; ++i) m.ids.push_back("id" + std::to_string(i));
  const auto index = HnswIndex::build(m, {});
  ann::save_index(index, dir / "a.hnsw");
  const auto back = ann::load_index(dir / "a.hnsw");
  EXPECT_EQ(ann::serialize_graph(back), ann::serialize_graph(index));
  EXPECT_EQ(back.vectors().ids, m.ids);
  EXPECT_EQ(back.search(m.row(3), 5), index.search(m.row(3), 5));

  const auto again = HnswIndex::build(m, {});
  ann::save_index(again, dir / "b.hnsw");
  EXPECT_EQ(test::read_text(dir / "a.hnsw"), test::read_text(dir / "b.hnsw"));
}

TEST(IndexIo, DetectsCorruption) {
  test::TempDir dir;
  const auto index = HnswIndex::build(unit_rows(200, 8, 8), {});
  ann::save_index(index, dir / "a.hnsw");
  std::string bytes = test::read_text(dir / "a.hnsw");

  auto expect_error = [&](const std::string& data, const std::string& fragment) {
    test::write_text(dir / "a.hnsw", data);
    try {
      ann::load_index(dir / "a.hnsw");
      FAIL() << fragment;
    } catch (const std::exception& e) {
      EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
    }
  };
  std::string magic = bytes;
  magic[0] = 'X';
  expect_error(magic, "bad magic");
  std::string version = bytes;
  version[5] = 9;
  expect_error(version, "version");
  std::string body = bytes;
  body[body.size() / 2] ^= 0x5a;
  expect_error(body, "checksum");
}

TEST(Calibrate, ReachesTargetRecall) {
  const auto m = unit_rows(4000, 16, 9);
  const auto q = unit_rows(200, 16, 10);
  const auto index = HnswIndex::build(m, {});
  const auto oracle = ann::oracle_neighbors(m, q, 10);
  const auto r = ann::calibrate_ef(index, q, oracle, {});
  EXPECT_GE(r.recall, 0.99);
  EXPECT_EQ(r.queries, 200);
  EXPECT_NEAR(ann::measure_recall(index, q, oracle, 10, r.ef_search), r.recall, 1e-12);
  EXPECT_GT(r.p99_latency_ms, 0.0);
}

TEST(Calibrate, NeedsEnoughQueries) {
  const auto m = unit_rows(500, 8, 11);
  const auto q = unit_rows(20, 8, 12);
  const auto index = HnswIndex::build(m, {});
  EXPECT_THROW(ann::calibrate_ef(index, q, ann::oracle_neighbors(m, q, 10), {}), std::invalid_argument);
}
