#include <gtest/gtest.h>

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <sstream>
#include <thread>

#include "molex/cli/commands.hpp"
#include "molex/service/platform.hpp"
#include "test_util.hpp"

using namespace molex;
using nlohmann::json;

namespace {

cli::IngestOptions ingest_options(const test::TempDir& dir, std::size_t rows) {
  test::write_text(dir / "in.smi", test::corpus_head(rows));
  cli::IngestOptions o;
  o.smiles_path = dir / "in.smi";
  o.out_path = dir / "out.hnsw";
  return o;
}

struct Run {
  int code;
  std::string out, err;
};

template <typename Fn>
Run capture(Fn&& fn) {
  std::ostringstream out, err;
  const int code = fn(out, err);
  return {code, out.str(), err.str()};
}

// Runs the molex binary and returns its exit status.
int run_binary(const std::vector<std::string>& args) {
  const pid_t pid = fork();
  if (pid == 0) {
    std::vector<char*> argv{const_cast<char*>(MOLEX_BINARY)};
    for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    if (!freopen("/dev/null", "w", stdout) || !freopen("/dev/null", "w", stderr)) _exit(126);
    execv(MOLEX_BINARY, argv.data());
    _exit(127);
  }
  int status = 0;
  waitpid(pid, &status, 0);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Ingest, BuildsCalibratedIndexDeterministically) {
  test::TempDir dir;
  auto o = ingest_options(dir, 600);
  const auto r = capture([&](auto& out, auto& err) { return cli::cmd_ingest(o, out, err); });
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("recall@10"), std::string::npos);
  for (const char* ext : {".hnsw", ".molv", ".smi", ".json"}) {
    auto p = o.out_path;
    EXPECT_TRUE(std::filesystem::exists(p.replace_extension(ext))) << ext;
  }
  const auto meta = json::parse(test::read_text(dir / "out.json"));
  EXPECT_EQ(meta["source"], "surrogate");
  EXPECT_GE(meta["calibration"]["recall"].get<double>(), 0.99);

  const std::string first = test::read_text(o.out_path);
  o.out_path = dir / "again.hnsw";
  ASSERT_EQ(capture([&](auto& out, auto& err) { return cli::cmd_ingest(o, out, err); }).code, 0);
  EXPECT_EQ(test::read_text(o.out_path), first);
}

TEST(Ingest, FailureModes) {
  test::TempDir dir;
  auto o = ingest_options(dir, 100);

  embed::EmbeddingMatrix wrong;
  wrong.count = 99;
  wrong.dim = 768;
  wrong.data.assign(99 * 768, 0.01f);
  embed::write_embedding_file(wrong, dir / "wrong.molv");
  o.embeddings_path = dir / "wrong.molv";
  auto r = capture([&](auto& out, auto& err) { return cli::cmd_ingest(o, out, err); });
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("dim/count mismatch"), std::string::npos) << r.err;

  o.embeddings_path.reset();
  test::write_text(dir / "junk.smi", "C1CC(\nXx\nCCO\n");
  o.smiles_path = dir / "junk.smi";
  EXPECT_EQ(capture([&](auto& out, auto& err) { return cli::cmd_ingest(o, out, err); }).code, 1);

  o.smiles_path = dir / "does-not-exist.smi";
  EXPECT_EQ(capture([&](auto& out, auto& err) { return cli::cmd_ingest(o, out, err); }).code, 1);

  test::write_text(dir / "few.smi", "CCO\nCCN\nCCC\nC1CC(\n");
  o.smiles_path = dir / "few.smi";
  r = capture([&](auto& out, auto& err) { return cli::cmd_ingest(o, out, err); });
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("line 4"), std::string::npos);
}

TEST(Ingest, FileEmbeddingsMatchedByLine) {
  test::TempDir dir;
  auto o = ingest_options(dir, 150);
  embed::EmbeddingMatrix m;
  m.count = 150;
  m.dim = 768;
  embed::EmbedderConfig cfg;
  cfg.surrogate_seed = 77;
  std::istringstream lines(test::corpus_head(150));
  std::string line;
  while (std::getline(lines, line)) {
    const auto v = embed::surrogate_embed(line, cfg);
    m.data.insert(m.data.end(), v.begin(), v.end());
  }
  embed::write_embedding_file(m, dir / "emb.molv");
  o.embeddings_path = dir / "emb.molv";
  ASSERT_EQ(capture([&](auto& out, auto& err) { return cli::cmd_ingest(o, out, err); }).code, 0);
  const auto loaded = service::open_index(o.out_path);
  EXPECT_EQ(loaded->meta.source, "file");
  const std::string known = loaded->index.vectors().ids[10];
  EXPECT_EQ(service::query_neighbors(*loaded, known, {}).hits[0].smiles, known);
}

TEST(Query, MatchesServiceAndExitCodes) {
  test::TempDir dir;
  auto o = ingest_options(dir, 300);
  ASSERT_EQ(capture([&](auto& out, auto& err) { return cli::cmd_ingest(o, out, err); }).code, 0);

  const auto loaded = service::open_index(o.out_path);
  const std::string smiles = loaded->index.vectors().ids[42];
  cli::QueryCliOptions q;
  q.index_path = o.out_path;
  q.smiles = {smiles, "c1ccccc1N"};
  q.n = 4;
  q.json = true;
  const auto r = capture([&](auto& out, auto& err) { return cli::cmd_query(q, out, err); });
  ASSERT_EQ(r.code, 0) << r.err;

  service::ServiceConfig cfg;
  cfg.data_dir = dir / "svc";
  service::Platform platform(cfg, loaded);
  const auto svc = platform.neighbors(json{{"smiles", q.smiles}, {"n", 4}}.dump());
  EXPECT_EQ(json::parse(r.out), json::parse(svc.body));

  q.json = false;
  q.smiles = {smiles};
  q.n = 3;
  const auto table = capture([&](auto& out, auto& err) { return cli::cmd_query(q, out, err); });
  EXPECT_NE(table.out.find("mw\tlogp\tqed"), std::string::npos);
  EXPECT_NE(table.out.find("1\t0.000000"), std::string::npos);

  q.smiles = {"C1CC("};
  const auto bad = capture([&](auto& out, auto& err) { return cli::cmd_query(q, out, err); });
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("offset"), std::string::npos);

  q.index_path = dir / "missing.hnsw";
  EXPECT_EQ(capture([&](auto& out, auto& err) { return cli::cmd_query(q, out, err); }).code, 1);
}

TEST(Eval, ReportSchemaWithEmbeddingFile) {
  test::TempDir dir;
  std::istringstream lines(test::corpus_head(300));
  std::string line, csv = "smiles,label,heavy\n";
  embed::EmbeddingMatrix m;
  m.dim = 768;
  embed::EmbedderConfig cfg;
  cfg.surrogate_seed = 5;
  for (int i = 0; std::getline(lines, line); ++i) {
    csv += line + "," + (line.find('N') != std::string::npos ? "N" : "noN") + "," + std::to_string(line.size()) +
           "\n";
    const auto v = embed::surrogate_embed(line, cfg);
    m.data.insert(m.data.end(), v.begin(), v.end());
    ++m.count;
  }
  test::write_text(dir / "data.csv", csv);
  embed::write_embedding_file(m, dir / "data.molv");

  cli::EvalCliOptions o;
  o.csv_path = dir / "data.csv";
  o.embeddings_path = dir / "data.molv";
  o.eval.seed = 9;
  const auto r = capture([&](auto& out, auto& err) { return cli::cmd_eval(o, out, err); });
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["mode"], "full");
  EXPECT_EQ(j["n_test"], 60);
  EXPECT_EQ(j["n_train"], 240);
  EXPECT_EQ(j["classification"]["k"], 1);
  EXPECT_EQ(j["regression"]["k"], 3);
  for (const char* key : {"accuracy", "baseline_accuracy", "labels", "confusion"})
    EXPECT_TRUE(j["classification"].contains(key)) << key;
  EXPECT_TRUE(j["regression"]["r2_per_target"]["heavy"].is_number());
  EXPECT_EQ(j["regression"]["points"]["heavy"]["truth"].size(), 60u);
  EXPECT_NE(r.err.find("accuracy"), std::string::npos);

  EXPECT_EQ(capture([&](auto& out, auto& err) { return cli::cmd_eval(o, out, err); }).out, r.out);

  test::write_text(dir / "reg.csv", "smiles,y\nCCO,1\nCCN,2\nCCC,3\nCCCC,4\nCCCCC,5\n");
  o.csv_path = dir / "reg.csv";
  o.embeddings_path.reset();
  o.eval.mode = predict::EvalMode::Classification;
  EXPECT_EQ(capture([&](auto& out, auto& err) { return cli::cmd_eval(o, out, err); }).code, 1);

  test::write_text(dir / "bad.csv", "molecule,label\nCCO,a\n");
  o.csv_path = dir / "bad.csv";
  EXPECT_EQ(capture([&](auto& out, auto& err) { return cli::cmd_eval(o, out, err); }).code, 2);
}

TEST(Binary, ExitCodes) {
  EXPECT_EQ(run_binary({"--help"}), 0);
  EXPECT_EQ(run_binary({"ingest", "--help"}), 0);
  EXPECT_EQ(run_binary({"frobnicate"}), 2);
  EXPECT_EQ(run_binary({"serve", "--index", "/nonexistent/index.hnsw"}), 1);
  EXPECT_EQ(run_binary({"serve"}), 1);
}

TEST(Binary, ServeStopsCleanlyOnSigterm) {
  test::TempDir dir;
  auto o = ingest_options(dir, 200);
  ASSERT_EQ(capture([&](auto& out, auto& err) { return cli::cmd_ingest(o, out, err); }).code, 0);
  const std::string data = (dir / "data").string();
  const std::string index = o.out_path.string();
  const pid_t pid = fork();
  if (pid == 0) {
    if (!freopen("/dev/null", "w", stderr)) _exit(126);
    execl(MOLEX_BINARY, MOLEX_BINARY, "serve", "--index", index.c_str(), "--port", "0", "--data-dir", data.c_str(),
          static_cast<char*>(nullptr));
    _exit(127);
  }
  std::this_thread::sleep_for(std::chrono::milliseconds(500));
  kill(pid, SIGTERM);
  int status = 0;
  waitpid(pid, &status, 0);
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 0);
}
