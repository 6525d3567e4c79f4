#include <gtest/gtest.h>

#include <thread>

#include "molex/predict/dataset.hpp"
#include "molex/service/config.hpp"
#include "molex/service/http.hpp"
#include "molex/service/jobs.hpp"
#include "molex/service/platform.hpp"
#include "test_util.hpp"

// After the Eigen-based headers: resolv.h, pulled in by httplib, defines _res.
#include <httplib.h>

using namespace molex;
using namespace molex::service;
using nlohmann::json;
using namespace std::chrono_literals;

namespace {

// Index over the first `n` corpus molecules with surrogate embeddings.
std::shared_ptr<const LoadedIndex> corpus_index(std::size_t n) {
  embed::EmbedderConfig cfg;
  auto ds = predict::embed_rows(predict::parse_smiles_list(test::corpus_head(n)), cfg);
  IndexMeta meta;
  return wrap_index(ann::HnswIndex::build(std::move(ds.embeddings), {}), meta);
}

const std::shared_ptr<const LoadedIndex>& shared_index() {
  static const auto index = corpus_index(500);
  return index;
}

ServiceConfig config_in(const test::TempDir& dir) {
  ServiceConfig c;
  c.data_dir = dir / "data";
  c.workers = 2;
  return c;
}

std::string labeled_csv(std::size_t n) {
  std::istringstream in(test::corpus_head(n));
  std::string line, out = "smiles,label,value\n";
  for (std::size_t i = 0; std::getline(in, line); ++i)
    out += line + "," + (line.size() % 2 ? "odd" : "even") + "," + std::to_string(line.size()) + "\n";
  return out;
}

json body(const ApiResponse& r) { return json::parse(r.body); }

JobRecord wait_done(Platform& p, const std::string& id) {
  const auto job = p.jobs().wait(id, 60s);
  EXPECT_TRUE(job && is_terminal(job->state));
  return *job;
}

}  // namespace

TEST(Config, IniSectionsAndErrors) {
  const auto c = parse_config(
      "data_dir = /tmp/x\nport = 9001\nmax_smiles = 5\n[pubchem]\nenabled = true\nthreshold = 80\n"
      "[calibration]\ntarget_recall = 0.95\n[tsne]\ncap = 100\n");
  EXPECT_EQ(c.data_dir, "/tmp/x");
  EXPECT_EQ(c.port, 9001);
  EXPECT_EQ(c.max_smiles_per_request, 5);
  EXPECT_TRUE(c.pubchem_enabled);
  EXPECT_EQ(c.pubchem_default_threshold, 80);
  EXPECT_DOUBLE_EQ(c.target_recall, 0.95);
  EXPECT_EQ(c.tsne_cap, 100u);
  EXPECT_THROW(parse_config("no_such_key = 1\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("port = many\n"), std::invalid_argument);
}

TEST(Store, PersistsDatasetsAndFailsOrphanedJobs) {
  test::TempDir dir;
  std::string id;
  {
    Store store(dir.path());
    embed::EmbedderConfig cfg;
    embed::EmbeddingMatrix full;
    const auto ds = predict::embed_rows(predict::parse_dataset_text(labeled_csv(20)), cfg, nullptr, &full);
    id = store.add_dataset("demo", ds, full).id;
    JobRecord job;
    job.id = "job_orphan";
    job.dataset_id = id;
    job.state = JobState::Running;
    job.history = {JobState::Queued, JobState::Running};
    store.put_job(job);
  }
  Store again(dir.path());
  const auto record = again.dataset(id);
  ASSERT_TRUE(record);
  EXPECT_EQ(record->name, "demo");
  EXPECT_EQ(record->rows, 20u);
  EXPECT_EQ(record->labels, (std::vector<std::string>{"even", "odd"}));
  const auto ds = again.load_dataset(*record);
  EXPECT_EQ(ds.size(), 20u);
  EXPECT_TRUE(ds.embeddings.is_normalized());
  EXPECT_EQ(again.load_full(*record).dim, 768);
  const auto job = again.job("job_orphan");
  ASSERT_TRUE(job);
  EXPECT_EQ(job->state, JobState::Failed);
  EXPECT_EQ(job->history.back(), JobState::Failed);
}

TEST(Jobs, StateMachine) {
  test::TempDir dir;
  Store store(dir.path());
  JobManager jobs(store, 2);

  const auto ok = jobs.submit(JobKind::Evaluation, "ds_a", {}, [](JobContext& ctx) {
    ctx.progress(0.5);
    return json{{"answer", 42}};
  });
  EXPECT_EQ(ok.state, JobState::Queued);
  auto done = jobs.wait(ok.id, 10s);
  ASSERT_TRUE(done);
  EXPECT_EQ(done->state, JobState::Done);
  EXPECT_EQ(done->history, (std::vector<JobState>{JobState::Queued, JobState::Running, JobState::Done}));
  EXPECT_DOUBLE_EQ(done->progress, 1.0);
  EXPECT_EQ((*jobs.result(ok.id))["answer"], 42);

  const auto bad = jobs.submit(JobKind::Evaluation, "ds_a", {}, [](JobContext&) -> json {
    throw std::runtime_error("boom");
  });
  const auto failed = jobs.wait(bad.id, 10s);
  EXPECT_EQ(failed->state, JobState::Failed);
  EXPECT_EQ(failed->error, "boom");
  EXPECT_FALSE(jobs.result(bad.id));

  std::atomic<bool> started{false};
  const auto slow = jobs.submit(JobKind::Projection, "ds_b", {}, [&](JobContext& ctx) {
    started = true;
    for (;;) {
      ctx.check_canceled();
      std::this_thread::sleep_for(1ms);
    }
    return json{};
  });
  EXPECT_THROW(jobs.submit(JobKind::Projection, "ds_b", {}, [](JobContext&) { return json{}; }), JobConflict);
  while (!started) std::this_thread::sleep_for(1ms);
  jobs.cancel(slow.id);
  const auto canceled = jobs.wait(slow.id, 10s);
  EXPECT_EQ(canceled->state, JobState::Canceled);
  EXPECT_EQ(canceled->history, (std::vector<JobState>{JobState::Queued, JobState::Running, JobState::Canceled}));
  EXPECT_FALSE(jobs.cancel("job_missing"));
}

TEST(Neighbors, IndexedMoleculeComesFirst) {
  test::TempDir dir;
  Platform p(config_in(dir), shared_index());
  const std::string smiles = shared_index()->index.vectors().ids[17];
  const auto r = p.neighbors(json{{"smiles", smiles}, {"n", 5}}.dump());
  ASSERT_EQ(r.status, 200) << r.body;
  const auto hits = body(r)["results"][0]["hits"];
  ASSERT_EQ(hits.size(), 5u);
  EXPECT_EQ(hits[0]["smiles"], smiles);
  EXPECT_LE(hits[0]["distance"].get<double>(), 1e-6);
  EXPECT_TRUE(hits[0]["properties"].contains("qed"));
  for (std::size_t i = 1; i < hits.size(); ++i)
    EXPECT_LE(hits[i - 1]["distance"].get<double>(), hits[i]["distance"].get<double>());
}

TEST(Neighbors, PartialFailureAndLimits) {
  test::TempDir dir;
  auto cfg = config_in(dir);
  Platform p(cfg, shared_index());

  auto r = p.neighbors(json{{"smiles", {"c1ccccc1O", "C1CC(", "CCN"}}, {"n", 2}, {"include_mcs", true}}.dump());
  ASSERT_EQ(r.status, 200);
  auto results = body(r)["results"];
  ASSERT_EQ(results.size(), 3u);
  EXPECT_TRUE(results[0]["error"].is_null());
  EXPECT_EQ(results[1]["error"]["code"], 400);
  EXPECT_TRUE(results[1]["error"]["detail"].contains("offset"));
  EXPECT_TRUE(results[2]["hits"][0]["mcs_size"].is_number());

  EXPECT_EQ(p.neighbors(json{{"smiles", {"C1CC(", "Xx"}}}.dump()).status, 400);
  EXPECT_EQ(p.neighbors("{not json").status, 400);
  EXPECT_EQ(p.neighbors(json{{"smiles", 5}}.dump()).status, 400);
  EXPECT_EQ(p.neighbors(json{{"smiles", "CCO"}, {"n", 0}}.dump()).status, 422);
  EXPECT_EQ(p.neighbors(json{{"smiles", "CCO"}, {"n", 101}}.dump()).status, 422);
  EXPECT_EQ(p.neighbors(json{{"smiles", std::vector<std::string>(101, "CCO")}}.dump()).status, 413);

  const auto err = body(p.neighbors("{not json"));
  EXPECT_EQ(err["code"], 400);
  EXPECT_TRUE(err.contains("message") && err.contains("detail"));

  test::TempDir other;
  Platform empty(config_in(other), nullptr);
  EXPECT_EQ(empty.neighbors(json{{"smiles", "CCO"}}.dump()).status, 503);
  EXPECT_FALSE(body(empty.health())["index_loaded"]);
}

TEST(Neighbors, FileSourcedIndexRejectsUnknownMolecules) {
  auto loaded = corpus_index(50);
  IndexMeta meta;
  meta.source = "file";
  auto index = std::make_shared<LoadedIndex>(*loaded);
  index->meta = meta;
  const std::string known = index->index.vectors().ids[3];
  EXPECT_EQ(query_neighbors(*index, known, {}).hits[0].smiles, known);
  EXPECT_THROW(query_neighbors(*index, "CCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCC", {}), NotEmbeddable);
}

TEST(Datasets, UploadEvalAndProjection) {
  test::TempDir dir;
  Platform p(config_in(dir), shared_index());

  std::string csv = labeled_csv(120);
  csv += "C1CC(,odd,3\n";
  auto up = p.upload(csv, "fixture.csv", "", std::nullopt);
  ASSERT_EQ(up.status, 201) << up.body;
  const auto record = body(up);
  EXPECT_EQ(record["rows"], 120);
  EXPECT_EQ(record["rejects"].size(), 1u);
  EXPECT_EQ(record["rejects"][0]["line"], 122);
  const std::string id = record["dataset_id"];
  EXPECT_EQ(body(p.dataset(id))["name"], "fixture.csv");

  EXPECT_EQ(p.upload("mol,label\nCCO,a\n", "x.csv", "", std::nullopt).status, 422);
  EXPECT_EQ(p.upload("smiles\nC1CC(\n", "x.csv", "", std::nullopt).status, 422);
  EXPECT_EQ(p.upload("CCO\n", "x.txt", "", std::string("junk")).status, 422);
  EXPECT_EQ(p.dataset("ds_missing").status, 404);
  EXPECT_EQ(p.start_eval("ds_missing", "{}").status, 404);

  auto ev = p.start_eval(id, json{{"mode", "full"}, {"seed", 3}}.dump());
  ASSERT_EQ(ev.status, 202) << ev.body;
  const std::string eval_job = body(ev)["job_id"];
  EXPECT_EQ(wait_done(p, eval_job).state, JobState::Done);
  const auto report = body(p.job(eval_job))["result"];
  EXPECT_EQ(report["n_test"], 24);
  EXPECT_TRUE(report["classification"].contains("confusion"));
  EXPECT_TRUE(report["regression"]["r2_per_target"].contains("value"));

  auto pr = p.start_projection(id, json{{"perplexity", 10}, {"iterations", 300}, {"seed", 1}}.dump());
  ASSERT_EQ(pr.status, 202) << pr.body;
  const std::string proj_job = body(pr)["job_id"];
  EXPECT_EQ(p.start_projection(id, "{}").status, 409);
  EXPECT_EQ(wait_done(p, proj_job).state, JobState::Done);
  const auto csv_out = p.job_result(proj_job);
  EXPECT_EQ(csv_out.content_type, "text/csv");
  EXPECT_EQ(csv_out.body.substr(0, 13), "id,x,y,label\n");
  EXPECT_EQ(std::count(csv_out.body.begin(), csv_out.body.end(), '\n'), 121);
  EXPECT_EQ(p.cancel_job(proj_job).status, 409);
  EXPECT_EQ(p.job("job_missing").status, 404);

  auto unlabeled = body(p.upload("CCO\nCCN\nCCC\n", "plain.txt", "plain", std::nullopt));
  EXPECT_EQ(p.start_eval(unlabeled["dataset_id"], json{{"mode", "classification"}}.dump()).status, 409);
  EXPECT_EQ(p.start_eval(id, json{{"mode", "nonsense"}}.dump()).status, 422);
}

TEST(Datasets, PersistenceRoundTrip) {
  test::TempDir dir;
  std::string id, job;
  json result;
  {
    Platform p(config_in(dir), shared_index());
    id = body(p.upload(labeled_csv(60), "a.csv", "round trip", std::nullopt))["dataset_id"];
    job = body(p.start_eval(id, json{{"mode", "classification"}}.dump()))["job_id"];
    wait_done(p, job);
    result = body(p.job(job))["result"];
  }
  Platform restarted(config_in(dir), shared_index());
  const auto ds = body(restarted.dataset(id));
  EXPECT_EQ(ds["name"], "round trip");
  EXPECT_EQ(ds["rows"], 60);
  const auto j = body(restarted.job(job));
  EXPECT_EQ(j["state"], "done");
  EXPECT_EQ(j["result"], result);
  auto again = restarted.start_eval(id, json{{"mode", "classification"}}.dump());
  EXPECT_EQ(again.status, 202);
  wait_done(restarted, body(again)["job_id"]);
  EXPECT_EQ(body(restarted.job(body(again)["job_id"]))["result"], result);
}

TEST(Depict, HighlightsCommonSubstructure) {
  test::TempDir dir;
  Platform p(config_in(dir), nullptr);
  const auto r = p.depict("Cc1ccccc1", "c1ccccc1");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.content_type, "image/svg+xml");
  EXPECT_NE(r.body.find("atom highlight"), std::string::npos);
  EXPECT_EQ(p.depict("C1CC(", "").status, 400);
}

TEST(Pubchem, CachingTimeoutsAndErrors) {
  test::TempDir dir;
  auto cfg = config_in(dir);
  int calls = 0;
  bool time_out = false;
  std::string last_url;
  Transport fake = [&](const std::string& url, std::chrono::milliseconds) {
    ++calls;
    last_url = url;
    if (time_out) throw TransportTimeout("slow");
    if (url.find("Threshold=99") != std::string::npos) return TransportResponse{404, ""};
    if (url.find("Threshold=50") != std::string::npos) return TransportResponse{500, "oops"};
    return TransportResponse{200, R"({"IdentifierList":{"CID":[702,1176]}})"};
  };

  Platform off(cfg, nullptr, fake);
  EXPECT_EQ(off.pubchem("CCO", "").status, 501);

  cfg.pubchem_enabled = true;
  cfg.pubchem_cache_ttl_s = 0;
  test::TempDir dir2;
  cfg.data_dir = dir2 / "data";
  Platform p(cfg, nullptr, fake);
  auto r = body(p.pubchem("OCC", ""));
  EXPECT_EQ(r["cids"], json::array({702, 1176}));
  EXPECT_EQ(r["threshold"], 90);
  EXPECT_NE(last_url.find("fastsimilarity_2d/smiles/"), std::string::npos);
  EXPECT_NE(last_url.find("Threshold=90"), std::string::npos);
  EXPECT_TRUE(body(p.pubchem("CCO", "99"))["cids"].empty());
  EXPECT_EQ(p.pubchem("CCO", "50").status, 502);
  EXPECT_EQ(p.pubchem("CCO", "abc").status, 400);
  EXPECT_EQ(p.pubchem("C1CC(", "").status, 400);

  time_out = true;
  const auto stale = body(p.pubchem("CCO", ""));
  EXPECT_TRUE(stale["stale"]);
  EXPECT_EQ(stale["cids"].size(), 2u);
  EXPECT_EQ(p.pubchem("CCCC", "").status, 504);

  cfg.pubchem_cache_ttl_s = 3600;
  test::TempDir dir3;
  cfg.data_dir = dir3 / "data";
  time_out = false;
  Platform cached(cfg, nullptr, fake);
  cached.pubchem("CCO", "");
  const int before = calls;
  EXPECT_TRUE(body(cached.pubchem("CCO", ""))["cached"]);
  EXPECT_EQ(calls, before);
}

class HttpFixture : public ::testing::Test {
 protected:
  void start(ServiceConfig cfg) {
    platform_ = std::make_unique<Platform>(std::move(cfg), shared_index());
    server_ = std::make_unique<HttpServer>(*platform_);
    port_ = server_->bind("127.0.0.1", 0);
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_->listen(); });
    while (!server_->running()) std::this_thread::sleep_for(1ms);
  }
  void TearDown() override {
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
  }
  httplib::Client client() { return httplib::Client("127.0.0.1", port_); }

  test::TempDir dir_;
  std::unique_ptr<Platform> platform_;
  std::unique_ptr<HttpServer> server_;
  std::thread thread_;
  int port_ = 0;
};

TEST_F(HttpFixture, RoutesAndJsonErrors) {
  start(config_in(dir_));
  auto c = client();
  auto health = c.Get("/v1/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  EXPECT_EQ(json::parse(health->body)["rows"], 500);

  const std::string smiles = shared_index()->index.vectors().ids[0];
  auto nb = c.Post("/v1/neighbors", json{{"smiles", {smiles}}, {"n", 3}}.dump(), "application/json");
  ASSERT_TRUE(nb);
  EXPECT_EQ(nb->status, 200);
  EXPECT_EQ(json::parse(nb->body)["results"][0]["hits"][0]["smiles"], smiles);

  auto missing = c.Get("/v1/nowhere");
  EXPECT_EQ(missing->status, 404);
  EXPECT_EQ(json::parse(missing->body)["code"], 404);
  EXPECT_EQ(c.Get("/v1/datasets/ds_nope")->status, 404);
  EXPECT_EQ(c.Delete("/v1/jobs/job_nope")->status, 404);
  EXPECT_EQ(c.Get("/v1/depict")->status, 400);
  auto svg = c.Get("/v1/depict?smiles=c1ccccc1O");
  EXPECT_EQ(svg->status, 200);
  EXPECT_EQ(svg->get_header_value("Content-Type"), "image/svg+xml");
  EXPECT_EQ(c.Get("/v1/pubchem/similar?smiles=CCO")->status, 501);

  httplib::MultipartFormDataItems items = {{"file", labeled_csv(40), "up.csv", "text/csv"},
                                           {"name", "uploaded", "", ""}};
  auto up = c.Post("/v1/datasets", items);
  ASSERT_TRUE(up);
  EXPECT_EQ(up->status, 201) << up->body;
  const std::string id = json::parse(up->body)["dataset_id"];
  auto ds = c.Get("/v1/datasets/" + id);
  EXPECT_EQ(json::parse(ds->body)["name"], "uploaded");
  auto ev = c.Post("/v1/datasets/" + id + "/eval", R"({"mode":"classification"})", "application/json");
  EXPECT_EQ(ev->status, 202);
  const std::string job = json::parse(ev->body)["job_id"];
  platform_->jobs().wait(job, 60s);
  auto st = c.Get("/v1/jobs/" + job);
  EXPECT_EQ(json::parse(st->body)["state"], "done");
  EXPECT_EQ(c.Post("/v1/datasets", "x", "text/plain")->status, 400);
}

TEST_F(HttpFixture, ApiKeyAndBodyLimit) {
  auto cfg = config_in(dir_);
  cfg.api_key = "sekret";
  cfg.max_upload_bytes = 4096;
  start(cfg);
  auto c = client();
  EXPECT_EQ(c.Get("/v1/health")->status, 200);
  auto denied = c.Post("/v1/neighbors", R"({"smiles":"CCO"})", "application/json");
  EXPECT_EQ(denied->status, 401);
  EXPECT_EQ(json::parse(denied->body)["code"], 401);
  c.set_default_headers({{"X-API-Key", "sekret"}});
  EXPECT_EQ(c.Post("/v1/neighbors", R"({"smiles":"CCO"})", "application/json")->status, 200);
  auto big = c.Post("/v1/neighbors", std::string(10000, ' '), "application/json");
  ASSERT_TRUE(big);
  EXPECT_EQ(big->status, 413);
}
