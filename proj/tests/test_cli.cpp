#include <doctest.h>
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>

#include "csc/config.hpp"
#include "support.hpp"

using namespace csc;
using namespace csc::testing;

namespace {

struct Result {
  int status = -1;
  std::string out;
};

// Runs the csc binary with `args`; stderr is folded into the output.
Result run_cli(const std::string& args) {
  const std::string cmd = std::string("'") + CSC_CLI + "' " + args + " 2>&1";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) r.out.append(buf, n);
  const int raw = pclose(p);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string quoted(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

// Fixture config rewritten with absolute asset paths and one override.
std::filesystem::path config_with(const TempDir& dir, const std::string& key, const std::string& value) {
  auto j = nlohmann::json::parse(read_file(fixture_config()));
  for (auto& [k, v] : j["assets"].items()) v = (fixture_dir() / v.get<std::string>()).lexically_normal().string();
  j["assets"][key] = value;
  j["session_store"] = (dir / "sessions").string();
  const auto path = dir / "config.json";
  write_file(path, j.dump(2));
  return path;
}

}  // namespace

TEST_CASE("config paths resolve against the config directory") {
  auto c = ServiceConfig::from_file(fixture_config());
  CHECK(c.assets.embeddings == fixture_dir() / "embeddings.txt");
  CHECK(c.assets.brackets.lexically_normal() == (data_dir() / "brackets.json").lexically_normal());
  CHECK(c.port == 8080);
  CHECK_NOTHROW(c.validate());
  CHECK_THROWS_AS(ServiceConfig::from_json_text("{\"listen\": {\"port\": \"x\"}}", "."), Error);
}

TEST_CASE("config path falls back to the environment") {
  CHECK(resolve_config_path(std::filesystem::path("a.json")) == std::filesystem::path("a.json"));
  ::setenv("CSC_CONFIG", "/tmp/from-env.json", 1);
  CHECK(resolve_config_path(std::nullopt) == std::filesystem::path("/tmp/from-env.json"));
  ::unsetenv("CSC_CONFIG");
  CHECK_FALSE(resolve_config_path(std::nullopt).has_value());
}

TEST_CASE("validation names the missing asset") {
  TempDir dir;
  auto c = ServiceConfig::from_file(config_with(dir, "model", (dir / "nope.csgbt").string()));
  try {
    c.validate();
    FAIL("expected an io error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::io_error);
    CHECK(std::string(e.what()).find("nope.csgbt") != std::string::npos);
  }
}

TEST_CASE("run on brief A prints a completed character space") {
  auto r = run_cli("run --config " + quoted(fixture_config()) + " --brief-file " +
                   quoted(data_dir() / "briefs" / "brief_a.txt"));
  CHECK(r.status == 0);
  CHECK(r.out.find("w1 (top): kinetic") != std::string::npos);
  CHECK(r.out.find("w2 (right): warm (warmth)") != std::string::npos);
  CHECK(r.out.find("w3 (bottom): calm") != std::string::npos);
  CHECK(r.out.find("w4 (left): cold") != std::string::npos);
  CHECK(r.out.find("explanation: My design concept is kinetic warmth.") != std::string::npos);
}

TEST_CASE("run --json prints the explanation as data") {
  auto r = run_cli("run --json --config " + quoted(fixture_config()) + " --brief-file " +
                   quoted(data_dir() / "briefs" / "brief_b.txt"));
  REQUIRE(r.status == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["character_space"]["w1"] == "harmonious");
  CHECK(j["explanation"].get<std::string>().rfind("My design concept is harmonious ", 0) == 0);
}

TEST_CASE("missing asset exits with status 2 and names the file") {
  TempDir dir;
  auto cfg = config_with(dir, "embeddings", (dir / "absent-embeddings.txt").string());
  auto r = run_cli("run --config " + quoted(cfg) + " --brief-file " + quoted(data_dir() / "briefs" / "brief_a.txt"));
  CHECK(r.status == 2);
  CHECK(r.out.find("absent-embeddings.txt") != std::string::npos);
}

TEST_CASE("usage errors exit with status 1") {
  CHECK(run_cli("").status == 1);
  CHECK(run_cli("run").status == 1);
  CHECK(run_cli("run --brief-file x --policy random").status == 1);
  ::unsetenv("CSC_CONFIG");
  CHECK(run_cli("run --brief-file x").status == 1);
}

TEST_CASE("train on a degenerate lexicon saves and reports a constant model") {
  TempDir dir;
  std::string lex;
  for (const auto& t : fixture_assets()->index->terms()) {
    if (lex.size() > 400) break;
    lex += t + "\t3\n";
  }
  write_file(dir / "flat.tsv", lex);
  auto r = run_cli("train --lexicon " + quoted(dir / "flat.tsv") + " --embeddings " +
                   quoted(fixture_dir() / "embeddings.txt") + " --output " + quoted(dir / "m.csgbt"));
  CHECK(r.status == 0);
  CHECK(r.out.find("constant labels") != std::string::npos);
  auto m = load_model(dir / "m.csgbt");
  CHECK(m.trees.empty());
  CHECK(m.base_score == 3.0);
}

TEST_CASE("train reports cross-validation and writes a loadable model") {
  TempDir dir;
  auto r = run_cli("train --lexicon " + quoted(fixture_dir() / "lexicon.tsv") + " --embeddings " +
                   quoted(fixture_dir() / "embeddings.txt") + " --output " + quoted(dir / "m.csgbt") +
                   " --max-rounds 15 --report " + quoted(dir / "r.json"));
  CHECK(r.status == 0);
  CHECK(r.out.find("best_rounds:") != std::string::npos);
  auto report = nlohmann::json::parse(read_file(dir / "r.json"));
  CHECK(report["folds"] == 10);
  CHECK(load_model(dir / "m.csgbt").trees.size() == report["best_rounds"].get<std::size_t>());
}

TEST_CASE("ingest writes caches equal to the text sources") {
  TempDir dir;
  auto e = run_cli("ingest embeddings --input " + quoted(fixture_dir() / "embeddings.txt") + " --output " +
                   quoted(dir / "e.bin"));
  CHECK(e.status == 0);
  CHECK(load_embedding_cache(dir / "e.bin") == *fixture_assets()->index);
  auto g = run_cli("ingest graph --input " + quoted(fixture_dir() / "graph.csv") + " --output " +
                   quoted(dir / "g.bin"));
  CHECK(g.status == 0);
  CHECK(g.out.find("kept: " + std::to_string(oracle()["graph_retained"].get<int>())) != std::string::npos);
  CHECK(ConceptGraph::load(dir / "g.bin") == ingest_assertions(fixture_dir() / "graph.csv"));
  CHECK(run_cli("ingest graph --input " + quoted(dir / "missing.csv") + " --output " + quoted(dir / "x")).status == 2);
}
