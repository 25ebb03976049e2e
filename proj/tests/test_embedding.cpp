#include <doctest.h>
#include <zlib.h>

#include "csc/embedding_index.hpp"
#include "support.hpp"

using namespace csc;
using namespace csc::testing;

namespace {

void write_gzip(const std::filesystem::path& p, const std::string& text) {
  gzFile f = gzopen(p.string().c_str(), "wb");
  REQUIRE(f != nullptr);
  gzwrite(f, text.data(), static_cast<unsigned>(text.size()));
  gzclose(f);
}

}  // namespace

TEST_CASE("header line is skipped and rows are normalized") {
  TempDir dir;
  write_file(dir / "e.txt", "2 4\nwarm 1 0 0 0\ncold 0 2 0 0\n");
  EmbeddingLoadReport report;
  auto index = load_embeddings(dir / "e.txt", nullptr, &report);
  CHECK(report.header);
  CHECK(index.size() == 2);
  CHECK(index.dim() == 4);
  const auto cold = index.vector("cold");
  CHECK(cold(0) == 0.0f);
  CHECK(cold(1) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(cold(2) == 0.0f);
  CHECK(cold(3) == 0.0f);
}

TEST_CASE("concept URIs are reduced to bare terms") {
  TempDir dir;
  write_file(dir / "e.txt", "/c/en/warm 1 0 0 0\n/c/en/cold 0 1 0 0\n");
  auto index = load_embeddings(dir / "e.txt");
  CHECK(index.contains("warm"));
  CHECK(index.contains("cold"));
  CHECK_FALSE(index.contains("/c/en/warm"));
}

TEST_CASE("term filter keeps only listed terms") {
  TempDir dir;
  write_file(dir / "e.txt", "warm 1 0\ncold 0 1\ncozy 1 1\n");
  TermSet filter{"warm", "cozy"};
  EmbeddingLoadReport report;
  auto index = load_embeddings(dir / "e.txt", &filter, &report);
  CHECK(index.size() == 2);
  CHECK_FALSE(index.contains("cold"));
  CHECK(report.filtered == 1);
}

TEST_CASE("bundled embedding file matches the independent line count") {
  const auto& o = oracle();
  EmbeddingLoadReport report;
  auto index = load_embeddings(fixture_dir() / "embeddings.txt", nullptr, &report);
  CHECK(report.header);
  CHECK(report.lines - 1 == o["embedding_record_lines"].get<std::size_t>());
  CHECK(report.malformed == o["embedding_malformed"].get<std::size_t>());
  CHECK(report.duplicates == o["embedding_duplicates"].get<std::size_t>());
  CHECK(index.size() == o["embedding_terms"].get<std::size_t>());
  CHECK(index.size() == report.lines - 1 - report.malformed - report.duplicates);
  CHECK(report.records == index.size());
  CHECK(index.contains("kinetic"));
  CHECK(index.contains("warm"));
}

TEST_CASE("similarity on the bundled file agrees with the dot-product oracle") {
  auto index = load_embeddings(fixture_dir() / "embeddings.txt");
  for (const auto& [pair, expected] : oracle()["similarity"].items()) {
    const auto bar = pair.find('|');
    const auto a = pair.substr(0, bar), b = pair.substr(bar + 1);
    CAPTURE(pair);
    CHECK(std::abs(similarity(a, b, index) - expected.get<double>()) <= 1e-6);
    CHECK(similarity(a, b, index) == similarity(b, a, index));
  }
}

TEST_CASE("similarity identity, orthogonality and missing terms") {
  std::vector<std::string> terms{"a", "b", "c"};
  EmbeddingIndex::Matrix m(3, 4);
  m << 1, 0, 0, 0, 0, 1, 0, 0, 0.3f, -0.2f, 0.9f, 0.1f;
  EmbeddingIndex index(terms, m);
  for (const auto& t : terms) CHECK(std::abs(similarity(t, t, index) - 1.0) <= 1e-6);
  CHECK(similarity("a", "b", index) == 0.0);
  try {
    similarity("a", "zebra", index);
    FAIL("expected a missing-term error");
  } catch (const MissingTermError& e) {
    CHECK(e.term() == "zebra");
    CHECK(e.code() == ErrorCode::missing_term);
  }
}

TEST_CASE("top_k_neighbors ordering, exclusion and argument checks") {
  std::vector<std::string> terms{"q", "b", "a", "c"};
  EmbeddingIndex::Matrix m(4, 2);
  m << 1, 0, 1, 1, 1, 1, 0, 1;
  EmbeddingIndex index(terms, m);

  auto top = top_k_neighbors("q", 3, index);
  REQUIRE(top.size() == 3);
  CHECK(top[0].term == "a");  // tie with b broken by term
  CHECK(top[1].term == "b");
  CHECK(top[2].term == "c");
  CHECK(top_k_neighbors("q", 10, index).size() == 3);

  CHECK(top_k_neighbors("q", 5, index, TermSet{"q", "a", "b", "c"}).empty());
  auto some = top_k_neighbors("q", 5, index, TermSet{"a"});
  REQUIRE(some.size() == 2);
  CHECK(some[0].term == "b");

  CHECK_THROWS_AS(top_k_neighbors("q", 0, index), Error);
  CHECK_THROWS_AS(top_k_neighbors("nope", 1, index), MissingTermError);
}

TEST_CASE("binary cache round-trips bit for bit") {
  TempDir dir;
  auto index = load_embeddings(fixture_dir() / "embeddings.txt");
  save_embedding_cache(index, dir / "e.bin");
  CHECK(has_magic(dir / "e.bin", kEmbeddingCacheMagic));
  auto back = load_embedding_cache(dir / "e.bin");
  CHECK(back == index);
  CHECK(load_embeddings_any(dir / "e.bin") == index);
  CHECK(similarity("kinetic", "warm", back) == similarity("kinetic", "warm", index));
}

TEST_CASE("gzip input is detected from content") {
  TempDir dir;
  const std::string text = "3 2\nwarm 1 0\ncold 0 1\ncozy 1 1\n";
  write_gzip(dir / "e.dat", text);
  EmbeddingLoadReport report;
  auto index = load_embeddings(dir / "e.dat", nullptr, &report);
  CHECK(report.compressed);
  CHECK(index.size() == 3);
  write_file(dir / "plain.gz", text);
  CHECK(load_embeddings(dir / "plain.gz") == index);
}

TEST_CASE("truncated cache is a format error") {
  TempDir dir;
  auto index = load_embeddings(fixture_dir() / "embeddings.txt");
  save_embedding_cache(index, dir / "e.bin");
  auto bytes = read_file(dir / "e.bin");
  write_file(dir / "cut.bin", bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(load_embedding_cache(dir / "cut.bin"), Error);
}

TEST_CASE("zero vectors and an empty file are rejected") {
  TempDir dir;
  write_file(dir / "z.txt", "warm 0 0 0\n");
  CHECK_THROWS_AS(load_embeddings(dir / "z.txt"), Error);
  write_file(dir / "empty.txt", "");
  CHECK_THROWS_AS(load_embeddings(dir / "empty.txt"), Error);
  CHECK_THROWS_AS(load_embeddings(dir / "missing.txt"), Error);
}
