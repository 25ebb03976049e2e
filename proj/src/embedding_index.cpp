#include "csc/embedding_index.hpp"

#include <charconv>
#include <fstream>

namespace csc {
namespace {

bool parse_int(std::string_view s, long long& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_float(std::string_view s, float& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

// "/c/en/warm" -> "warm"; "/c/fr/chaud" -> nullopt; "warm" -> "warm".
std::optional<std::string> bare_term(std::string_view token) {
  if (token.starts_with("/c/")) {
    token.remove_prefix(3);
    auto slash = token.find('/');
    if (slash == std::string_view::npos || token.substr(0, slash) != "en") return std::nullopt;
    token.remove_prefix(slash + 1);
    token = token.substr(0, token.find('/'));
  }
  if (token.empty()) return std::nullopt;
  return ascii_lower(token);
}

}  // namespace

EmbeddingIndex load_embeddings(const std::filesystem::path& path, const TermSet* term_filter,
                               EmbeddingLoadReport* report) {
  LineReader reader(path);
  EmbeddingLoadReport rep;
  rep.compressed = reader.compressed();

  std::vector<std::string> terms;
  std::vector<float> values;
  TermSet seen;
  Eigen::Index dim = 0;
  std::vector<float> row;

  std::string line;
  while (reader.next(line)) {
    ++rep.lines;
    auto tokens = split_ws(line);
    if (tokens.empty()) {
      ++rep.malformed;
      continue;
    }
    if (rep.lines == 1 && tokens.size() == 2) {
      long long count = 0, d = 0;
      if (parse_int(tokens[0], count) && parse_int(tokens[1], d) && d > 0) {
        rep.header = true;
        dim = static_cast<Eigen::Index>(d);
        continue;
      }
    }
    if (tokens.size() < 2) {
      ++rep.malformed;
      continue;
    }
    row.resize(tokens.size() - 1);
    bool ok = true;
    for (std::size_t i = 1; i < tokens.size() && ok; ++i) ok = parse_float(tokens[i], row[i - 1]);
    if (!ok) {
      ++rep.malformed;
      continue;
    }
    const auto d = static_cast<Eigen::Index>(row.size());
    if (dim == 0) dim = d;
    if (d != dim) {
      throw Error(ErrorCode::data_error,
                  "inconsistent dimensionality at line " + std::to_string(rep.lines) + ": expected " +
                      std::to_string(dim) + ", got " + std::to_string(d),
                  path.string());
    }
    bool nonzero = std::any_of(row.begin(), row.end(), [](float v) { return v != 0.0f; });
    if (!nonzero) {
      ++rep.malformed;
      continue;
    }
    auto term = bare_term(tokens[0]);
    if (!term || (term_filter != nullptr && !term_filter->contains(*term))) {
      ++rep.filtered;
      continue;
    }
    if (!seen.insert(*term).second) {
      ++rep.duplicates;
      continue;
    }
    terms.push_back(std::move(*term));
    values.insert(values.end(), row.begin(), row.end());
    ++rep.records;
  }

  const std::size_t data_lines = rep.lines - (rep.header ? 1 : 0);
  if (data_lines > 0 && rep.malformed * 2 > data_lines) {
    throw Error(ErrorCode::data_error,
                "more than half of the lines are malformed (" + std::to_string(rep.malformed) + "/" +
                    std::to_string(data_lines) + ")",
                path.string());
  }
  if (terms.empty()) throw Error(ErrorCode::data_error, "no embedding records loaded", path.string());

  EmbeddingIndex::Matrix m =
      Eigen::Map<EmbeddingIndex::Matrix>(values.data(), static_cast<Eigen::Index>(terms.size()), dim);
  if (report != nullptr) *report = rep;
  return EmbeddingIndex(std::move(terms), std::move(m), path.string());
}

void save_embedding_cache(const EmbeddingIndex& index, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string(), path.string());
  out.write(kEmbeddingCacheMagic.data(), static_cast<std::streamsize>(kEmbeddingCacheMagic.size()));
  binary::write_u32(out, static_cast<std::uint32_t>(index.dim()));
  binary::write_u64(out, index.size());
  const auto& m = index.vectors();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    binary::write_string(out, index.terms()[static_cast<std::size_t>(r)]);
    for (Eigen::Index c = 0; c < m.cols(); ++c) binary::write_f32(out, m(r, c));
  }
  if (!out) throw Error(ErrorCode::io_error, "write failed: " + path.string(), path.string());
}

EmbeddingIndex load_embedding_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string(), path.string());
  binary::expect_magic(in, kEmbeddingCacheMagic, "embedding cache");
  const auto dim = binary::read_u32(in);
  const auto count = binary::read_u64(in);
  if (dim == 0 || count == 0) throw Error(ErrorCode::format_error, "embedding cache is empty", path.string());
  std::vector<std::string> terms;
  terms.reserve(count);
  EmbeddingIndex::Matrix m(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    terms.push_back(binary::read_string(in));
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = binary::read_f32(in);
  }
  // Rows were normalized when the cache was written; re-normalizing could
  // move the last ulp, so the stored bits are kept as-is.
  return EmbeddingIndex(std::move(terms), std::move(m), path.string(), EmbeddingIndex::prenormalized);
}

EmbeddingIndex load_embeddings_any(const std::filesystem::path& path, EmbeddingLoadReport* report) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::io_error, "missing file " + path.string(), path.string());
  }
  if (has_magic(path, kEmbeddingCacheMagic)) return load_embedding_cache(path);
  return load_embeddings(path, nullptr, report);
}

}  // namespace csc
