#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "csc/error.hpp"
#include "csc/io.hpp"

namespace csc {

// Immutable term -> unit vector table. Rows of `vectors()` follow insertion
// order; lookups are case-normalized.
template <typename Scalar>
class BasicEmbeddingIndex {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using ConstRow = decltype(std::declval<const Matrix&>().row(0));

  BasicEmbeddingIndex() = default;

  struct PrenormalizedTag {};
  static constexpr PrenormalizedTag prenormalized{};

  // Rows of `vectors` are L2-normalized here; zero rows and duplicate terms
  // are rejected.
  BasicEmbeddingIndex(std::vector<std::string> terms, Matrix vectors, std::string source_id = {})
      : terms_(std::move(terms)), vectors_(std::move(vectors)), source_id_(std::move(source_id)) {
    build(true);
  }

  // Rows are kept bit-for-bit; each must already have norm 1 +- 1e-6.
  BasicEmbeddingIndex(std::vector<std::string> terms, Matrix vectors, std::string source_id, PrenormalizedTag)
      : terms_(std::move(terms)), vectors_(std::move(vectors)), source_id_(std::move(source_id)) {
    build(false);
  }

  Eigen::Index dim() const noexcept { return vectors_.cols(); }
  std::size_t size() const noexcept { return terms_.size(); }
  const std::vector<std::string>& terms() const noexcept { return terms_; }
  const Matrix& vectors() const noexcept { return vectors_; }
  const std::string& source_id() const noexcept { return source_id_; }

  std::optional<Eigen::Index> find(std::string_view term) const {
    auto it = rows_.find(normalize_key(term));
    if (it == rows_.end()) return std::nullopt;
    return it->second;
  }

  bool contains(std::string_view term) const { return find(term).has_value(); }

  ConstRow vector(std::string_view term) const {
    auto r = find(term);
    if (!r) throw MissingTermError(std::string(term));
    return vectors_.row(*r);
  }

  // Equality covers terms, order and vector contents; source_id is provenance
  // only.
  friend bool operator==(const BasicEmbeddingIndex& a, const BasicEmbeddingIndex& b) {
    return a.terms_ == b.terms_ && a.vectors_.rows() == b.vectors_.rows() &&
           a.vectors_.cols() == b.vectors_.cols() && a.vectors_ == b.vectors_;
  }

 private:
  void build(bool normalize) {
    if (static_cast<Eigen::Index>(terms_.size()) != vectors_.rows()) {
      throw Error(ErrorCode::data_error, "term count does not match vector rows");
    }
    if (terms_.empty() || vectors_.cols() == 0) {
      throw Error(ErrorCode::data_error, "empty embedding index");
    }
    rows_.reserve(terms_.size());
    for (Eigen::Index r = 0; r < vectors_.rows(); ++r) {
      auto& term = terms_[static_cast<std::size_t>(r)];
      term = ascii_lower(term);
      const double norm = vectors_.row(r).template cast<double>().norm();
      if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw Error(ErrorCode::data_error, "zero or non-finite vector for term " + term, term);
      }
      if (normalize) {
        vectors_.row(r) = (vectors_.row(r).template cast<double>() / norm).template cast<Scalar>();
      } else if (std::abs(norm - 1.0) > 1e-6) {
        throw Error(ErrorCode::data_error, "vector for term " + term + " is not unit length", term);
      }
      if (!rows_.emplace(term, r).second) {
        throw Error(ErrorCode::data_error, "duplicate term " + term, term);
      }
    }
  }

  static std::string normalize_key(std::string_view term) { return ascii_lower(term); }

  std::vector<std::string> terms_;
  Matrix vectors_;
  std::unordered_map<std::string, Eigen::Index> rows_;
  std::string source_id_;
};

using EmbeddingIndex = BasicEmbeddingIndex<float>;

// Cosine similarity of two unit rows, accumulated in double and clamped to
// [-1, 1]. Symmetric bit-for-bit.
template <typename DerivedA, typename DerivedB>
double cosine(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  const double d = a.template cast<double>().dot(b.template cast<double>());
  return std::clamp(d, -1.0, 1.0);
}

template <typename Scalar>
double similarity(std::string_view a, std::string_view b, const BasicEmbeddingIndex<Scalar>& index) {
  return cosine(index.vector(a), index.vector(b));
}

struct Neighbor {
  std::string term;
  double similarity = 0.0;
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// Exhaustive scan. Ordered by (-similarity, term); never returns the query
// or any excluded term.
template <typename Scalar>
std::vector<Neighbor> top_k_neighbors(std::string_view query, std::size_t k,
                                      const BasicEmbeddingIndex<Scalar>& index,
                                      const TermSet& exclude = {}) {
  if (k == 0) throw Error(ErrorCode::precondition, "top_k_neighbors: k must be >= 1");
  const auto q = index.find(query);
  if (!q) throw MissingTermError(std::string(query));
  const auto qrow = index.vectors().row(*q);

  std::vector<std::pair<double, Eigen::Index>> scored;
  scored.reserve(index.size());
  for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(index.size()); ++r) {
    if (r == *q) continue;
    const auto& term = index.terms()[static_cast<std::size_t>(r)];
    if (!exclude.empty() && exclude.contains(term)) continue;
    scored.emplace_back(cosine(qrow, index.vectors().row(r)), r);
  }
  auto before = [&](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return index.terms()[static_cast<std::size_t>(x.second)] <
           index.terms()[static_cast<std::size_t>(y.second)];
  };
  const std::size_t n = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(), before);

  std::vector<Neighbor> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({index.terms()[static_cast<std::size_t>(scored[i].second)], scored[i].first});
  }
  return out;
}

struct EmbeddingLoadReport {
  std::size_t lines = 0;
  std::size_t records = 0;
  std::size_t malformed = 0;
  std::size_t duplicates = 0;
  std::size_t filtered = 0;  // outside term_filter or not English URIs
  bool header = false;
  bool compressed = false;
};

// Whitespace-separated text: "term f1 ... fd" per line, optional "count dim"
// header, graph URIs ("/c/en/warm") reduced to bare terms. Plain or gzip.
EmbeddingIndex load_embeddings(const std::filesystem::path& path, const TermSet* term_filter = nullptr,
                               EmbeddingLoadReport* report = nullptr);

// Binary cache: "CSEMB1", u32 dim, u64 count, then per term a u32-prefixed
// UTF-8 term and dim little-endian float32 values.
inline constexpr std::string_view kEmbeddingCacheMagic = "CSEMB1";
void save_embedding_cache(const EmbeddingIndex& index, const std::filesystem::path& path);
EmbeddingIndex load_embedding_cache(const std::filesystem::path& path);

// Cache or text, chosen by the file's leading bytes.
EmbeddingIndex load_embeddings_any(const std::filesystem::path& path, EmbeddingLoadReport* report = nullptr);

}  // namespace csc
