#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "csc/concept_graph.hpp"
#include "csc/error.hpp"

namespace csc {

struct HttpResponse {
  int status = 0;
  std::string body;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  // Throws TransportError on connection failure or timeout.
  virtual HttpResponse get(const std::string& url, std::chrono::milliseconds timeout) = 0;
};

// Plain-HTTP client over cpp-httplib.
class HttplibTransport final : public HttpTransport {
 public:
  HttpResponse get(const std::string& url, std::chrono::milliseconds timeout) override;
};

// Replays recorded responses: {"endpoint": ..., "interactions": {url: body}}.
// Unrecorded URLs fail as connection errors.
class CassetteTransport final : public HttpTransport {
 public:
  explicit CassetteTransport(const std::filesystem::path& path);
  HttpResponse get(const std::string& url, std::chrono::milliseconds timeout) override;
  const std::string& endpoint() const noexcept { return endpoint_; }
  std::size_t calls() const noexcept { return calls_.load(); }

 private:
  std::string endpoint_;
  std::unordered_map<std::string, std::string> interactions_;
  std::atomic<std::size_t> calls_{0};
};

struct RemoteGraphOptions {
  std::string endpoint;                                   // e.g. "http://api.conceptnet.io"
  std::optional<std::filesystem::path> cache_dir;         // no disk cache when empty
  std::chrono::milliseconds min_interval{1100};           // rate limit between network calls
  std::chrono::milliseconds timeout{10000};
  std::string language = "en";
  int page_limit = 1000;
};

// GraphBackend over a ConceptNet-style query API. Responses are cached on
// disk keyed by request URL (endpoint + query + relation); cache hits never
// touch the transport.
class RemoteGraph final : public GraphBackend {
 public:
  RemoteGraph(RemoteGraphOptions options, std::shared_ptr<HttpTransport> transport);

  std::vector<Edge> edges(std::string_view lemma, const Relation& relation,
                          Direction direction = Direction::outgoing) const override;
  bool has_sense(std::string_view lemma, Pos pos) const override;
  bool contains(std::string_view lemma) const override;

  // Request URL for a query; parameter order is node, start, end, rel, limit.
  std::string query_url(const std::map<std::string, std::string>& params) const;
  std::size_t network_calls() const noexcept { return network_calls_.load(); }

 private:
  std::string fetch(const std::string& url) const;
  std::vector<Assertion> fetch_assertions(const std::string& url) const;

  RemoteGraphOptions options_;
  std::shared_ptr<HttpTransport> transport_;
  mutable std::mutex rate_mutex_;
  mutable std::chrono::steady_clock::time_point next_request_{};
  mutable std::mutex cache_mutex_;
  mutable std::map<std::string, std::shared_ptr<std::mutex>> key_locks_;
  mutable std::atomic<std::size_t> network_calls_{0};
};

// Uses `primary` and falls back to `fallback` whenever the primary raises a
// TransportError.
class FallbackGraph final : public GraphBackend {
 public:
  FallbackGraph(std::shared_ptr<const GraphBackend> primary, std::shared_ptr<const GraphBackend> fallback)
      : primary_(std::move(primary)), fallback_(std::move(fallback)) {}

  std::vector<Edge> edges(std::string_view lemma, const Relation& relation,
                          Direction direction = Direction::outgoing) const override;
  bool has_sense(std::string_view lemma, Pos pos) const override;
  bool contains(std::string_view lemma) const override;
  std::size_t degraded_calls() const noexcept { return degraded_.load(); }

 private:
  template <typename F>
  auto attempt(F&& f) const;

  std::shared_ptr<const GraphBackend> primary_;
  std::shared_ptr<const GraphBackend> fallback_;
  mutable std::atomic<std::size_t> degraded_{0};
};

// Edges in a query-API response body, filtered like dump ingestion.
std::vector<Assertion> parse_query_response(const std::string& body);

}  // namespace csc
