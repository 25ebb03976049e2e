#include "csc/remote_graph.hpp"

#include <httplib.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "csc/io.hpp"

namespace csc {
namespace {

using nlohmann::json;

std::string percent_encode(std::string_view s) {
  static constexpr char hex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '.' || c == '_' || c == '~' || c == '/') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 15]);
    }
  }
  return out;
}

std::string fnv1a_hex(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::optional<std::string> read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

char pos_letter(Pos pos) {
  switch (pos) {
    case Pos::adjective: return 'a';
    case Pos::noun: return 'n';
    case Pos::verb: return 'v';
    case Pos::adverb: return 'r';
    case Pos::unknown: break;
  }
  return '\0';
}

}  // namespace

HttpResponse HttplibTransport::get(const std::string& url, std::chrono::milliseconds timeout) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw TransportError(TransportFailure::connection, "bad url " + url);
  auto path_start = url.find('/', scheme_end + 3);
  std::string origin = url.substr(0, path_start);
  std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  auto res = client.Get(path);
  if (!res) {
    const auto err = res.error();
    const auto kind = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read
                          ? TransportFailure::timeout
                          : TransportFailure::connection;
    throw TransportError(kind, "request failed: " + httplib::to_string(err) + " (" + url + ")");
  }
  return HttpResponse{res->status, res->body};
}

CassetteTransport::CassetteTransport(const std::filesystem::path& path) {
  auto text = read_file(path);
  if (!text) throw Error(ErrorCode::io_error, "cannot open " + path.string(), path.string());
  auto doc = json::parse(*text);
  endpoint_ = doc.value("endpoint", "");
  for (auto& [url, body] : doc.at("interactions").items()) interactions_[url] = body.get<std::string>();
}

HttpResponse CassetteTransport::get(const std::string& url, std::chrono::milliseconds) {
  ++calls_;
  auto it = interactions_.find(url);
  if (it == interactions_.end()) throw TransportError(TransportFailure::connection, "cassette miss: " + url);
  return HttpResponse{200, it->second};
}

std::vector<Assertion> parse_query_response(const std::string& body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    throw TransportError(TransportFailure::malformed, std::string("malformed response: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("edges") || !doc["edges"].is_array()) {
    throw TransportError(TransportFailure::malformed, "malformed response: no edges array");
  }
  std::vector<Assertion> out;
  for (const auto& e : doc["edges"]) {
    try {
      auto s = parse_concept_uri(e.at("start").at("@id").get<std::string>());
      auto t = parse_concept_uri(e.at("end").at("@id").get<std::string>());
      auto rel = e.at("rel").at("@id").get<std::string>();
      double w = e.at("weight").get<double>();
      if (!s || !t || w < 0.0) continue;
      out.push_back(Assertion{Relation::from_name(rel), std::move(*s), std::move(*t), w});
    } catch (const json::exception& ex) {
      throw TransportError(TransportFailure::malformed, std::string("malformed edge: ") + ex.what());
    }
  }
  return out;
}

RemoteGraph::RemoteGraph(RemoteGraphOptions options, std::shared_ptr<HttpTransport> transport)
    : options_(std::move(options)), transport_(std::move(transport)) {
  while (options_.endpoint.ends_with('/')) options_.endpoint.pop_back();
  if (options_.cache_dir) std::filesystem::create_directories(*options_.cache_dir);
}

std::string RemoteGraph::query_url(const std::map<std::string, std::string>& params) const {
  std::string url = options_.endpoint + "/query?";
  bool first = true;
  for (const char* key : {"node", "start", "end", "rel", "limit"}) {
    auto it = params.find(key);
    if (it == params.end()) continue;
    if (!first) url += '&';
    first = false;
    url += key;
    url += '=';
    url += percent_encode(it->second);
  }
  return url;
}

std::string RemoteGraph::fetch(const std::string& url) const {
  std::optional<std::filesystem::path> file;
  std::shared_ptr<std::mutex> key_lock;
  if (options_.cache_dir) {
    file = *options_.cache_dir / (fnv1a_hex(url) + ".json");
    std::lock_guard lock(cache_mutex_);
    auto& slot = key_locks_[url];
    if (!slot) slot = std::make_shared<std::mutex>();
    key_lock = slot;
  }
  std::unique_lock key_guard = key_lock ? std::unique_lock(*key_lock) : std::unique_lock<std::mutex>();
  if (file) {
    if (auto cached = read_file(*file)) return *cached;
  }

  {
    std::lock_guard lock(rate_mutex_);
    auto now = std::chrono::steady_clock::now();
    if (now < next_request_) std::this_thread::sleep_until(next_request_);
    next_request_ = std::max(now, next_request_) + options_.min_interval;
  }
  ++network_calls_;
  auto res = transport_->get(url, options_.timeout);
  if (res.status < 200 || res.status >= 300) {
    throw TransportError(TransportFailure::status, "HTTP " + std::to_string(res.status) + " for " + url, res.status);
  }
  parse_query_response(res.body);  // validates; throws before any cache write
  if (file) {
    auto tmp = *file;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << res.body;
    }
    std::filesystem::rename(tmp, *file);
  }
  return res.body;
}

std::vector<Assertion> RemoteGraph::fetch_assertions(const std::string& url) const {
  auto all = parse_query_response(fetch(url));
  std::erase_if(all, [&](const Assertion& a) {
    return a.start.language != options_.language || a.end.language != options_.language ||
           a.start.lemma.find('_') != std::string::npos || a.end.lemma.find('_') != std::string::npos ||
           a.start.lemma == a.end.lemma;
  });
  return all;
}

std::vector<Edge> RemoteGraph::edges(std::string_view lemma, const Relation& relation, Direction direction) const {
  const std::string q = ascii_lower(lemma);
  const std::string node = "/c/" + options_.language + "/" + q;
  const std::string limit = std::to_string(options_.page_limit);
  std::vector<Edge> out;
  if (relation.symmetric()) {
    for (auto& a : fetch_assertions(query_url({{"node", node}, {"rel", "/r/" + relation.name}, {"limit", limit}}))) {
      if (a.relation != relation) continue;
      if (a.start.lemma == q) out.push_back({std::move(a.end), a.weight});
      else if (a.end.lemma == q) out.push_back({std::move(a.start), a.weight});
    }
  } else {
    const bool outgoing = direction == Direction::outgoing;
    auto url = query_url({{outgoing ? "start" : "end", node}, {"rel", "/r/" + relation.name}, {"limit", limit}});
    for (auto& a : fetch_assertions(url)) {
      if (a.relation != relation) continue;
      if (outgoing && a.start.lemma == q) out.push_back({std::move(a.end), a.weight});
      if (!outgoing && a.end.lemma == q) out.push_back({std::move(a.start), a.weight});
    }
  }
  std::stable_sort(out.begin(), out.end(), edge_before);
  return out;
}

bool RemoteGraph::has_sense(std::string_view lemma, Pos pos) const {
  const char letter = pos_letter(pos);
  if (letter == '\0') return false;
  const std::string node = "/c/" + options_.language + "/" + ascii_lower(lemma) + "/" + letter;
  return !fetch_assertions(query_url({{"node", node}, {"limit", "1"}})).empty();
}

bool RemoteGraph::contains(std::string_view lemma) const {
  const std::string node = "/c/" + options_.language + "/" + ascii_lower(lemma);
  return !fetch_assertions(query_url({{"node", node}, {"limit", "1"}})).empty();
}

template <typename F>
auto FallbackGraph::attempt(F&& f) const {
  try {
    return f(*primary_);
  } catch (const TransportError&) {
    ++degraded_;
    return f(*fallback_);
  }
}

std::vector<Edge> FallbackGraph::edges(std::string_view lemma, const Relation& relation, Direction direction) const {
  return attempt([&](const GraphBackend& g) { return g.edges(lemma, relation, direction); });
}

bool FallbackGraph::has_sense(std::string_view lemma, Pos pos) const {
  return attempt([&](const GraphBackend& g) { return g.has_sense(lemma, pos); });
}

bool FallbackGraph::contains(std::string_view lemma) const {
  return attempt([&](const GraphBackend& g) { return g.contains(lemma); });
}

}  // namespace csc
