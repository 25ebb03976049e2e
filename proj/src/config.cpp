#include "csc/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "csc/error.hpp"
#include "csc/remote_graph.hpp"

namespace csc {

using nlohmann::json;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

void require_file(const std::filesystem::path& p, std::string_view what) {
  if (!std::filesystem::is_regular_file(p)) {
    throw Error(ErrorCode::io_error, "missing " + std::string(what) + " file: " + p.string(), p.string());
  }
}

}  // namespace

ServiceConfig ServiceConfig::from_json_text(const std::string& text, const std::filesystem::path& base) {
  ServiceConfig c;
  try {
    const auto doc = json::parse(text);
    if (doc.contains("listen")) {
      const auto& l = doc["listen"];
      c.host = l.value("host", c.host);
      c.port = l.value("port", c.port);
    }
    const auto& a = doc.at("assets");
    c.assets.embeddings = resolve(base, a.at("embeddings").get<std::string>());
    c.assets.graph = resolve(base, a.at("graph").get<std::string>());
    c.assets.model = resolve(base, a.at("model").get<std::string>());
    c.assets.brackets = resolve(base, a.at("brackets").get<std::string>());
    c.assets.nominalizations = resolve(base, a.at("nominalizations").get<std::string>());
    c.assets.stopwords = resolve(base, a.at("stopwords").get<std::string>());
    if (a.contains("adjective_lexicon") && !a["adjective_lexicon"].is_null()) {
      c.assets.adjective_lexicon = resolve(base, a["adjective_lexicon"].get<std::string>());
    }
    if (doc.contains("session_store")) c.session_store = resolve(base, doc["session_store"].get<std::string>());
    if (doc.contains("remote_graph") && !doc["remote_graph"].is_null()) {
      const auto& r = doc["remote_graph"];
      RemoteGraphConfig rc;
      rc.endpoint = r.at("endpoint").get<std::string>();
      if (r.contains("cache_dir")) rc.cache_dir = resolve(base, r["cache_dir"].get<std::string>());
      if (r.contains("cassette")) rc.cassette = resolve(base, r["cassette"].get<std::string>());
      rc.min_interval = std::chrono::milliseconds(r.value("min_interval_ms", 1100));
      rc.timeout = std::chrono::milliseconds(r.value("timeout_ms", 10000));
      c.remote_graph = std::move(rc);
    }
    c.log_level = doc.value("log_level", c.log_level);
    if (doc.contains("auth_token") && !doc["auth_token"].is_null()) c.auth_token = doc["auth_token"].get<std::string>();
    if (doc.contains("engine")) {
      const auto& e = doc["engine"];
      c.engine.limit_per_query_word = e.value("limit_per_query_word", c.engine.limit_per_query_word);
      c.engine.phrase_search_limit = e.value("phrase_search_limit", c.engine.phrase_search_limit);
      c.engine.limit_per_w1 = e.value("limit_per_w1", c.engine.limit_per_w1);
      c.engine.max_pool = e.value("max_pool", c.engine.max_pool);
      c.engine.gate = e.value("gate", c.engine.gate);
      if (e.contains("relations")) {
        c.engine.relations.clear();
        for (const auto& r : e["relations"]) c.engine.relations.push_back(Relation::from_name(r.get<std::string>()));
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::data_error, std::string("config: ") + e.what());
  }
  return c;
}

ServiceConfig ServiceConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "missing config file: " + path.string(), path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str(), path.parent_path());
}

void ServiceConfig::validate() const {
  if (port < 0 || port > 65535) throw Error(ErrorCode::bad_request, "invalid port " + std::to_string(port));
  require_file(assets.embeddings, "embeddings");
  require_file(assets.graph, "graph");
  require_file(assets.model, "model");
  require_file(assets.brackets, "bracket table");
  require_file(assets.nominalizations, "nominalization table");
  require_file(assets.stopwords, "stopwords");
  if (assets.adjective_lexicon) require_file(*assets.adjective_lexicon, "adjective lexicon");
  if (remote_graph && remote_graph->cassette) require_file(*remote_graph->cassette, "cassette");
}

std::optional<std::filesystem::path> resolve_config_path(const std::optional<std::filesystem::path>& explicit_path) {
  if (explicit_path) return explicit_path;
  if (const char* env = std::getenv("CSC_CONFIG"); env != nullptr && *env != '\0') return std::filesystem::path(env);
  return std::nullopt;
}

std::shared_ptr<const Assets> load_assets(const AssetPaths& paths, const std::optional<RemoteGraphConfig>& remote) {
  require_file(paths.embeddings, "embeddings");
  require_file(paths.graph, "graph");
  require_file(paths.model, "model");
  require_file(paths.brackets, "bracket table");
  require_file(paths.nominalizations, "nominalization table");
  require_file(paths.stopwords, "stopwords");

  auto assets = std::make_shared<Assets>();
  auto index = std::make_shared<const EmbeddingIndex>(load_embeddings_any(paths.embeddings));
  auto local = std::make_shared<const ConceptGraph>(load_graph_any(paths.graph));
  auto model = std::make_shared<const WordScorerModel>(load_model(paths.model));
  assets->index = index;
  assets->model = model;
  assets->brackets = BracketTable::from_file(paths.brackets);
  assets->nominalizations = NominalizationTable::from_file(paths.nominalizations);
  assets->stopwords = read_term_set(paths.stopwords);
  if (paths.adjective_lexicon) {
    require_file(*paths.adjective_lexicon, "adjective lexicon");
    assets->extra_lexicon = read_term_set(*paths.adjective_lexicon);
  }

  if (remote) {
    std::shared_ptr<HttpTransport> transport;
    if (remote->cassette) {
      transport = std::make_shared<CassetteTransport>(*remote->cassette);
    } else {
      transport = std::make_shared<HttplibTransport>();
    }
    RemoteGraphOptions opts;
    opts.endpoint = remote->endpoint;
    opts.cache_dir = remote->cache_dir;
    opts.min_interval = remote->min_interval;
    opts.timeout = remote->timeout;
    auto remote_graph = std::make_shared<const RemoteGraph>(opts, transport);
    assets->graph = std::make_shared<const FallbackGraph>(remote_graph, local);
  } else {
    assets->graph = local;
  }

  std::ostringstream v;
  v << "embeddings=" << index->size() << "x" << index->dim() << ";graph=" << local->assertion_count()
    << ";model_trees=" << model->trees.size() << (remote ? ";remote=" + remote->endpoint : std::string());
  assets->version = v.str();
  return assets;
}

}  // namespace csc
