#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "csc/engine.hpp"

namespace csc {

struct AssetPaths {
  std::filesystem::path embeddings;  // text (plain/gzip) or CSEMB1 cache
  std::filesystem::path graph;       // assertion dump (plain/gzip) or CSGRF1 cache
  std::filesystem::path model;       // CSGBT1
  std::filesystem::path brackets;    // JSON bracket table
  std::filesystem::path nominalizations;
  std::filesystem::path stopwords;
  std::optional<std::filesystem::path> adjective_lexicon;
};

struct RemoteGraphConfig {
  std::string endpoint;
  std::optional<std::filesystem::path> cache_dir;
  std::optional<std::filesystem::path> cassette;  // replay recorded responses instead of HTTP
  std::chrono::milliseconds min_interval{1100};
  std::chrono::milliseconds timeout{10000};
};

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  AssetPaths assets;
  std::filesystem::path session_store = "sessions";
  std::optional<RemoteGraphConfig> remote_graph;
  std::string log_level = "info";
  std::optional<std::string> auth_token;
  EngineConfig engine;

  // Relative paths resolve against the config file's directory.
  static ServiceConfig from_file(const std::filesystem::path& path);
  static ServiceConfig from_json_text(const std::string& text, const std::filesystem::path& base_dir);

  // Throws Error(io_error) naming the first missing asset file, or
  // Error(bad_request) for an invalid port.
  void validate() const;
};

// Path of the config file: `explicit_path` if given, else $CSC_CONFIG, else
// nullopt.
std::optional<std::filesystem::path> resolve_config_path(const std::optional<std::filesystem::path>& explicit_path);

std::shared_ptr<const Assets> load_assets(const AssetPaths& paths,
                                          const std::optional<RemoteGraphConfig>& remote = std::nullopt);

}  // namespace csc
