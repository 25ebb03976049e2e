// csc: ingestion, training, scripted runs and the HTTP service.
//
// Exit status: 0 success, 1 usage error, 2 data or asset error.
#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "csc/config.hpp"
#include "csc/error.hpp"
#include "csc/service.hpp"

namespace {

using namespace csc;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Service* g_service = nullptr;

void on_signal(int) {
  if (g_service != nullptr) g_service->stop();
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorCode::io_error, "missing file: " + p.string(), p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ServiceConfig load_config(const std::string& flag) {
  auto path = resolve_config_path(flag.empty() ? std::nullopt : std::optional<std::filesystem::path>(flag));
  if (!path) throw UsageError("no config: pass --config or set CSC_CONFIG");
  auto config = ServiceConfig::from_file(*path);
  config.validate();
  return config;
}

std::string join(const std::vector<std::string>& v, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? std::string(sep) : "") + v[i];
  return out;
}

void print_run(const Session& s, bool as_json) {
  const auto& cs = *s.character_space;
  const auto text = generate_explanation(cs);
  if (as_json) {
    nlohmann::json out{{"session_id", s.id},
                       {"query_words", s.query_words},
                       {"w1_pool", s.w1_pool},
                       {"phrase", *s.chosen_phrase},
                       {"character_space", cs},
                       {"explanation", text}};
    std::cout << out.dump(2) << "\n";
    return;
  }
  const auto& p = *s.chosen_phrase;
  std::printf("session: %s\n", s.id.c_str());
  std::printf("query_words: %s\n", join(s.query_words, ", ").c_str());
  std::printf("w1_pool: %s\n", join(s.w1_pool, ", ").c_str());
  std::printf("phrase: %s (score %.4g, similarity %.6f)\n", p.display.c_str(), p.score, p.similarity);
  std::printf("w1 (top): %s\n", cs.w1.c_str());
  std::printf("w2 (right): %s (%s)\n", cs.w2.c_str(), cs.w2_noun.c_str());
  std::printf("w3 (bottom): %s%s\n", cs.w3.c_str(), cs.manual_w3 ? " [manual]" : "");
  std::printf("w4 (left): %s%s\n", cs.w4.c_str(), cs.manual_w4 ? " [manual]" : "");
  std::printf("quadrants: %s | %s | %s | %s\n", cs.quadrant_labels[0].c_str(), cs.quadrant_labels[1].c_str(),
              cs.quadrant_labels[2].c_str(), cs.quadrant_labels[3].c_str());
  std::printf("explanation: %s\n", text.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Character space construction: ingest assets, train the word scorer, run or serve sessions"};
  app.require_subcommand(1);

  auto* ingest = app.add_subcommand("ingest", "build binary caches from text assets");
  ingest->require_subcommand(1);
  std::string in_path, out_path, filter_path, language = "en";
  auto* ing_emb = ingest->add_subcommand("embeddings", "embedding text (plain/gzip) -> CSEMB1 cache");
  ing_emb->add_option("--input", in_path, "embedding text file")->required();
  ing_emb->add_option("--output", out_path, "cache file to write")->required();
  ing_emb->add_option("--filter", filter_path, "keep only terms listed in this file");
  auto* ing_graph = ingest->add_subcommand("graph", "assertion dump (plain/gzip) -> CSGRF1 cache");
  ing_graph->add_option("--input", in_path, "assertion dump")->required();
  ing_graph->add_option("--output", out_path, "cache file to write")->required();
  ing_graph->add_option("--language", language, "language tag to keep");

  auto* train = app.add_subcommand("train", "fit and save the word-usefulness model");
  std::string lexicon_path, embeddings_path, model_path, report_path;
  BoostingConfig boost;
  train->add_option("--lexicon", lexicon_path, "TSV of adjective and usable count 0-5")->required();
  train->add_option("--embeddings", embeddings_path, "embedding text or cache")->required();
  train->add_option("--output", model_path, "model file to write")->required();
  train->add_option("--report", report_path, "also write the CV report as JSON");
  train->add_option("--max-depth", boost.max_depth)->capture_default_str();
  train->add_option("--learning-rate", boost.learning_rate)->capture_default_str();
  train->add_option("--max-rounds", boost.max_rounds)->capture_default_str();
  train->add_option("--folds", boost.folds)->capture_default_str();
  train->add_option("--early-stop", boost.early_stop_rounds)->capture_default_str();
  train->add_option("--seed", boost.seed)->capture_default_str();

  auto* run = app.add_subcommand("run", "non-interactive session on a brief");
  std::string config_path, brief_path, policy = "top1";
  bool as_json = false;
  run->add_option("--config", config_path, "service config (default: $CSC_CONFIG)");
  run->add_option("--brief-file", brief_path, "design brief text file")->required();
  run->add_option("--policy", policy, "selection policy")->check(CLI::IsMember({"top1"}));
  run->add_flag("--json", as_json, "print JSON instead of text");

  auto* serve = app.add_subcommand("serve", "run the HTTP service");
  int port_override = -1;
  serve->add_option("--config", config_path, "service config (default: $CSC_CONFIG)");
  serve->add_option("--port", port_override, "override the configured port");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*ing_emb) {
      TermSet filter;
      if (!filter_path.empty()) filter = read_term_set(filter_path);
      EmbeddingLoadReport report;
      auto index = load_embeddings(in_path, filter_path.empty() ? nullptr : &filter, &report);
      save_embedding_cache(index, out_path);
      std::printf("terms: %zu\ndim: %ld\nlines: %zu\nmalformed: %zu\nduplicates: %zu\nfiltered: %zu\n", index.size(),
                  static_cast<long>(index.dim()), report.lines, report.malformed, report.duplicates, report.filtered);
      std::printf("cache: %s\n", out_path.c_str());
    } else if (*ing_graph) {
      IngestReport report;
      auto graph = ingest_assertions(in_path, language, &report);
      graph.save(out_path);
      std::printf("lines: %zu\nkept: %zu\ndropped_language: %zu\ndropped_multiword: %zu\n", report.lines, report.kept,
                  report.dropped_language, report.dropped_multiword);
      std::printf("dropped_self_loop: %zu\nmalformed: %zu\nlemmas: %zu\ncache: %s\n", report.dropped_self_loop,
                  report.malformed, graph.lemma_count(), out_path.c_str());
    } else if (*train) {
      auto lexicon = load_lexicon(lexicon_path);
      auto index = load_embeddings_any(embeddings_path);
      auto trained = train_word_scorer(lexicon, index, boost);
      const auto& r = trained.result.report;
      save_model(trained.result.model, model_path);
      std::printf("records: %zu used, %zu dropped\n", trained.used, trained.dropped.size());
      if (trained.result.model.trees.empty() && r.fold_rmse.empty()) {
        std::printf("constant labels: saved a constant model (base %.6g, zero trees)\n",
                    trained.result.model.base_score);
      } else {
        std::printf("folds: %d\n", r.folds);
        for (std::size_t i = 0; i < r.mean_rmse.size(); ++i) {
          std::printf("round %zu cv_rmse %.6f\n", i, r.mean_rmse[i]);
        }
        std::printf("best_rounds: %zu\nbest_cv_rmse: %.6f\n", r.best_rounds, r.mean_rmse[r.best_rounds]);
      }
      std::printf("train_rmse: %.6f\nmodel: %s\n", r.train_rmse.back(), model_path.c_str());
      if (!report_path.empty()) {
        std::ofstream out(report_path);
        out << nlohmann::json{{"folds", r.folds},
                              {"fold_rmse", r.fold_rmse},
                              {"mean_rmse", r.mean_rmse},
                              {"best_rounds", r.best_rounds},
                              {"train_rmse", r.train_rmse},
                              {"dropped", trained.dropped}}
                   .dump(2)
            << "\n";
      }
    } else if (*run) {
      auto config = load_config(config_path);
      Engine engine(load_assets(config.assets, config.remote_graph), config.engine);
      auto session = engine.start_session(DesignBrief{read_text(brief_path), brief_path});
      run_top1(engine, session);
      print_run(session, as_json);
    } else if (*serve) {
      auto config = load_config(config_path);
      if (port_override >= 0) config.port = port_override;
      auto assets = load_assets(config.assets, config.remote_graph);
      auto engine = std::make_shared<const Engine>(assets, config.engine);
      auto store = std::make_shared<SessionStore>(config.session_store);
      Service service(engine, store, ServiceOptions{config.auth_token, assets->version, config.log_level});
      const int port = service.bind(config.host, config.port);
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::printf("listening on http://%s:%d\n", config.host.c_str(), port);
      std::fflush(stdout);
      service.listen();
      g_service = nullptr;
    }
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", std::string(to_string(e.code())).c_str(), e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return 0;
}
