#include "csc/service.hpp"

#include <httplib.h>

#include <iostream>

#include "csc/error.hpp"

namespace csc {

using nlohmann::json;

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::bad_request:
    case ErrorCode::precondition: return 400;
    case ErrorCode::not_found: return 404;
    case ErrorCode::missing_term: return 422;
    case ErrorCode::invalid_state: return 409;
    case ErrorCode::transport: return 502;
    case ErrorCode::data_error:
    case ErrorCode::io_error:
    case ErrorCode::format_error:
    case ErrorCode::internal: return 500;
  }
  return 500;
}

struct Service::Impl {
  std::shared_ptr<const Engine> engine;
  std::shared_ptr<SessionStore> store;
  ServiceOptions options;
  httplib::Server server;

  static void send(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message,
                         const std::string& detail = {}) {
    send(res, status, json{{"code", code}, {"message", message}, {"detail", detail}});
  }

  static json body_of(const httplib::Request& req) {
    if (trim(req.body).empty()) return json::object();
    json j;
    try {
      j = json::parse(req.body);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::bad_request, "malformed JSON body", e.what());
    }
    if (!j.is_object()) throw Error(ErrorCode::bad_request, "request body must be a JSON object");
    return j;
  }

  template <typename T>
  static T field(const json& body, const char* key) {
    if (!body.contains(key)) throw Error(ErrorCode::bad_request, std::string("missing field '") + key + "'", key);
    try {
      return body.at(key).get<T>();
    } catch (const json::exception&) {
      throw Error(ErrorCode::bad_request, std::string("field '") + key + "' has the wrong type", key);
    }
  }

  template <typename T>
  static std::optional<T> optional_field(const json& body, const char* key) {
    if (!body.contains(key) || body.at(key).is_null()) return std::nullopt;
    return field<T>(body, key);
  }

  // Wraps a handler with auth, JSON decoding and error mapping.
  template <typename F>
  httplib::Server::Handler wrap(F f) {
    return [this, f](const httplib::Request& req, httplib::Response& res) {
      if (options.log_level == "debug") std::cerr << req.method << " " << req.path << "\n";
      if (options.auth_token && req.get_header_value("Authorization") != "Bearer " + *options.auth_token) {
        send_error(res, 401, "unauthorized", "missing or wrong bearer token");
        return;
      }
      try {
        f(req, res);
      } catch (const Error& e) {
        send_error(res, http_status(e.code()), to_string(e.code()), e.what(), e.detail());
      } catch (const std::exception& e) {
        send_error(res, 500, "internal", e.what());
      }
    };
  }

  static std::string id_of(const httplib::Request& req) { return req.matches[1]; }

  void routes() {
    auto health = [this](const httplib::Request&, httplib::Response& res) {
      send(res, 200,
           json{{"status", "ok"}, {"service", "csc"}, {"api", "v1"}, {"assets", options.asset_version},
                {"sessions", store->size()}});
    };
    server.Get("/healthz", health);
    server.Get("/api/v1/healthz", health);

    server.Post("/api/v1/sessions", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = body_of(req);
      DesignBrief brief{field<std::string>(body, "brief"), optional_field<std::string>(body, "brief_id")};
      auto s = engine->start_session(brief);
      json out{{"session_id", s.id},
               {"query_words", s.query_words},
               {"no_query_words", s.no_query_words},
               {"state", to_string(s.state)}};
      store->add(std::move(s));
      send(res, 201, out);
    }));

    server.Get(R"(/api/v1/sessions/([0-9A-Za-z_-]+))",
               wrap([this](const httplib::Request& req, httplib::Response& res) {
                 auto s = store->get(id_of(req));
                 if (!s) throw Error(ErrorCode::not_found, "unknown session " + id_of(req), id_of(req));
                 send(res, 200, json(*s));
               }));

    server.Get(R"(/api/v1/sessions/([0-9A-Za-z_-]+)/explanation)",
               wrap([this](const httplib::Request& req, httplib::Response& res) {
                 auto s = store->get(id_of(req));
                 if (!s) throw Error(ErrorCode::not_found, "unknown session " + id_of(req), id_of(req));
                 if (!s->character_space) {
                   throw Error(ErrorCode::invalid_state, "session is not completed",
                               std::string(to_string(s->state)));
                 }
                 send(res, 200, json{{"text", generate_explanation(*s->character_space)}});
               }));

    post("w1-offers", [this](Session& s, const json& body) {
      auto limit = optional_field<std::size_t>(body, "limit_per_query_word");
      const auto& offers = engine->offer_w1(s, limit);
      return json{{"offers", offers}, {"not_found", s.w1_not_found}};
    });

    post("manual-query", [this](Session& s, const json& body) {
      const auto r = engine->manual_query(s, field<std::string>(body, "word"));
      json out{{"not_found", r.not_found}, {"non_adjective", r.non_adjective}, {"added", r.added}};
      if (s.state == SessionState::W1Offered) {
        out["mode"] = "w1";
        out["offers"] = s.w1_offers;
      } else {
        out["mode"] = "phrase";
        out["groups"] = s.phrase_offers;
      }
      return out;
    });

    post("w1-pool", [this](Session& s, const json& body) {
      engine->select_w1_pool(s, field<std::vector<std::string>>(body, "lemmas"));
      return json{{"w1_pool", s.w1_pool}};
    });

    post("phrase-offers", [this](Session& s, const json& body) {
      auto limit = optional_field<std::size_t>(body, "limit_per_w1");
      return json{{"groups", engine->offer_phrases(s, limit)}};
    });

    post("phrase", [this](Session& s, const json& body) {
      engine->select_phrase(s, field<std::string>(body, "w1"), field<std::string>(body, "w2"));
      return json{{"chosen_phrase", *s.chosen_phrase}};
    });

    post("antonym-offers", [this](Session& s, const json&) {
      engine->offer_antonyms(s);
      return json{{"w3_offers", s.w3_offers},
                  {"w4_offers", s.w4_offers},
                  {"w3_manual_required", s.w3_manual_required},
                  {"w4_manual_required", s.w4_manual_required}};
    });

    post("complete", [this](Session& s, const json& body) {
      const auto& cs = engine->complete(s, field<std::string>(body, "w3"), field<std::string>(body, "w4"),
                                        optional_field<bool>(body, "manual_w3").value_or(false),
                                        optional_field<bool>(body, "manual_w4").value_or(false));
      return json{{"character_space", cs}, {"explanation", generate_explanation(cs)}};
    });
  }

  // POST /api/v1/sessions/{id}/<action>: runs `op` under the session lock;
  // the store logs the committed event before the response is sent.
  template <typename Op>
  void post(const std::string& action, Op op) {
    server.Post("/api/v1/sessions/([0-9A-Za-z_-]+)/" + action,
                wrap([this, op](const httplib::Request& req, httplib::Response& res) {
                  const auto body = body_of(req);
                  auto out = store->update(id_of(req), [&](Session& s) {
                    auto j = op(s, body);
                    j["state"] = to_string(s.state);
                    j["session_id"] = s.id;
                    return j;
                  });
                  send(res, 200, out);
                }));
  }
};

Service::Service(std::shared_ptr<const Engine> engine, std::shared_ptr<SessionStore> store, ServiceOptions options)
    : impl_(std::make_unique<Impl>()) {
  impl_->engine = std::move(engine);
  impl_->store = std::move(store);
  impl_->options = std::move(options);
  impl_->routes();
}

Service::~Service() { stop(); }

int Service::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::io_error, "cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorCode::io_error, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void Service::listen() { impl_->server.listen_after_bind(); }

void Service::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace csc
