#include "screener/service.hpp"

#include <cmath>
#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

namespace screener {

using nlohmann::json;

ServiceOptions apply_env_overrides(ServiceOptions options) {
  if (const char* port = std::getenv("SCREENER_PORT"); port && *port) {
    char* end = nullptr;
    const long p = std::strtol(port, &end, 10);
    if (*end != '\0' || p < 0 || p > 65535) throw InvalidArgument(std::string("bad SCREENER_PORT \"") + port + "\"");
    options.port = static_cast<int>(p);
  }
  if (const char* dir = std::getenv("SCREENER_DATA_DIR"); dir && *dir) options.data_dir = dir;
  return options;
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, {{"error", message}});
}

json score_or_null(double x) { return std::isnan(x) ? json(nullptr) : json(x); }

std::string config_value(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  throw InvalidArgument("config values must be strings, numbers or booleans");
}

int status_for(const LabelRejected& e) {
  switch (e.reason()) {
    case LabelRejected::Reason::kConflict:
    case LabelRejected::Reason::kNotInBatch:
      return 409;
    default:
      return 400;
  }
}

}  // namespace

struct Service::Impl {
  SessionManager& sessions;
  httplib::Server server;

  explicit Impl(SessionManager& s) : sessions(s) { routes(); }

  // Runs fn with the session locked; 404 when it does not exist.
  template <class Fn>
  void with_session(const httplib::Request& req, httplib::Response& res, Fn fn) {
    const auto session = sessions.find(req.path_params.at("id"));
    if (!session) return send_error(res, 404, "no such session");
    std::lock_guard lock(session->mutex());
    fn(*session);
  }

  void routes() {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});

    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      try {
        std::rethrow_exception(ep);
      } catch (const LabelRejected& e) {
        send_error(res, status_for(e), e.what());
      } catch (const json::exception& e) {
        send_error(res, 400, std::string("bad request body: ") + e.what());
      } catch (const InvalidArgument& e) {
        send_error(res, 400, e.what());
      } catch (const ParseError& e) {
        send_error(res, 400, e.what());
      } catch (const DegenerateInput& e) {
        send_error(res, 422, e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, e.what());
      }
    });

    server.Get("/sessions", [this](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, {{"sessions", sessions.ids()}});
    });

    server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      const json body = json::parse(req.body);
      SessionSpec spec;
      spec.corpus_ref = body.at("corpus_ref").get<std::string>();
      if (!std::filesystem::exists(spec.corpus_ref)) {
        return send_error(res, 400, "corpus_ref " + spec.corpus_ref.string() + " does not exist on the server");
      }
      if (body.contains("config")) {
        for (const auto& [key, value] : body.at("config").items()) {
          if (!value.is_null()) apply_setting(spec.settings, key, config_value(value));
        }
      }
      if (body.contains("feature_model")) {
        spec.settings.features.model = feature_model_from_string(body.at("feature_model").get<std::string>());
      }
      if (body.contains("strategy")) {
        spec.settings.strategy.strategy = strategy_from_string(body.at("strategy").get<std::string>());
      }
      spec.settings.strategy.validate();
      const auto session = sessions.create(std::move(spec));
      send_json(res, 201, {{"session_id", session->id()}});
    });

    server.Get("/sessions/:id/batch", [this](const httplib::Request& req, httplib::Response& res) {
      with_session(req, res, [&](Session& s) {
        json docs = json::array();
        for (const auto& d : s.pending()) {
          const Document& doc = s.corpus()[d.doc];
          docs.push_back({{"id", doc.id},
                          {"title", doc.title},
                          {"abstract", doc.abstract},
                          {"relevance", score_or_null(d.relevance)},
                          {"novelty", score_or_null(d.novelty)}});
        }
        send_json(res, 200,
                  {{"iteration", s.pending_iteration()},
                   {"seeding", s.seeding()},
                   {"phase", to_string(s.state().phase())},
                   {"finished", s.finished()},
                   {"docs", docs}});
      });
    });

    server.Post("/sessions/:id/labels", [this](const httplib::Request& req, httplib::Response& res) {
      const json body = json::parse(req.body);
      std::vector<std::pair<std::string, int>> labels;
      for (const auto& item : body.at("labels")) {
        labels.emplace_back(item.at("id").get<std::string>(), item.at("label").get<int>());
      }
      with_session(req, res, [&](Session& s) {
        const LabelOutcome out = s.submit(labels);
        send_json(res, 200,
                  {{"accepted", out.accepted},
                   {"remaining_in_batch", out.remaining_in_batch},
                   {"batch_completed", out.batch_completed}});
      });
    });

    server.Get("/sessions/:id/progress", [this](const httplib::Request& req, httplib::Response& res) {
      with_session(req, res, [&](Session& s) {
        const SessionProgress p = s.progress();
        send_json(res, 200,
                  {{"screened", p.screened},
                   {"total", p.total},
                   {"relevant_found", p.relevant_found},
                   {"phase", to_string(p.phase)},
                   {"seeding", p.seeding},
                   {"topics_found", p.topics_found},
                   {"completed_batches", p.completed_batches}});
      });
    });

    server.Get("/sessions/:id/export", [this](const httplib::Request& req, httplib::Response& res) {
      with_session(req, res, [&](Session& s) { res.set_content(s.export_csv(), "text/csv"); });
    });
  }
};

Service::Service(SessionManager& sessions) : impl_(std::make_unique<Impl>(sessions)) {}
Service::~Service() = default;

int Service::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error("cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) throw Error("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void Service::run() { impl_->server.listen_after_bind(); }

void Service::stop() { impl_->server.stop(); }

}  // namespace screener
