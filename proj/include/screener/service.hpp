#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "screener/session.hpp"

namespace screener {

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path data_dir = "screener-data";
};

// SCREENER_PORT and SCREENER_DATA_DIR override the given values.
ServiceOptions apply_env_overrides(ServiceOptions options);

// HTTP JSON API over a SessionManager:
//   POST /sessions                 {corpus_ref, feature_model, strategy, config} -> {session_id}
//   GET  /sessions/{id}/batch      -> {iteration, docs: [{id, title, abstract, relevance, novelty}]}
//   POST /sessions/{id}/labels     {labels: [{id, label}]} -> {accepted, remaining_in_batch}
//   GET  /sessions/{id}/progress   -> {screened, total, relevant_found, phase, topics_found}
//   GET  /sessions/{id}/export     -> trace CSV
// Requests on one session are serialised by its mutex.
class Service {
 public:
  explicit Service(SessionManager& sessions);
  ~Service();

  // Port 0 picks a free port. Returns the bound port; throws Error on failure.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace screener
