#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "screener/artifacts.hpp"
#include "screener/corpus.hpp"
#include "screener/error.hpp"
#include "screener/screening.hpp"

namespace screener {

// Session directory or event log cannot be read back.
class CorruptSessionStore : public Error {
 public:
  using Error::Error;
};

// Label submission rejected: unknown document, document outside the pending
// batch, or a label contradicting an earlier one.
class LabelRejected : public Error {
 public:
  enum class Reason { kUnknownDocument, kNotInBatch, kConflict, kBadLabel };
  LabelRejected(Reason reason, const std::string& what) : Error(what), reason_(reason) {}
  Reason reason() const { return reason_; }

 private:
  Reason reason_;
};

struct SessionSpec {
  std::filesystem::path corpus_ref;
  RunSettings settings;
};

struct LabelOutcome {
  std::size_t accepted = 0;
  std::size_t remaining_in_batch = 0;
  bool batch_completed = false;
};

struct SessionProgress {
  std::size_t screened = 0;
  std::size_t total = 0;
  std::size_t relevant_found = 0;
  Phase phase = Phase::kNovelty;
  bool seeding = true;
  std::size_t topics_found = 0;
  std::size_t completed_batches = 0;
};

// Live screening session. Labels arrive from a reviewer; a batch is
// committed once all of its documents are labelled. Until both classes have
// been seen, batches are seeded random samples. Every accepted label is
// appended to events.jsonl before it takes effect, and reopening replays the
// log, so the pending batch after a restart is the one that was pending
// before. Not thread-safe; callers hold mutex().
class Session {
 public:
  // Creates <dir>/session.json and an empty event log.
  static std::unique_ptr<Session> create(const std::filesystem::path& dir, std::string id, SessionSpec spec,
                                         ArtifactStore& store);
  // Throws CorruptSessionStore when the directory cannot be replayed.
  static std::unique_ptr<Session> open(const std::filesystem::path& dir, ArtifactStore& store);

  const std::string& id() const { return id_; }
  const SessionSpec& spec() const { return spec_; }
  const Corpus& corpus() const { return corpus_; }
  const ScreeningState& state() const { return state_; }

  // Trace iteration the pending batch will carry (0 while seeding).
  std::size_t pending_iteration() const;
  const std::vector<ScreenedDoc>& pending() const { return pending_.batch; }
  bool seeding() const { return seeding_; }
  bool finished() const { return pending_.batch.empty(); }

  // All-or-nothing: the whole submission is validated before anything is
  // recorded. Repeating a label already given is accepted without effect.
  LabelOutcome submit(const std::vector<std::pair<std::string, int>>& labels);
  SessionProgress progress() const;
  std::string export_csv() const;

  std::mutex& mutex() { return mutex_; }

 private:
  Session() = default;
  void load_features(ArtifactStore& store);
  void compute_pending();
  void apply_label(std::size_t doc, int label);
  void append_events(const std::vector<std::pair<std::size_t, int>>& labels);

  std::filesystem::path dir_;
  std::string id_;
  SessionSpec spec_;
  Corpus corpus_;
  FeatureMatrix features_;
  std::optional<TopicMatrix> topics_;
  ScreeningState state_;
  bool seeding_ = true;
  std::size_t seed_batches_ = 0;
  BatchProposal pending_;
  std::map<std::size_t, int> pending_labels_;
  std::size_t completed_batches_ = 0;
  std::mutex mutex_;
};

// All sessions under one data directory.
class SessionManager {
 public:
  // Opens every existing session; CorruptSessionStore aborts startup.
  explicit SessionManager(std::filesystem::path data_dir);

  std::shared_ptr<Session> create(SessionSpec spec);
  // nullptr when unknown.
  std::shared_ptr<Session> find(const std::string& id) const;
  std::vector<std::string> ids() const;
  const std::filesystem::path& data_dir() const { return data_dir_; }

 private:
  std::filesystem::path data_dir_;
  mutable std::mutex mutex_;
  std::unique_ptr<ArtifactStore> store_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

}  // namespace screener
