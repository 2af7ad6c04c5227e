#include "screener/session.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "screener/novelty.hpp"
#include "screener/rng.hpp"

namespace screener {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kSessionVersion = 1;

class MapOracle : public Oracle {
 public:
  explicit MapOracle(const std::map<std::size_t, int>& labels) : labels_(labels) {}
  std::optional<int> label(std::size_t doc) override {
    const auto it = labels_.find(doc);
    if (it == labels_.end()) return std::nullopt;
    return it->second;
  }

 private:
  const std::map<std::size_t, int>& labels_;
};

Rng seed_batch_rng(std::uint64_t seed, std::size_t batch) {
  std::uint64_t z = seed ^ (0xD1B54A32D192ED03ull * (batch + 1));
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return Rng(z ^ (z >> 31));
}

std::optional<int> recorded_label(const ScreeningState& state, std::size_t doc) {
  if (!state.is_labelled(doc)) return std::nullopt;
  const auto& l = state.labelled();
  const auto it = std::find(l.begin(), l.end(), doc);
  return state.labels()[static_cast<std::size_t>(it - l.begin())];
}

}  // namespace

std::unique_ptr<Session> Session::create(const fs::path& dir, std::string id, SessionSpec spec,
                                         ArtifactStore& store) {
  spec.settings.strategy.validate();
  std::unique_ptr<Session> s(new Session);
  s->dir_ = dir;
  s->id_ = std::move(id);
  s->spec_ = std::move(spec);
  s->spec_.corpus_ref = fs::absolute(s->spec_.corpus_ref);
  s->corpus_ = load_corpus(s->spec_.corpus_ref);
  s->load_features(store);
  s->compute_pending();

  fs::create_directories(dir);
  const json meta = {{"format", "screener-session"},
                     {"version", kSessionVersion},
                     {"id", s->id_},
                     {"corpus_ref", s->spec_.corpus_ref.string()},
                     {"corpus_sha256", corpus_hash(s->corpus_)},
                     {"strategy_config", format_strategy_config(s->spec_.settings.strategy)},
                     {"feature_params", format_feature_params(s->spec_.settings.features)}};
  {
    std::ofstream out(dir / "session.json");
    out << meta.dump(2) << '\n';
    if (!out) throw Error("cannot write " + (dir / "session.json").string());
  }
  std::ofstream(dir / "events.jsonl", std::ios::app);
  return s;
}

std::unique_ptr<Session> Session::open(const fs::path& dir, ArtifactStore& store) {
  std::unique_ptr<Session> s(new Session);
  s->dir_ = dir;
  json meta;
  try {
    std::ifstream in(dir / "session.json");
    if (!in) throw CorruptSessionStore("missing session.json");
    meta = json::parse(in);
    if (meta.at("format") != "screener-session" || meta.at("version") != kSessionVersion) {
      throw CorruptSessionStore("unsupported session format");
    }
    s->id_ = meta.at("id").get<std::string>();
    s->spec_.corpus_ref = meta.at("corpus_ref").get<std::string>();
    std::istringstream strategy(meta.at("strategy_config").get<std::string>());
    std::istringstream features(meta.at("feature_params").get<std::string>());
    s->spec_.settings = parse_run_settings(features, {parse_strategy_config(strategy), {}});
  } catch (const CorruptSessionStore& e) {
    throw CorruptSessionStore(dir.string() + ": " + e.what());
  } catch (const std::exception& e) {
    throw CorruptSessionStore(dir.string() + ": bad session.json: " + e.what());
  }

  try {
    s->corpus_ = load_corpus(s->spec_.corpus_ref);
  } catch (const Error& e) {
    throw CorruptSessionStore(dir.string() + ": corpus unavailable: " + e.what());
  }
  if (corpus_hash(s->corpus_) != meta.value("corpus_sha256", "")) {
    throw CorruptSessionStore(dir.string() + ": corpus " + s->spec_.corpus_ref.string() + " changed since the session began");
  }
  s->load_features(store);
  s->compute_pending();

  const fs::path log = dir / "events.jsonl";
  std::ifstream in(log, std::ios::binary);
  if (!in) throw CorruptSessionStore(dir.string() + ": missing events.jsonl");
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t pos = 0, lineno = 0;
  while (pos < content.size()) {
    const std::size_t nl = content.find('\n', pos);
    if (nl == std::string::npos) {
      // Torn final write: drop it; the reviewer's client will resend.
      in.close();
      fs::resize_file(log, pos);
      break;
    }
    ++lineno;
    const std::string line = content.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    try {
      const json ev = json::parse(line);
      const auto doc = s->corpus_.index_of(ev.at("doc").get<std::string>());
      if (!doc) throw LabelRejected(LabelRejected::Reason::kUnknownDocument, "unknown document");
      s->apply_label(*doc, ev.at("label").get<int>());
    } catch (const std::exception& e) {
      throw CorruptSessionStore(log.string() + " line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return s;
}

void Session::load_features(ArtifactStore& store) {
  const bool ig = spec_.settings.strategy.strategy == Strategy::kIg;
  FeatureSet set = store.feature_set(corpus_, spec_.settings.features, ig);
  features_ = std::move(set.features);
  topics_ = std::move(set.topics);
  std::vector<std::string> ids;
  ids.reserve(corpus_.size());
  for (const auto& d : corpus_) ids.push_back(d.id);
  state_ = ScreeningState(std::move(ids));
  if (!ig) state_.switch_to_relevance_only();
}

std::size_t Session::pending_iteration() const { return seeding_ ? 0 : state_.iteration() + 1; }

void Session::compute_pending() {
  pending_ = {};
  pending_labels_.clear();
  if (state_.exhausted()) return;
  const StrategyConfig& config = spec_.settings.strategy;
  if (seeding_) {
    std::vector<std::size_t> pool = state_.unlabelled();
    const std::size_t take = std::min(config.seed_size, pool.size());
    Rng rng = seed_batch_rng(config.seed, seed_batches_);
    for (std::size_t i = 0; i < take; ++i) std::swap(pool[i], pool[i + rng.index(pool.size() - i)]);
    pending_.phase = state_.phase();
    for (std::size_t i = 0; i < take; ++i) {
      ScreenedDoc d;
      d.doc = pool[i];
      pending_.batch.push_back(d);
    }
    return;
  }
  pending_ = next_proposal(state_, features_, topics_ ? &*topics_ : nullptr, config);
}

void Session::apply_label(std::size_t doc, int label) {
  if (label != 0 && label != 1) throw LabelRejected(LabelRejected::Reason::kBadLabel, "label must be 0 or 1");
  if (const auto prior = recorded_label(state_, doc)) {
    if (*prior != label) {
      throw LabelRejected(LabelRejected::Reason::kConflict, "document \"" + state_.id(doc) + "\" is already labelled " +
                                                                std::to_string(*prior));
    }
    return;
  }
  const auto in_batch = std::find_if(pending_.batch.begin(), pending_.batch.end(),
                                     [&](const ScreenedDoc& d) { return d.doc == doc; });
  if (in_batch == pending_.batch.end()) {
    throw LabelRejected(LabelRejected::Reason::kNotInBatch,
                        "document \"" + state_.id(doc) + "\" is not in the pending batch");
  }
  if (const auto it = pending_labels_.find(doc); it != pending_labels_.end()) {
    if (it->second != label) {
      throw LabelRejected(LabelRejected::Reason::kConflict, "document \"" + state_.id(doc) + "\" is already labelled " +
                                                                std::to_string(it->second));
    }
    return;
  }
  pending_labels_[doc] = label;
  if (pending_labels_.size() < pending_.batch.size()) return;

  const StrategyConfig& config = spec_.settings.strategy;
  if (seeding_) {
    std::vector<std::size_t> docs;
    std::vector<int> labels;
    for (const auto& d : pending_.batch) {
      docs.push_back(d.doc);
      labels.push_back(pending_labels_.at(d.doc));
    }
    state_.add_seed(docs, labels);
    ++seed_batches_;
    if (state_.has_both_classes()) {
      seeding_ = false;
      if (topics_) state_.set_topics_found(topics_discovered(*topics_, state_.labelled()));
    }
  } else {
    MapOracle oracle(pending_labels_);
    commit_with_oracle(state_, pending_, oracle);
    if (config.strategy == Strategy::kIg) update_ig_phase(state_, *topics_, config);
  }
  ++completed_batches_;
  compute_pending();
}

void Session::append_events(const std::vector<std::pair<std::size_t, int>>& labels) {
  std::string buf;
  for (const auto& [doc, label] : labels) {
    buf += json{{"event", "label"}, {"doc", state_.id(doc)}, {"label", label}, {"batch", completed_batches_ + 1}}.dump();
    buf += '\n';
  }
  const fs::path log = dir_ / "events.jsonl";
  const int fd = ::open(log.c_str(), O_WRONLY | O_APPEND | O_CREAT, 0644);
  if (fd < 0) throw Error("cannot open " + log.string());
  std::size_t off = 0;
  while (off < buf.size()) {
    const ssize_t n = ::write(fd, buf.data() + off, buf.size() - off);
    if (n <= 0) {
      ::close(fd);
      throw Error("write to " + log.string() + " failed");
    }
    off += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
}

LabelOutcome Session::submit(const std::vector<std::pair<std::string, int>>& labels) {
  std::vector<std::pair<std::size_t, int>> fresh;
  std::map<std::size_t, int> seen;
  for (const auto& [id, label] : labels) {
    const auto doc = corpus_.index_of(id);
    if (!doc) throw LabelRejected(LabelRejected::Reason::kUnknownDocument, "unknown document \"" + id + "\"");
    if (label != 0 && label != 1) throw LabelRejected(LabelRejected::Reason::kBadLabel, "label must be 0 or 1");
    if (const auto it = seen.find(*doc); it != seen.end()) {
      if (it->second != label) {
        throw LabelRejected(LabelRejected::Reason::kConflict, "conflicting labels for \"" + id + "\" in one request");
      }
      continue;
    }
    seen[*doc] = label;
    std::optional<int> prior = recorded_label(state_, *doc);
    if (!prior) {
      if (const auto it = pending_labels_.find(*doc); it != pending_labels_.end()) prior = it->second;
    }
    if (prior) {
      if (*prior != label) {
        throw LabelRejected(LabelRejected::Reason::kConflict,
                            "document \"" + id + "\" is already labelled " + std::to_string(*prior));
      }
      continue;
    }
    const bool in_batch = std::any_of(pending_.batch.begin(), pending_.batch.end(),
                                      [&](const ScreenedDoc& d) { return d.doc == *doc; });
    if (!in_batch) {
      throw LabelRejected(LabelRejected::Reason::kNotInBatch, "document \"" + id + "\" is not in the pending batch");
    }
    fresh.emplace_back(*doc, label);
  }

  LabelOutcome out;
  out.accepted = labels.size();
  if (!fresh.empty()) {
    append_events(fresh);
    const std::size_t before = completed_batches_;
    for (const auto& [doc, label] : fresh) apply_label(doc, label);
    out.batch_completed = completed_batches_ != before;
  }
  out.remaining_in_batch = out.batch_completed ? 0 : pending_.batch.size() - pending_labels_.size();
  return out;
}

SessionProgress Session::progress() const {
  SessionProgress p;
  p.screened = state_.labelled().size();
  p.total = state_.corpus_size();
  p.relevant_found = state_.relevant_found();
  p.phase = state_.phase();
  p.seeding = seeding_;
  p.topics_found = state_.topics_found();
  p.completed_batches = completed_batches_;
  return p;
}

std::string Session::export_csv() const { return trace_csv(state_.trace(), corpus_); }

SessionManager::SessionManager(fs::path data_dir) : data_dir_(std::move(data_dir)) {
  fs::create_directories(data_dir_ / "sessions");
  store_ = std::make_unique<ArtifactStore>(data_dir_ / "artifacts");
  for (const auto& entry : fs::directory_iterator(data_dir_ / "sessions")) {
    if (!entry.is_directory()) continue;
    auto s = Session::open(entry.path(), *store_);
    const std::string id = s->id();
    sessions_.emplace(id, std::shared_ptr<Session>(std::move(s)));
  }
}

std::shared_ptr<Session> SessionManager::create(SessionSpec spec) {
  std::lock_guard lock(mutex_);
  std::random_device rd;
  std::string id;
  do {
    const std::uint64_t r = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(r));
    id = buf;
  } while (sessions_.count(id));
  auto s = std::shared_ptr<Session>(Session::create(data_dir_ / "sessions" / id, id, std::move(spec), *store_));
  sessions_.emplace(id, s);
  return s;
}

std::shared_ptr<Session> SessionManager::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

std::vector<std::string> SessionManager::ids() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [id, s] : sessions_) out.push_back(id);
  return out;
}

}  // namespace screener
