#include "screener/screening.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "screener/error.hpp"
#include "screener/novelty.hpp"
#include "screener/rng.hpp"

namespace screener {

ScreeningState::ScreeningState(std::vector<std::string> ids)
    : ids_(std::move(ids)), status_(ids_.size(), 0), unlabelled_(ids_.size()) {
  std::iota(unlabelled_.begin(), unlabelled_.end(), 0);
  trace_.corpus_size = ids_.size();
}

std::size_t ScreeningState::relevant_found() const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), 1));
}

bool ScreeningState::has_both_classes() const {
  const std::size_t r = relevant_found();
  return r > 0 && r < labels_.size();
}

void ScreeningState::take(std::size_t doc, int label) {
  if (doc >= ids_.size()) throw InvalidArgument("document index out of range");
  if (status_[doc]) throw InvalidArgument("document \"" + ids_[doc] + "\" is already labelled");
  if (label != 0 && label != 1) throw InvalidArgument("label must be 0 or 1");
  status_[doc] = 1;
  labelled_.push_back(doc);
  labels_.push_back(label);
}

void ScreeningState::add_seed(std::span<const std::size_t> docs, std::span<const int> labels) {
  if (!trace_.steps.empty()) throw InvalidArgument("seed documents must precede the first step");
  if (docs.size() != labels.size()) throw InvalidArgument("seed docs and labels differ in length");
  for (std::size_t i = 0; i < docs.size(); ++i) {
    take(docs[i], labels[i]);
    ScreenedDoc d;
    d.doc = docs[i];
    d.label = labels[i];
    trace_.seed.push_back(d);
  }
  std::erase_if(unlabelled_, [&](std::size_t d) { return status_[d] != 0; });
}

void ScreeningState::commit(StepRecord record) {
  for (const auto& d : record.batch) take(d.doc, d.label);
  std::erase_if(unlabelled_, [&](std::size_t d) { return status_[d] != 0; });
  record.iteration = trace_.steps.size() + 1;
  record.cumulative_screened = labelled_.size();
  record.cumulative_relevant = relevant_found();
  record.topics_found = topics_found_;
  trace_.steps.push_back(std::move(record));
}

void ScreeningState::set_topics_found(std::size_t n) {
  topics_found_ = n;
  if (!trace_.steps.empty()) trace_.steps.back().topics_found = n;
}

void ScreeningState::switch_to_relevance_only() { phase_ = Phase::kRelevanceOnly; }

bool ScreeningState::check_invariants() const {
  std::vector<int> seen(ids_.size(), 0);
  for (std::size_t d : labelled_) {
    if (d >= ids_.size() || seen[d]++) return false;
  }
  for (std::size_t d : unlabelled_) {
    if (d >= ids_.size() || seen[d]++) return false;
  }
  if (std::any_of(seen.begin(), seen.end(), [](int c) { return c != 1; })) return false;
  if (!std::is_sorted(unlabelled_.begin(), unlabelled_.end())) return false;

  const auto order = trace_.screening_order();
  if (order != labelled_) return false;
  std::size_t prev_screened = trace_.seed.size(), prev_relevant = 0, prev_topics = 0;
  for (const auto& d : trace_.seed) prev_relevant += d.label == 1;
  bool relevance_only = false;
  for (const auto& s : trace_.steps) {
    if (s.cumulative_screened < prev_screened || s.cumulative_relevant < prev_relevant ||
        s.topics_found < prev_topics) {
      return false;
    }
    if (relevance_only && s.phase == Phase::kNovelty) return false;
    relevance_only = s.phase == Phase::kRelevanceOnly;
    prev_screened = s.cumulative_screened;
    prev_relevant = s.cumulative_relevant;
    prev_topics = s.topics_found;
  }
  return true;
}

ScreeningState seed_labelled_set(const Corpus& corpus, std::span<const int> gold, std::size_t size,
                                 std::uint64_t seed, std::span<const std::size_t> candidates) {
  if (gold.size() != corpus.size()) throw InvalidArgument("gold labels do not match corpus");
  std::vector<std::size_t> pool;
  if (candidates.empty()) {
    pool.resize(corpus.size());
    std::iota(pool.begin(), pool.end(), 0);
  } else {
    pool.assign(candidates.begin(), candidates.end());
  }
  if (size < 2) throw InvalidArgument("seed set must hold at least two documents (one per class)");
  if (size >= corpus.size() || size > pool.size()) throw InvalidArgument("seed size must be smaller than the corpus");
  const auto relevant_in_pool = std::count_if(pool.begin(), pool.end(), [&](std::size_t d) { return gold[d] == 1; });
  if (relevant_in_pool == 0) throw DegenerateInput("no relevant documents available for the seed set");
  if (static_cast<std::size_t>(relevant_in_pool) == pool.size()) {
    throw DegenerateInput("no irrelevant documents available for the seed set");
  }

  Rng rng(seed);
  constexpr int kMaxAttempts = 100;
  std::vector<std::size_t> sample;
  auto both_classes = [&] {
    const auto r = std::count_if(sample.begin(), sample.end(), [&](std::size_t d) { return gold[d] == 1; });
    return r > 0 && static_cast<std::size_t>(r) < sample.size();
  };
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::vector<std::size_t> work = pool;
    for (std::size_t i = 0; i < size; ++i) std::swap(work[i], work[i + rng.index(work.size() - i)]);
    sample.assign(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(size));
    if (both_classes()) break;
  }
  if (!both_classes()) {
    // Every draw missed a class: swap one member for a random document of it.
    const int missing = std::any_of(sample.begin(), sample.end(), [&](std::size_t d) { return gold[d] == 1; }) ? 0 : 1;
    std::vector<std::size_t> donors;
    for (std::size_t d : pool)
      if (gold[d] == missing) donors.push_back(d);
    sample[rng.index(sample.size())] = donors[rng.index(donors.size())];
  }

  std::vector<std::string> ids;
  ids.reserve(corpus.size());
  for (const auto& d : corpus) ids.push_back(d.id);
  ScreeningState state(std::move(ids));
  std::vector<int> labels;
  for (std::size_t d : sample) labels.push_back(gold[d]);
  state.add_seed(sample, labels);
  return state;
}

namespace {

template <class IdOf>
std::vector<std::size_t> rank_positions(std::size_t m, IdOf id_of, std::span<const double> relevance,
                                        std::span<const double> novelty) {
  if (relevance.size() != m || (!novelty.empty() && novelty.size() != m)) {
    throw InvalidArgument("score vectors do not cover the candidate set");
  }
  std::vector<double> score(m);
  for (std::size_t i = 0; i < m; ++i) score[i] = novelty.empty() ? relevance[i] : relevance[i] * novelty[i];
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (score[a] != score[b]) return score[a] > score[b];
    return id_of(a) < id_of(b);
  });
  return order;
}

std::vector<std::size_t> predicted_positive(const ScreeningState& state, std::span<const double> relevance) {
  std::vector<std::size_t> out;
  const auto& pool = state.unlabelled();
  for (std::size_t i = 0; i < pool.size(); ++i)
    if (relevance[i] >= 0.5) out.push_back(pool[i]);
  return out;
}

void check_relevance(const ScreeningState& state, std::span<const double> relevance) {
  if (relevance.size() != state.unlabelled().size()) {
    throw InvalidArgument("relevance scores do not cover the unlabelled set");
  }
  if (state.exhausted()) throw InvalidArgument("no unlabelled documents left");
}

// Per-iteration generator, so a replayed session draws the same LC samples.
Rng step_rng(std::uint64_t seed, std::size_t iteration) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (iteration + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return Rng(z ^ (z >> 31));
}

}  // namespace

std::vector<std::size_t> rank_candidates(std::span<const std::string> candidate_ids, std::span<const double> relevance,
                                         std::span<const double> novelty) {
  return rank_positions(candidate_ids.size(), [&](std::size_t i) -> const std::string& { return candidate_ids[i]; },
                        relevance, novelty);
}

std::vector<double> score_pool(const ScreeningState& state, const Classifier& clf, const FeatureMatrix& features) {
  return predict_proba(clf, features, state.unlabelled());
}

BatchProposal propose_naive(const ScreeningState& state, std::span<const double> relevance, std::size_t batch_size) {
  check_relevance(state, relevance);
  const auto& pool = state.unlabelled();
  const auto order = rank_positions(
      pool.size(), [&](std::size_t i) -> const std::string& { return state.id(pool[i]); }, relevance, {});
  BatchProposal p;
  p.phase = Phase::kRelevanceOnly;
  const std::size_t take = std::min(batch_size, pool.size());
  for (std::size_t i = 0; i < take; ++i) {
    ScreenedDoc d;
    d.doc = pool[order[i]];
    d.relevance = relevance[order[i]];
    d.novelty = 1.0;
    d.rank_score = d.relevance;
    p.batch.push_back(d);
  }
  p.predicted_positive = predicted_positive(state, relevance);
  return p;
}

BatchProposal propose_ig(const ScreeningState& state, const TopicMatrix& topics, std::span<const double> relevance,
                         const StrategyConfig& config) {
  if (topics.rows() != state.corpus_size()) throw InvalidArgument("topic matrix does not cover the corpus");
  if (state.phase() == Phase::kRelevanceOnly) return propose_naive(state, relevance, config.batch_size);
  check_relevance(state, relevance);

  const auto& pool = state.unlabelled();
  std::vector<double> novelty(pool.size());
  if (config.novelty_override) {
    std::fill(novelty.begin(), novelty.end(), *config.novelty_override);
  } else {
    const NoveltyProjector proj =
        fit_projector(topics, state.labelled(), {config.components, config.center_novelty});
    for (std::size_t i = 0; i < pool.size(); ++i) novelty[i] = novelty_score(proj, topics.row(pool[i]));
  }
  const auto order = rank_positions(
      pool.size(), [&](std::size_t i) -> const std::string& { return state.id(pool[i]); }, relevance, novelty);

  BatchProposal p;
  p.phase = Phase::kNovelty;
  const std::size_t take = std::min(config.batch_size, pool.size());
  for (std::size_t i = 0; i < take; ++i) {
    ScreenedDoc d;
    d.doc = pool[order[i]];
    d.relevance = relevance[order[i]];
    d.novelty = novelty[order[i]];
    d.rank_score = d.relevance * d.novelty;
    p.batch.push_back(d);
  }
  p.predicted_positive = predicted_positive(state, relevance);
  return p;
}

BatchProposal propose_lc(const ScreeningState& state, std::span<const double> relevance, const StrategyConfig& config) {
  check_relevance(state, relevance);
  const double progress = static_cast<double>(state.labelled().size()) / static_cast<double>(state.corpus_size());
  if (progress >= config.lc_fraction) return propose_naive(state, relevance, config.batch_size);

  const auto& pool = state.unlabelled();
  std::vector<std::size_t> band;
  for (std::size_t i = 0; i < pool.size(); ++i)
    if (relevance[i] >= config.lc_low && relevance[i] <= config.lc_high) band.push_back(i);
  const std::size_t take = std::min(config.batch_size, pool.size());
  const std::size_t from_band = std::min(take, band.size());
  Rng rng = step_rng(config.seed, state.iteration());
  for (std::size_t i = 0; i < from_band; ++i) std::swap(band[i], band[i + rng.index(band.size() - i)]);

  BatchProposal p;
  p.phase = Phase::kRelevanceOnly;
  std::vector<char> picked(pool.size(), 0);
  auto add = [&](std::size_t i) {
    picked[i] = 1;
    ScreenedDoc d;
    d.doc = pool[i];
    d.relevance = relevance[i];
    d.novelty = 1.0;
    d.rank_score = relevance[i];
    p.batch.push_back(d);
  };
  for (std::size_t i = 0; i < from_band; ++i) add(band[i]);
  if (p.batch.size() < take) {
    const auto order = rank_positions(
        pool.size(), [&](std::size_t i) -> const std::string& { return state.id(pool[i]); }, relevance, {});
    for (std::size_t i = 0; i < order.size() && p.batch.size() < take; ++i)
      if (!picked[order[i]]) add(order[i]);
  }
  p.predicted_positive = predicted_positive(state, relevance);
  return p;
}

void commit_with_oracle(ScreeningState& state, BatchProposal proposal, Oracle& oracle) {
  for (auto& d : proposal.batch) {
    const auto label = oracle.label(d.doc);
    if (!label) throw OracleUnavailable("no label yet for document \"" + state.id(d.doc) + "\"");
    d.label = *label;
  }
  StepRecord rec;
  rec.phase = proposal.phase;
  rec.batch = std::move(proposal.batch);
  rec.predicted_positive = std::move(proposal.predicted_positive);
  state.commit(std::move(rec));
}

void update_ig_phase(ScreeningState& state, const TopicMatrix& topics, const StrategyConfig& config) {
  state.set_topics_found(topics_discovered(topics, state.labelled()));
  const std::size_t target = std::min(config.max_topics, occupied_topics(topics));
  if (state.phase() == Phase::kNovelty && state.topics_found() >= target) state.switch_to_relevance_only();
}

void step_naive(ScreeningState& state, std::span<const double> relevance, std::size_t batch_size, Oracle& oracle) {
  commit_with_oracle(state, propose_naive(state, relevance, batch_size), oracle);
}

void step_ig(ScreeningState& state, const TopicMatrix& topics, std::span<const double> relevance,
             const StrategyConfig& config, Oracle& oracle) {
  commit_with_oracle(state, propose_ig(state, topics, relevance, config), oracle);
  update_ig_phase(state, topics, config);
}

void step_lc(ScreeningState& state, std::span<const double> relevance, const StrategyConfig& config, Oracle& oracle) {
  commit_with_oracle(state, propose_lc(state, relevance, config), oracle);
}

BatchProposal next_proposal(const ScreeningState& state, const FeatureMatrix& features, const TopicMatrix* topics,
                            const StrategyConfig& config) {
  if (features.rows() != state.corpus_size()) throw InvalidArgument("feature matrix does not cover the corpus");
  const Classifier clf = train(features, state.labelled(), state.labels(), config.classifier);
  const std::vector<double> relevance = score_pool(state, clf, features);
  switch (config.strategy) {
    case Strategy::kNaive:
      return propose_naive(state, relevance, config.batch_size);
    case Strategy::kLc:
      return propose_lc(state, relevance, config);
    case Strategy::kIg:
      if (!topics) throw InvalidArgument("IG strategy needs a topic matrix");
      return propose_ig(state, *topics, relevance, config);
  }
  throw InvalidArgument("unknown strategy");
}

SimulationResult run_simulation(const Corpus& corpus, const FeatureMatrix& features, const TopicMatrix* topics,
                                const StrategyConfig& config, const SimulationOptions& options) {
  config.validate();
  if (!corpus.fully_labelled()) throw InvalidArgument("simulation requires a fully labelled corpus");
  if (config.strategy == Strategy::kIg && !topics) throw InvalidArgument("IG strategy needs a topic matrix");
  const std::vector<int> gold = corpus.gold_labels();

  SimulationResult result;
  result.state = seed_labelled_set(corpus, gold, config.seed_size, config.seed, options.seed_candidates);
  ScreeningState& state = result.state;
  if (config.strategy == Strategy::kIg) {
    state.set_topics_found(topics_discovered(*topics, state.labelled()));
  } else {
    state.switch_to_relevance_only();
  }

  SimulatedOracle oracle(gold);
  while (!state.exhausted()) {
    if (options.stop_after_screened && state.labelled().size() >= options.stop_after_screened) break;
    commit_with_oracle(state, next_proposal(state, features, topics, config), oracle);
    if (config.strategy == Strategy::kIg) update_ig_phase(state, *topics, config);
  }
  if (state.exhausted()) result.metrics = compute_metrics(state.trace(), gold, options.metrics);
  return result;
}

MethodSelection choose_method(double recall_bow, double recall_pv) {
  MethodSelection m;
  m.recall_bow = recall_bow;
  m.recall_pv = recall_pv;
  m.tie = recall_bow == recall_pv;
  m.chosen = recall_pv > recall_bow ? FeatureChoice::kPv : FeatureChoice::kBow;
  return m;
}

MethodSelection select_method(const Corpus& corpus, const FeatureMatrix& bow, const FeatureMatrix& pv,
                              const TopicMatrix& topics, const StrategyConfig& config, double cutoff) {
  if (!(cutoff > 0.0 && cutoff <= 1.0)) throw InvalidArgument("cutoff must lie in (0, 1]");
  StrategyConfig ig = config;
  ig.strategy = Strategy::kIg;
  SimulationOptions opts;
  opts.stop_after_screened = static_cast<std::size_t>(std::ceil(cutoff * static_cast<double>(corpus.size()) - 1e-9));
  const std::vector<int> gold = corpus.gold_labels();
  const auto run_bow = run_simulation(corpus, bow, &topics, ig, opts);
  const auto run_pv = run_simulation(corpus, pv, &topics, ig, opts);
  return choose_method(recall_at(run_bow.state.trace(), gold, cutoff), recall_at(run_pv.state.trace(), gold, cutoff));
}

}  // namespace screener
