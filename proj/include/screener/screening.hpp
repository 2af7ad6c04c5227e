#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "screener/corpus.hpp"
#include "screener/error.hpp"
#include "screener/feature_matrix.hpp"
#include "screener/logistic.hpp"
#include "screener/metrics.hpp"
#include "screener/strategy_config.hpp"
#include "screener/trace.hpp"

namespace screener {

// Source of ground-truth labels.
class Oracle {
 public:
  virtual ~Oracle() = default;
  // nullopt when the label is not (yet) available.
  virtual std::optional<int> label(std::size_t doc) = 0;
};

// Answers immediately from gold labels.
class SimulatedOracle : public Oracle {
 public:
  explicit SimulatedOracle(std::vector<int> gold) : gold_(std::move(gold)) {}
  std::optional<int> label(std::size_t doc) override { return gold_.at(doc); }

 private:
  std::vector<int> gold_;
};

class OracleUnavailable : public Error {
 public:
  using Error::Error;
};

// Labelled set H, unlabelled set G and the iteration trace. H and G always
// partition the corpus.
class ScreeningState {
 public:
  ScreeningState() = default;
  explicit ScreeningState(std::vector<std::string> ids);

  std::size_t corpus_size() const { return ids_.size(); }
  const std::string& id(std::size_t doc) const { return ids_[doc]; }
  const std::vector<std::string>& ids() const { return ids_; }

  const std::vector<std::size_t>& labelled() const { return labelled_; }
  const std::vector<int>& labels() const { return labels_; }
  // Ascending corpus index.
  const std::vector<std::size_t>& unlabelled() const { return unlabelled_; }
  bool is_labelled(std::size_t doc) const { return status_[doc] != 0; }
  bool exhausted() const { return unlabelled_.empty(); }
  std::size_t relevant_found() const;
  bool has_both_classes() const;

  std::size_t iteration() const { return trace_.steps.size(); }
  Phase phase() const { return phase_; }
  std::size_t topics_found() const { return topics_found_; }
  const Trace& trace() const { return trace_; }

  // Adds pre-labelled documents (seed set). Only valid before the first step.
  void add_seed(std::span<const std::size_t> docs, std::span<const int> labels);
  // Moves a screened batch from G to H and appends the trace record.
  void commit(StepRecord record);
  // Novelty -> relevance-only is the only permitted transition.
  void switch_to_relevance_only();
  // Also stamps the latest trace record.
  void set_topics_found(std::size_t n);

  // Full consistency check of the partition and trace (tests).
  bool check_invariants() const;

 private:
  void take(std::size_t doc, int label);

  std::vector<std::string> ids_;
  std::vector<char> status_;
  std::vector<std::size_t> labelled_;
  std::vector<int> labels_;
  std::vector<std::size_t> unlabelled_;
  Phase phase_ = Phase::kNovelty;
  std::size_t topics_found_ = 0;
  Trace trace_;
};

// Random sample of `size` documents containing both classes according to
// `gold`. Redraws up to 100 times; if every draw misses a class, a random
// member is swapped for a document of the missing class. When `candidates` is
// non-empty the sample is restricted to it. Throws DegenerateInput when a
// class is absent from the candidate pool and InvalidArgument when size < 2
// or size >= pool size.
ScreeningState seed_labelled_set(const Corpus& corpus, std::span<const int> gold, std::size_t size,
                                 std::uint64_t seed, std::span<const std::size_t> candidates = {});

// Orders candidates by relevance * novelty (relevance alone when novelty is
// empty), descending, ties by ascending document id. Returns positions into
// `candidates`.
std::vector<std::size_t> rank_candidates(std::span<const std::string> candidate_ids,
                                         std::span<const double> relevance, std::span<const double> novelty = {});

// A selected batch before the oracle has answered.
struct BatchProposal {
  Phase phase = Phase::kRelevanceOnly;
  std::vector<ScreenedDoc> batch;
  std::vector<std::size_t> predicted_positive;
};

// Relevance of every unlabelled document, aligned with state.unlabelled().
std::vector<double> score_pool(const ScreeningState& state, const Classifier& clf, const FeatureMatrix& features);

// `relevance` is aligned with state.unlabelled(); InvalidArgument otherwise.
BatchProposal propose_naive(const ScreeningState& state, std::span<const double> relevance, std::size_t batch_size);
// Novelty phase: refit the projector on H and rank by relevance * novelty.
// Relevance-only phase: identical to propose_naive.
BatchProposal propose_ig(const ScreeningState& state, const TopicMatrix& topics, std::span<const double> relevance,
                         const StrategyConfig& config);
// Uniform sample from the [lc_low, lc_high] band while the screened fraction
// is below lc_fraction, topped up by relevance; naive afterwards.
BatchProposal propose_lc(const ScreeningState& state, std::span<const double> relevance, const StrategyConfig& config);

// Asks the oracle for every batch label and commits. Throws OracleUnavailable
// (state untouched) if any label is missing.
void commit_with_oracle(ScreeningState& state, BatchProposal proposal, Oracle& oracle);
// Recounts discovered topics over H and switches IG to relevance-only once
// they reach min(max_topics, topics occupied by the whole pool).
void update_ig_phase(ScreeningState& state, const TopicMatrix& topics, const StrategyConfig& config);

void step_naive(ScreeningState& state, std::span<const double> relevance, std::size_t batch_size, Oracle& oracle);
void step_ig(ScreeningState& state, const TopicMatrix& topics, std::span<const double> relevance,
             const StrategyConfig& config, Oracle& oracle);
void step_lc(ScreeningState& state, std::span<const double> relevance, const StrategyConfig& config, Oracle& oracle);

// Trains on H and proposes the next batch for the configured strategy.
BatchProposal next_proposal(const ScreeningState& state, const FeatureMatrix& features, const TopicMatrix* topics,
                            const StrategyConfig& config);

struct SimulationOptions {
  // Stop once at least this many documents are screened (0 = run to exhaustion).
  std::size_t stop_after_screened = 0;
  // Restrict the seed draw to these documents.
  std::vector<std::size_t> seed_candidates;
  MetricsOptions metrics;
};

struct SimulationResult {
  ScreeningState state;
  std::optional<MetricsReport> metrics;  // set when the pool was exhausted
};

// Seed, then loop (train on H, score G, step) until G is empty. Requires a
// fully labelled corpus; IG requires `topics`.
SimulationResult run_simulation(const Corpus& corpus, const FeatureMatrix& features, const TopicMatrix* topics,
                                const StrategyConfig& config, const SimulationOptions& options = {});

enum class FeatureChoice { kBow, kPv };

struct MethodSelection {
  FeatureChoice chosen = FeatureChoice::kBow;
  double recall_bow = 0.0;
  double recall_pv = 0.0;
  bool tie = false;
};

// Higher recall wins; a tie goes to bag-of-words and is flagged.
MethodSelection choose_method(double recall_bow, double recall_pv);

// Runs IG over both representations until `cutoff` of the pool is screened
// and applies choose_method to their recalls.
MethodSelection select_method(const Corpus& corpus, const FeatureMatrix& bow, const FeatureMatrix& pv,
                              const TopicMatrix& topics, const StrategyConfig& config, double cutoff = 0.10);

}  // namespace screener
