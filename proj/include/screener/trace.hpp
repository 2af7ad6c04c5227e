#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "screener/corpus.hpp"

namespace screener {

enum class Phase { kNovelty, kRelevanceOnly };

std::string to_string(Phase phase);

// One manually screened document.
struct ScreenedDoc {
  std::size_t doc = 0;  // corpus index
  // Scores at selection time; NaN for seed documents.
  double rank_score = std::numeric_limits<double>::quiet_NaN();
  double relevance = std::numeric_limits<double>::quiet_NaN();
  double novelty = std::numeric_limits<double>::quiet_NaN();
  int label = 0;
};

// One active-learning iteration.
struct StepRecord {
  std::size_t iteration = 0;  // 1-based
  Phase phase = Phase::kRelevanceOnly;
  std::vector<ScreenedDoc> batch;  // in rank order
  // Unlabelled documents the iteration's classifier scored >= 0.5, taken
  // before the batch was screened. Supplies the automatic-screening counts.
  std::vector<std::size_t> predicted_positive;
  std::size_t cumulative_screened = 0;  // after this step
  std::size_t cumulative_relevant = 0;  // after this step
  std::size_t topics_found = 0;         // after this step (IG only)
};

struct Trace {
  std::size_t corpus_size = 0;
  std::vector<ScreenedDoc> seed;
  std::vector<StepRecord> steps;

  std::size_t screened() const;
  // Corpus indices in screening order (seed first).
  std::vector<std::size_t> screening_order() const;
};

// CSV columns: iteration, doc_id, rank_score, relevance, novelty,
// oracle_label, cumulative_screened, cumulative_relevant. Seed rows carry
// iteration 0 and empty score fields. Reals use 17 significant digits.
void write_trace_csv(std::ostream& out, const Trace& trace, const Corpus& corpus);
std::string trace_csv(const Trace& trace, const Corpus& corpus);

// Figure-style curve: one row per iteration, (iteration, screened, relevant_found).
void write_curve_csv(std::ostream& out, const Trace& trace);

}  // namespace screener
