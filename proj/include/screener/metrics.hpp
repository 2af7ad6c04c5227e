#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "screener/trace.hpp"

namespace screener {

// Manual (M) and automatic (A) screening decisions at one point of a run.
struct ConfusionCounts {
  std::size_t tp_manual = 0;
  std::size_t tn_manual = 0;
  std::size_t tp_auto = 0;
  std::size_t fp_auto = 0;
  std::size_t fn_auto = 0;
  std::size_t tn_auto = 0;
  std::size_t total = 0;  // N
};

struct YieldBurden {
  double yield = 0.0;
  double burden = 0.0;
};

// yield = (TP^M + TP^A) / (TP^M + TP^A + FN^A)
// burden = (TP^M + TN^M + TP^A + FP^A) / N
// Throws DegenerateInput when there are no relevant documents.
YieldBurden yield_burden(const ConfusionCounts& c);

// Counts after the first `position` documents of the screening order. The
// automatic decisions come from the 0.5-thresholded predictions of the
// classifier that was current at that point (none before the first trained
// classifier or once the pool is exhausted). manual_only zeroes them.
ConfusionCounts confusion_at(const Trace& trace, std::span<const int> gold, std::size_t position,
                             bool manual_only = false);
// confusion_at for every position 0..screened().
std::vector<ConfusionCounts> confusion_series(const Trace& trace, std::span<const int> gold,
                                              bool manual_only = false);

struct WssResult {
  double value = 0.0;
  std::size_t cut_iteration = 0;  // iteration in which the qualifying document was screened
  std::size_t cut_position = 0;   // documents screened at the qualifying point
  double yield = 0.0;
  double burden = 0.0;
};

// Work saved over sampling at the first point where yield >= threshold.
// Throws DegenerateInput if yield never reaches the threshold.
WssResult wss(const Trace& trace, std::span<const int> gold, double threshold = 0.95, bool manual_only = false);

// Relevant documents among the first ceil(fraction * N) screened, over all relevant.
double recall_at(const Trace& trace, std::span<const int> gold, double fraction);

struct MetricsOptions {
  double yield_threshold = 0.95;
  std::vector<double> recall_fractions = {0.10};
};

struct MetricsReport {
  double yield_threshold = 0.95;
  double wss = 0.0;  // with automatic-screening counts
  std::size_t cut_iteration = 0;
  double wss_manual_only = 0.0;
  std::size_t cut_iteration_manual_only = 0;
  std::map<double, double> recall_at;
  // One point per iteration (0 = after the seed set), at the end of each batch.
  std::vector<double> yield_curve;
  std::vector<double> burden_curve;
};

MetricsReport compute_metrics(const Trace& trace, std::span<const int> gold, const MetricsOptions& options = {});
std::string metrics_json(const MetricsReport& report);

}  // namespace screener
