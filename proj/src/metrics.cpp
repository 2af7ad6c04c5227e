#include "screener/metrics.hpp"

#include <cmath>

#include <json.hpp>

#include "screener/error.hpp"

namespace screener {

YieldBurden yield_burden(const ConfusionCounts& c) {
  const std::size_t relevant = c.tp_manual + c.tp_auto + c.fn_auto;
  if (relevant == 0) throw DegenerateInput("yield is undefined without relevant documents");
  if (c.total == 0) throw InvalidArgument("burden needs N > 0");
  YieldBurden out;
  out.yield = static_cast<double>(c.tp_manual + c.tp_auto) / static_cast<double>(relevant);
  out.burden = static_cast<double>(c.tp_manual + c.tn_manual + c.tp_auto + c.fp_auto) / static_cast<double>(c.total);
  return out;
}

namespace {

void check_gold(const Trace& trace, std::span<const int> gold) {
  if (gold.size() != trace.corpus_size) throw InvalidArgument("gold labels do not match corpus size");
}

}  // namespace

std::vector<ConfusionCounts> confusion_series(const Trace& trace, std::span<const int> gold, bool manual_only) {
  check_gold(trace, gold);
  std::size_t relevant_total = 0;
  for (int y : gold) relevant_total += y == 1;

  std::vector<ConfusionCounts> out;
  out.reserve(trace.screened() + 1);
  ConfusionCounts cur;
  cur.total = trace.corpus_size;
  cur.fn_auto = relevant_total;  // no classifier: everything unscreened is predicted negative
  cur.tn_auto = trace.corpus_size - relevant_total;
  out.push_back(cur);

  auto screen_manual = [&](int label) {
    if (label == 1) ++cur.tp_manual;
    else ++cur.tn_manual;
  };
  for (const auto& d : trace.seed) {
    screen_manual(gold[d.doc]);
    if (gold[d.doc] == 1) --cur.fn_auto;
    else --cur.tn_auto;
    out.push_back(cur);
  }

  for (const auto& step : trace.steps) {
    // Re-derive the automatic counts from this iteration's classifier.
    const std::size_t screened = cur.tp_manual + cur.tn_manual;
    const std::size_t relevant_left = relevant_total - cur.tp_manual;
    const std::size_t irrelevant_left = (trace.corpus_size - screened) - relevant_left;
    cur.tp_auto = cur.fp_auto = 0;
    if (!manual_only) {
      for (std::size_t doc : step.predicted_positive) {
        if (gold[doc] == 1) ++cur.tp_auto;
        else ++cur.fp_auto;
      }
    }
    cur.fn_auto = relevant_left - cur.tp_auto;
    cur.tn_auto = irrelevant_left - cur.fp_auto;

    for (const auto& d : step.batch) {
      const bool relevant = gold[d.doc] == 1;
      const bool predicted = !manual_only && d.relevance >= 0.5;
      if (relevant) (predicted ? cur.tp_auto : cur.fn_auto)--;
      else (predicted ? cur.fp_auto : cur.tn_auto)--;
      screen_manual(gold[d.doc]);
      out.push_back(cur);
    }
  }
  // Past the last classifier nothing is left to predict; a complete trace
  // ends with zero automatic counts already.
  if (trace.screened() < trace.corpus_size) return out;
  auto& last = out.back();
  last.tp_auto = last.fp_auto = last.fn_auto = last.tn_auto = 0;
  return out;
}

ConfusionCounts confusion_at(const Trace& trace, std::span<const int> gold, std::size_t position, bool manual_only) {
  if (position > trace.screened()) throw InvalidArgument("position beyond screened documents");
  return confusion_series(trace, gold, manual_only)[position];
}

WssResult wss(const Trace& trace, std::span<const int> gold, double threshold, bool manual_only) {
  const auto series = confusion_series(trace, gold, manual_only);
  std::vector<std::size_t> iteration_of(series.size(), 0);
  std::size_t pos = trace.seed.size();
  for (const auto& step : trace.steps) {
    for (std::size_t j = 0; j < step.batch.size(); ++j) iteration_of[++pos] = step.iteration;
  }
  for (std::size_t p = 0; p < series.size(); ++p) {
    const YieldBurden yb = yield_burden(series[p]);
    if (yb.yield >= threshold - 1e-12) {
      return {1.0 - yb.burden, iteration_of[p], p, yb.yield, yb.burden};
    }
  }
  throw DegenerateInput("yield never reaches the threshold; trace incomplete?");
}

double recall_at(const Trace& trace, std::span<const int> gold, double fraction) {
  check_gold(trace, gold);
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InvalidArgument("fraction must lie in (0, 1]");
  std::size_t relevant_total = 0;
  for (int y : gold) relevant_total += y == 1;
  if (relevant_total == 0) throw DegenerateInput("recall is undefined without relevant documents");
  const auto cutoff = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(trace.corpus_size) - 1e-9));
  const auto order = trace.screening_order();
  std::size_t found = 0;
  for (std::size_t i = 0; i < order.size() && i < cutoff; ++i) found += gold[order[i]] == 1;
  return static_cast<double>(found) / static_cast<double>(relevant_total);
}

MetricsReport compute_metrics(const Trace& trace, std::span<const int> gold, const MetricsOptions& options) {
  MetricsReport r;
  r.yield_threshold = options.yield_threshold;
  const WssResult full = wss(trace, gold, options.yield_threshold, false);
  r.wss = full.value;
  r.cut_iteration = full.cut_iteration;
  const WssResult manual = wss(trace, gold, options.yield_threshold, true);
  r.wss_manual_only = manual.value;
  r.cut_iteration_manual_only = manual.cut_iteration;
  for (double f : options.recall_fractions) r.recall_at[f] = recall_at(trace, gold, f);

  const auto series = confusion_series(trace, gold, false);
  std::size_t pos = trace.seed.size();
  auto push = [&](std::size_t p) {
    const YieldBurden yb = yield_burden(series[p]);
    r.yield_curve.push_back(yb.yield);
    r.burden_curve.push_back(yb.burden);
  };
  push(pos);
  for (const auto& step : trace.steps) {
    pos += step.batch.size();
    push(pos);
  }
  return r;
}

std::string metrics_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["yield_threshold"] = r.yield_threshold;
  j["wss"] = r.wss;
  j["cut_iteration"] = r.cut_iteration;
  j["wss_manual_only"] = r.wss_manual_only;
  j["cut_iteration_manual_only"] = r.cut_iteration_manual_only;
  nlohmann::ordered_json recall = nlohmann::ordered_json::object();
  for (const auto& [f, v] : r.recall_at) {
    char key[32];
    std::snprintf(key, sizeof key, "%g", f);
    recall[key] = v;
  }
  j["recall_at"] = recall;
  j["yield_curve"] = r.yield_curve;
  j["burden_curve"] = r.burden_curve;
  return j.dump(2);
}

}  // namespace screener
