#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "screener/trace.hpp"

namespace screener {

std::string to_string(Phase phase) { return phase == Phase::kNovelty ? "novelty" : "relevance_only"; }

std::size_t Trace::screened() const {
  std::size_t n = seed.size();
  for (const auto& s : steps) n += s.batch.size();
  return n;
}

std::vector<std::size_t> Trace::screening_order() const {
  std::vector<std::size_t> order;
  order.reserve(screened());
  for (const auto& d : seed) order.push_back(d.doc);
  for (const auto& s : steps)
    for (const auto& d : s.batch) order.push_back(d.doc);
  return order;
}

namespace {

std::string fmt_real(double x) {
  if (std::isnan(x)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q.push_back('"');
    q.push_back(c);
  }
  return q + '"';
}

}  // namespace

void write_trace_csv(std::ostream& out, const Trace& trace, const Corpus& corpus) {
  out << "iteration,doc_id,rank_score,relevance,novelty,oracle_label,cumulative_screened,cumulative_relevant\n";
  std::size_t screened = 0, relevant = 0;
  auto row = [&](std::size_t iteration, const ScreenedDoc& d) {
    ++screened;
    relevant += d.label == 1;
    out << iteration << ',' << csv_field(corpus[d.doc].id) << ',' << fmt_real(d.rank_score) << ','
        << fmt_real(d.relevance) << ',' << fmt_real(d.novelty) << ',' << d.label << ',' << screened << ','
        << relevant << '\n';
  };
  for (const auto& d : trace.seed) row(0, d);
  for (const auto& s : trace.steps)
    for (const auto& d : s.batch) row(s.iteration, d);
}

std::string trace_csv(const Trace& trace, const Corpus& corpus) {
  std::ostringstream os;
  write_trace_csv(os, trace, corpus);
  return os.str();
}

void write_curve_csv(std::ostream& out, const Trace& trace) {
  out << "iteration,screened,relevant_found\n";
  std::size_t relevant = 0;
  for (const auto& d : trace.seed) relevant += d.label == 1;
  out << 0 << ',' << trace.seed.size() << ',' << relevant << '\n';
  for (const auto& s : trace.steps) {
    out << s.iteration << ',' << s.cumulative_screened << ',' << s.cumulative_relevant << '\n';
  }
}

}  // namespace screener
