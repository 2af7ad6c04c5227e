#include "screener/vocabulary.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "screener/digest.hpp"
#include "screener/error.hpp"

namespace screener {

Vocabulary::Vocabulary(std::vector<std::string> terms, std::vector<std::uint32_t> document_frequency,
                       std::size_t total_documents)
    : terms_(std::move(terms)), df_(std::move(document_frequency)), total_documents_(total_documents) {
  if (terms_.size() != df_.size()) throw InvalidArgument("vocabulary terms/frequency size mismatch");
  index_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (df_[i] < 1 || df_[i] > total_documents_) {
      throw InvalidArgument("document frequency of \"" + terms_[i] + "\" out of range");
    }
    if (!index_.emplace(terms_[i], static_cast<std::uint32_t>(i)).second) {
      throw InvalidArgument("duplicate vocabulary term \"" + terms_[i] + "\"");
    }
  }
}

std::optional<std::uint32_t> Vocabulary::index_of(const std::string& term) const {
  auto it = index_.find(term);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::uint32_t> Vocabulary::encode(const std::vector<std::string>& tokens) const {
  std::vector<std::uint32_t> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (auto it = index_.find(t); it != index_.end()) out.push_back(it->second);
  }
  return out;
}

std::string Vocabulary::hash() const {
  Sha256 h;
  h.field("vocabulary-v1").field(std::to_string(total_documents_));
  for (std::size_t i = 0; i < terms_.size(); ++i) h.field(terms_[i]).field(std::to_string(df_[i]));
  return h.hex();
}

Vocabulary build_vocabulary(const TokenizedCorpus& docs, std::size_t min_df, double max_df_fraction) {
  if (min_df < 1) throw InvalidArgument("min_df must be >= 1");
  if (!(max_df_fraction > 0.0 && max_df_fraction <= 1.0)) {
    throw InvalidArgument("max_df_fraction must lie in (0, 1]");
  }
  std::map<std::string, std::uint32_t> df;
  for (const auto& tokens : docs) {
    std::set<std::string> unique(tokens.begin(), tokens.end());
    for (const auto& t : unique) ++df[t];
  }
  const double max_df = max_df_fraction * static_cast<double>(docs.size());
  std::vector<std::string> terms;
  std::vector<std::uint32_t> freq;
  for (const auto& [term, count] : df) {
    if (count >= min_df && static_cast<double>(count) <= max_df) {
      terms.push_back(term);
      freq.push_back(count);
    }
  }
  if (terms.empty()) throw DegenerateInput("vocabulary is empty after document-frequency filtering");
  return Vocabulary(std::move(terms), std::move(freq), docs.size());
}

}  // namespace screener
