#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "screener/tokenizer.hpp"

namespace screener {

// Term <-> index map with document frequencies. Indices are contiguous from 0
// and follow lexicographic term order.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> terms, std::vector<std::uint32_t> document_frequency,
             std::size_t total_documents);

  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  const std::string& term(std::size_t i) const { return terms_[i]; }
  const std::vector<std::string>& terms() const { return terms_; }
  std::uint32_t document_frequency(std::size_t i) const { return df_[i]; }
  std::size_t total_documents() const { return total_documents_; }
  std::optional<std::uint32_t> index_of(const std::string& term) const;

  // Maps tokens to indices, dropping out-of-vocabulary tokens.
  std::vector<std::uint32_t> encode(const std::vector<std::string>& tokens) const;

  // Stable content digest (hex SHA-256 of terms and frequencies).
  std::string hash() const;

  bool operator==(const Vocabulary& other) const {
    return terms_ == other.terms_ && df_ == other.df_ && total_documents_ == other.total_documents_;
  }

 private:
  std::vector<std::string> terms_;
  std::vector<std::uint32_t> df_;
  std::size_t total_documents_ = 0;
  std::unordered_map<std::string, std::uint32_t> index_;
};

// Keeps terms whose document frequency lies in [min_df, max_df_fraction * n].
// Throws InvalidArgument on bad bounds and DegenerateInput when nothing survives.
Vocabulary build_vocabulary(const TokenizedCorpus& docs, std::size_t min_df = 1,
                            double max_df_fraction = 1.0);

}  // namespace screener
