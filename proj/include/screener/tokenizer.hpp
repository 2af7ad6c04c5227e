#pragma once

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "screener/corpus.hpp"

namespace screener {

struct TokenizerOptions {
  bool lowercase = true;
  // Keep '-' inside tokens ("covid-19") instead of splitting on it.
  bool keep_hyphens = false;
  std::size_t min_length = 2;
  bool use_stop_words = true;
};

// The built-in English stop list.
const std::unordered_set<std::string>& default_stop_words();

class Tokenizer {
 public:
  Tokenizer() : Tokenizer(TokenizerOptions{}) {}
  explicit Tokenizer(TokenizerOptions options);
  Tokenizer(TokenizerOptions options, std::unordered_set<std::string> stop_words);

  // Splits on non-alphanumeric ASCII; bytes >= 0x80 are kept as token
  // characters so UTF-8 words survive intact.
  std::vector<std::string> tokenize(std::string_view text) const;
  // title + " " + abstract
  std::vector<std::string> tokenize(const Document& doc) const;

  const TokenizerOptions& options() const { return options_; }

 private:
  TokenizerOptions options_;
  std::unordered_set<std::string> stop_words_;
};

using TokenizedCorpus = std::vector<std::vector<std::string>>;

TokenizedCorpus tokenize_corpus(const Corpus& corpus, const Tokenizer& tokenizer);

}  // namespace screener
