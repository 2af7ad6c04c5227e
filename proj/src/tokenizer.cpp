#include "screener/tokenizer.hpp"

namespace screener {

const std::unordered_set<std::string>& default_stop_words() {
  static const std::unordered_set<std::string> words = {
      "a",       "about",   "above",  "after",   "again",  "against", "all",     "am",
      "an",      "and",     "any",    "are",     "as",     "at",      "be",      "because",
      "been",    "before",  "being",  "below",   "between", "both",   "but",     "by",
      "can",     "could",   "did",    "do",      "does",   "doing",   "down",    "during",
      "each",    "few",     "for",    "from",    "further", "had",    "has",     "have",
      "having",  "he",      "her",    "here",    "hers",   "herself", "him",     "himself",
      "his",     "how",     "i",      "if",      "in",     "into",    "is",      "it",
      "its",     "itself",  "just",   "me",      "more",   "most",    "my",      "myself",
      "no",      "nor",     "not",    "now",     "of",     "off",     "on",      "once",
      "only",    "or",      "other",  "our",     "ours",   "ourselves", "out",   "over",
      "own",     "same",    "she",    "should",  "so",     "some",    "such",    "than",
      "that",    "the",     "their",  "theirs",  "them",   "themselves", "then", "there",
      "these",   "they",    "this",   "those",   "through", "to",     "too",     "under",
      "until",   "up",      "very",   "was",     "we",     "were",    "what",    "when",
      "where",   "which",   "while",  "who",     "whom",   "why",     "will",    "with",
      "would",   "you",     "your",   "yours",   "yourself", "yourselves", "also", "may",
      "however", "within",  "among",  "whether", "thus",   "upon",    "via",     "without"};
  return words;
}

Tokenizer::Tokenizer(TokenizerOptions options)
    : Tokenizer(options, options.use_stop_words ? default_stop_words()
                                                : std::unordered_set<std::string>{}) {}

Tokenizer::Tokenizer(TokenizerOptions options, std::unordered_set<std::string> stop_words)
    : options_(options), stop_words_(std::move(stop_words)) {
  if (!options_.use_stop_words) stop_words_.clear();
}

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

}  // namespace

std::vector<std::string> Tokenizer::tokenize(std::string_view text) const {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    while (!cur.empty() && cur.back() == '-') cur.pop_back();
    if (cur.size() >= options_.min_length && !stop_words_.contains(cur)) out.push_back(cur);
    cur.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_word_byte(c)) {
      cur.push_back(options_.lowercase && c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a')
                                                               : static_cast<char>(c));
    } else if (c == '-' && options_.keep_hyphens && !cur.empty() && i + 1 < text.size() &&
               is_word_byte(static_cast<unsigned char>(text[i + 1]))) {
      cur.push_back('-');
    } else {
      flush();
    }
  }
  flush();
  return out;
}

std::vector<std::string> Tokenizer::tokenize(const Document& doc) const {
  std::string text;
  text.reserve(doc.title.size() + 1 + doc.abstract.size());
  text.append(doc.title).append(" ").append(doc.abstract);
  return tokenize(text);
}

TokenizedCorpus tokenize_corpus(const Corpus& corpus, const Tokenizer& tokenizer) {
  TokenizedCorpus out;
  out.reserve(corpus.size());
  for (const auto& d : corpus) out.push_back(tokenizer.tokenize(d));
  return out;
}

}  // namespace screener
