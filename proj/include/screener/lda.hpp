#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "screener/feature_matrix.hpp"
#include "screener/tokenizer.hpp"
#include "screener/vocabulary.hpp"

namespace screener {

struct LdaOptions {
  std::size_t topics = 300;
  std::optional<double> alpha;  // defaults to 50 / topics
  double beta = 0.01;
  std::size_t iterations = 500;
  std::uint64_t seed = 0;

  double resolved_alpha() const { return alpha.value_or(50.0 / static_cast<double>(topics)); }
};

// Final state of a collapsed Gibbs sampler.
struct LdaModel {
  std::size_t topics = 0;
  std::size_t vocab_size = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  std::size_t iterations = 0;
  std::string vocab_hash;
  std::vector<std::uint32_t> topic_word;   // topics x vocab_size
  std::vector<std::uint32_t> topic_total;  // topics
  std::vector<std::uint32_t> doc_topic;    // documents x topics
  std::vector<std::uint32_t> doc_length;   // documents

  std::size_t documents() const { return doc_length.size(); }
  std::uint32_t topic_word_count(std::size_t k, std::size_t w) const { return topic_word[k * vocab_size + w]; }
  std::uint32_t doc_topic_count(std::size_t d, std::size_t k) const { return doc_topic[d * topics + k]; }
  std::uint64_t total_tokens() const;
  // phi(k, w) = (n_kw + beta) / (n_k + V * beta)
  DenseMatrix topic_word_distribution() const;

  bool operator==(const LdaModel&) const = default;
};

// Called after each full sweep with (model state, 1-based sweep number).
using LdaSweepHook = std::function<void(const LdaModel&, std::size_t)>;

// Collapsed Gibbs sampling over vocabulary-encoded documents.
// Throws InvalidArgument on bad options and DegenerateInput for an empty
// corpus or one with no retained tokens.
LdaModel lda_fit(const std::vector<std::vector<std::uint32_t>>& docs, std::size_t vocab_size,
                 const LdaOptions& options, const LdaSweepHook& on_sweep = {});
LdaModel lda_fit(const TokenizedCorpus& docs, const Vocabulary& vocab, const LdaOptions& options,
                 const LdaSweepHook& on_sweep = {});

// row(d, i) = (n_di + alpha) / (len(d) + k * alpha); zero-token documents
// receive a uniform row and appear in fallback_rows().
TopicMatrix lda_doc_topics(const LdaModel& model);

// Fold-in Gibbs sampling for unseen documents with topic-word counts held
// fixed. Out-of-vocabulary tokens are skipped; all-OOV documents fall back to
// a uniform row.
TopicMatrix lda_infer(const LdaModel& model, const std::vector<std::vector<std::uint32_t>>& docs,
                      std::size_t iterations, std::uint64_t seed);
TopicMatrix lda_infer(const LdaModel& model, const Vocabulary& vocab, const TokenizedCorpus& docs,
                      std::size_t iterations, std::uint64_t seed);

void save_lda_model(const std::filesystem::path& path, const LdaModel& model);
LdaModel load_lda_model(const std::filesystem::path& path);

}  // namespace screener
