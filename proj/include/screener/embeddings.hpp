#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "screener/corpus.hpp"
#include "screener/feature_matrix.hpp"
#include "screener/tokenizer.hpp"

namespace screener {

// One fixed-dimension vector per document id.
struct EmbeddingSet {
  std::vector<std::string> ids;
  DenseMatrix vectors;  // ids.size() x dim

  std::size_t dim() const { return vectors.cols; }
  std::size_t size() const { return ids.size(); }
  // Rows reordered to corpus order; throws MissingIdError for absent ids.
  FeatureMatrix to_features(const Corpus& corpus) const;

  bool operator==(const EmbeddingSet&) const = default;
};

// Text format: "n dim" on the first line, then "id v_1 ... v_dim" per line.
// Result rows follow corpus order. Throws MissingIdError for a corpus id
// absent from the file and ParseError for dimension or numeric problems.
EmbeddingSet load_embeddings(const std::filesystem::path& path, const Corpus& corpus);
EmbeddingSet parse_embeddings(std::istream& in, const Corpus& corpus);
void save_embeddings(const std::filesystem::path& path, const EmbeddingSet& set);
void write_embeddings(std::ostream& out, const EmbeddingSet& set);

struct PvOptions {
  std::size_t dim = 300;
  // Half-width of the skip-gram context used to train word vectors jointly
  // with the document vectors; 0 trains document vectors only.
  std::size_t window = 5;
  std::size_t negative = 5;
  std::size_t epochs = 20;
  double learning_rate = 0.025;
  double min_learning_rate = 1e-4;
  std::uint64_t seed = 0;
};

// PV-DBOW with negative sampling: each document vector is trained to predict
// the words it contains. Single-threaded and deterministic for a given seed.
// Throws InvalidArgument (dim < 2, empty corpus) and DegenerateInput when the
// corpus cannot support training (fewer than two distinct words, or no
// document long enough for the context window).
EmbeddingSet pv_train(const Corpus& corpus, const TokenizedCorpus& docs, const PvOptions& options);

}  // namespace screener
