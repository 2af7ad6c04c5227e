#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "screener/corpus.hpp"
#include "screener/feature_matrix.hpp"

namespace fixtures {

screener::Document doc(std::string id, std::string title, std::string abstract, std::optional<int> label = {});

// Three short documents used across the text-processing tests.
screener::Corpus tiny_corpus();

// Two topical clusters with disjoint vocabularies over a shared background.
// Relevant documents carry marker words specific to their cluster.
struct TwoCluster {
  screener::Corpus corpus;
  std::vector<int> cluster;  // 0 or 1 per document
  std::vector<std::size_t> members(int c) const;
};
TwoCluster two_cluster_corpus(std::size_t n, double relevant_fraction, std::uint64_t seed);

// Documents drawn from the LDA generative model with k topics on disjoint
// word blocks of `block` words each.
struct LdaSynthetic {
  std::vector<std::vector<std::uint32_t>> docs;
  std::size_t vocab_size = 0;
  screener::DenseMatrix phi;  // k x vocab_size
};
LdaSynthetic lda_synthetic(std::size_t documents, std::size_t doc_length, std::size_t k, std::size_t block,
                           std::uint64_t seed);

// Fully labelled corpus with random words; label 1 with probability p.
screener::Corpus random_corpus(std::size_t n, double p, std::uint64_t seed);

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, const std::string& content);

}  // namespace fixtures
