#include "screener/tfidf.hpp"

#include <cmath>
#include <map>

namespace screener {

FeatureMatrix tfidf(const TokenizedCorpus& docs, const Vocabulary& vocab, bool sublinear_tf) {
  const double n = static_cast<double>(vocab.total_documents());
  std::vector<double> idf(vocab.size());
  for (std::size_t t = 0; t < vocab.size(); ++t) {
    idf[t] = std::log((1.0 + n) / (1.0 + vocab.document_frequency(t))) + 1.0;
  }

  std::vector<std::size_t> row_ptr{0};
  std::vector<std::uint32_t> indices;
  std::vector<double> values;
  std::vector<std::size_t> flagged;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    std::map<std::uint32_t, std::uint32_t> counts;
    for (std::uint32_t t : vocab.encode(docs[d])) ++counts[t];
    const std::size_t begin = values.size();
    double norm2 = 0.0;
    for (const auto& [t, c] : counts) {
      const double tf = sublinear_tf ? 1.0 + std::log(static_cast<double>(c)) : static_cast<double>(c);
      const double w = tf * idf[t];
      indices.push_back(t);
      values.push_back(w);
      norm2 += w * w;
    }
    if (norm2 > 0.0) {
      const double inv = 1.0 / std::sqrt(norm2);
      for (std::size_t k = begin; k < values.size(); ++k) values[k] *= inv;
    } else {
      flagged.push_back(d);
    }
    row_ptr.push_back(values.size());
  }
  FeatureMatrix m = FeatureMatrix::from_csr(FeatureKind::kTfidfSparse, docs.size(), vocab.size(),
                                            std::move(row_ptr), std::move(indices), std::move(values));
  m.set_flagged_rows(std::move(flagged));
  return m;
}

}  // namespace screener
