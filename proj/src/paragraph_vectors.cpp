#include <algorithm>
#include <cmath>
#include <numeric>

#include "screener/embeddings.hpp"
#include "screener/error.hpp"
#include "screener/kernels.hpp"
#include "screener/rng.hpp"
#include "screener/vocabulary.hpp"

namespace screener {

namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Unigram^0.75 noise distribution.
class NoiseSampler {
 public:
  explicit NoiseSampler(const std::vector<std::uint64_t>& counts) : cdf_(counts.size()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      acc += std::pow(static_cast<double>(counts[i]), 0.75);
      cdf_[i] = acc;
    }
  }
  std::uint32_t draw(Rng& rng) const {
    const double u = rng.uniform() * cdf_.back();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<std::uint32_t>(std::min<std::size_t>(it - cdf_.begin(), cdf_.size() - 1));
  }

 private:
  std::vector<double> cdf_;
};

// One negative-sampling update: input vector `in` predicts `target`.
// Accumulates the input gradient into `grad`.
void ns_update(std::span<const double> in, std::uint32_t target, std::size_t negative, double lr,
               const NoiseSampler& noise, DenseMatrix& out_vectors, std::span<double> grad, Rng& rng) {
  for (std::size_t s = 0; s <= negative; ++s) {
    std::uint32_t word;
    double label;
    if (s == 0) {
      word = target;
      label = 1.0;
    } else {
      word = noise.draw(rng);
      if (word == target) continue;
      label = 0.0;
    }
    auto out = out_vectors.row(word);
    const double g = (label - sigmoid(kernels::dot(in, out))) * lr;
    kernels::axpy(g, out, grad);
    kernels::axpy(g, in, out);
  }
}

}  // namespace

EmbeddingSet pv_train(const Corpus& corpus, const TokenizedCorpus& docs, const PvOptions& o) {
  if (o.dim < 2) throw InvalidArgument("paragraph vector dimension must be >= 2");
  if (corpus.empty() || docs.size() != corpus.size()) throw InvalidArgument("pv_train needs a non-empty tokenized corpus");

  std::vector<std::vector<std::uint32_t>> encoded;
  std::size_t longest = 0;
  Vocabulary vocab;
  try {
    vocab = build_vocabulary(docs, 1, 1.0);
  } catch (const DegenerateInput&) {
    throw DegenerateInput("paragraph-vector corpus has no tokens");
  }
  if (vocab.size() < 2) throw DegenerateInput("paragraph-vector training needs at least two distinct words");
  std::vector<std::uint64_t> counts(vocab.size(), 0);
  std::uint64_t total_tokens = 0;
  for (const auto& d : docs) {
    encoded.push_back(vocab.encode(d));
    for (auto w : encoded.back()) ++counts[w];
    total_tokens += encoded.back().size();
    longest = std::max(longest, encoded.back().size());
  }
  if (o.window > 0 && longest < 2) {
    throw DegenerateInput("no document is long enough for a context window");
  }

  Rng rng(o.seed);
  const std::size_t dim = o.dim;
  auto init = [&](DenseMatrix& m) {
    for (double& x : m.data) x = (rng.uniform() - 0.5) / static_cast<double>(dim);
  };
  DenseMatrix doc_vectors(docs.size(), dim);
  init(doc_vectors);
  DenseMatrix word_vectors(o.window > 0 ? vocab.size() : 0, dim);
  init(word_vectors);
  DenseMatrix out_vectors(vocab.size(), dim, 0.0);
  const NoiseSampler noise(counts);

  std::vector<double> grad(dim);
  std::vector<std::size_t> order(docs.size());
  std::iota(order.begin(), order.end(), 0);
  const double total_steps = static_cast<double>(o.epochs * total_tokens);
  double done = 0.0;

  for (std::size_t epoch = 0; epoch < o.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t d : order) {
      const auto& words = encoded[d];
      auto dv = doc_vectors.row(d);
      for (std::size_t i = 0; i < words.size(); ++i) {
        const double lr =
            std::max(o.min_learning_rate, o.learning_rate * (1.0 - done / std::max(1.0, total_steps)));
        done += 1.0;

        std::fill(grad.begin(), grad.end(), 0.0);
        ns_update(dv, words[i], o.negative, lr, noise, out_vectors, grad, rng);
        kernels::axpy(1.0, grad, dv);

        if (o.window == 0) continue;
        const std::size_t reduced = 1 + rng.index(o.window);
        const std::size_t lo = i >= reduced ? i - reduced : 0;
        const std::size_t hi = std::min(words.size() - 1, i + reduced);
        for (std::size_t c = lo; c <= hi; ++c) {
          if (c == i) continue;
          auto wv = word_vectors.row(words[c]);
          std::fill(grad.begin(), grad.end(), 0.0);
          ns_update(wv, words[i], o.negative, lr, noise, out_vectors, grad, rng);
          kernels::axpy(1.0, grad, wv);
        }
      }
    }
  }

  EmbeddingSet set;
  for (const auto& d : corpus) set.ids.push_back(d.id);
  set.vectors = std::move(doc_vectors);
  return set;
}

}  // namespace screener
