#include "screener/lda.hpp"

#include <fstream>
#include <numeric>

#include <json.hpp>

#include "screener/error.hpp"
#include "screener/rng.hpp"

namespace screener {

std::uint64_t LdaModel::total_tokens() const {
  return std::accumulate(doc_length.begin(), doc_length.end(), std::uint64_t{0});
}

DenseMatrix LdaModel::topic_word_distribution() const {
  DenseMatrix phi(topics, vocab_size);
  const double vb = static_cast<double>(vocab_size) * beta;
  for (std::size_t k = 0; k < topics; ++k) {
    const double denom = topic_total[k] + vb;
    for (std::size_t w = 0; w < vocab_size; ++w) phi(k, w) = (topic_word_count(k, w) + beta) / denom;
  }
  return phi;
}

namespace {

void validate(const LdaOptions& o) {
  if (o.topics < 1) throw InvalidArgument("LDA needs at least one topic");
  if (!(o.resolved_alpha() > 0.0) || !(o.beta > 0.0)) throw InvalidArgument("alpha and beta must be positive");
  if (o.iterations < 1) throw InvalidArgument("LDA needs at least one sweep");
}

// Draws from the unnormalised weights in cdf (inclusive prefix sums).
std::size_t sample(const std::vector<double>& cdf, Rng& rng) {
  const double u = rng.uniform() * cdf.back();
  std::size_t k = 0;
  while (k + 1 < cdf.size() && cdf[k] <= u) ++k;
  return k;
}

}  // namespace

LdaModel lda_fit(const std::vector<std::vector<std::uint32_t>>& docs, std::size_t vocab_size,
                 const LdaOptions& options, const LdaSweepHook& on_sweep) {
  validate(options);
  if (docs.empty()) throw DegenerateInput("LDA on an empty corpus");
  const std::size_t K = options.topics;
  const std::size_t V = vocab_size;

  LdaModel m;
  m.topics = K;
  m.vocab_size = V;
  m.alpha = options.resolved_alpha();
  m.beta = options.beta;
  m.seed = options.seed;
  m.iterations = options.iterations;
  m.topic_word.assign(K * V, 0);
  m.topic_total.assign(K, 0);
  m.doc_topic.assign(docs.size() * K, 0);
  m.doc_length.resize(docs.size());

  std::size_t total = 0;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    m.doc_length[d] = static_cast<std::uint32_t>(docs[d].size());
    total += docs[d].size();
    for (std::uint32_t w : docs[d])
      if (w >= V) throw InvalidArgument("token index outside vocabulary");
  }
  if (total == 0) throw DegenerateInput("LDA corpus has no retained tokens");

  Rng rng(options.seed);
  std::vector<std::vector<std::uint32_t>> z(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    z[d].resize(docs[d].size());
    for (std::size_t i = 0; i < docs[d].size(); ++i) {
      const auto k = static_cast<std::uint32_t>(rng.index(K));
      z[d][i] = k;
      ++m.topic_word[k * V + docs[d][i]];
      ++m.topic_total[k];
      ++m.doc_topic[d * K + k];
    }
  }

  const double alpha = m.alpha, beta = m.beta, vbeta = static_cast<double>(V) * beta;
  std::vector<double> cdf(K);
  for (std::size_t sweep = 1; sweep <= options.iterations; ++sweep) {
    for (std::size_t d = 0; d < docs.size(); ++d) {
      std::uint32_t* nd = &m.doc_topic[d * K];
      for (std::size_t i = 0; i < docs[d].size(); ++i) {
        const std::uint32_t w = docs[d][i];
        std::uint32_t k = z[d][i];
        --m.topic_word[k * V + w];
        --m.topic_total[k];
        --nd[k];
        double acc = 0.0;
        for (std::size_t j = 0; j < K; ++j) {
          acc += (nd[j] + alpha) * (m.topic_word[j * V + w] + beta) / (m.topic_total[j] + vbeta);
          cdf[j] = acc;
        }
        k = static_cast<std::uint32_t>(sample(cdf, rng));
        z[d][i] = k;
        ++m.topic_word[k * V + w];
        ++m.topic_total[k];
        ++nd[k];
      }
    }
    if (on_sweep) on_sweep(m, sweep);
  }
  return m;
}

LdaModel lda_fit(const TokenizedCorpus& docs, const Vocabulary& vocab, const LdaOptions& options,
                 const LdaSweepHook& on_sweep) {
  std::vector<std::vector<std::uint32_t>> encoded;
  encoded.reserve(docs.size());
  for (const auto& d : docs) encoded.push_back(vocab.encode(d));
  LdaModel m = lda_fit(encoded, vocab.size(), options, on_sweep);
  m.vocab_hash = vocab.hash();
  return m;
}

TopicMatrix lda_doc_topics(const LdaModel& model) {
  const std::size_t K = model.topics;
  DenseMatrix v(model.documents(), K);
  std::vector<std::size_t> fallback;
  for (std::size_t d = 0; d < model.documents(); ++d) {
    if (model.doc_length[d] == 0) {
      for (std::size_t k = 0; k < K; ++k) v(d, k) = 1.0 / static_cast<double>(K);
      fallback.push_back(d);
      continue;
    }
    const double denom = model.doc_length[d] + static_cast<double>(K) * model.alpha;
    for (std::size_t k = 0; k < K; ++k) v(d, k) = (model.doc_topic_count(d, k) + model.alpha) / denom;
  }
  return TopicMatrix(std::move(v), std::move(fallback));
}

TopicMatrix lda_infer(const LdaModel& model, const std::vector<std::vector<std::uint32_t>>& docs,
                      std::size_t iterations, std::uint64_t seed) {
  const std::size_t K = model.topics, V = model.vocab_size;
  const double alpha = model.alpha, beta = model.beta, vbeta = static_cast<double>(V) * beta;
  Rng rng(seed);

  // The fixed topic-word term is shared by every document.
  DenseMatrix word_weight(V, K);
  for (std::size_t w = 0; w < V; ++w)
    for (std::size_t k = 0; k < K; ++k)
      word_weight(w, k) = (model.topic_word_count(k, w) + beta) / (model.topic_total[k] + vbeta);

  DenseMatrix out(docs.size(), K);
  std::vector<std::size_t> fallback;
  std::vector<double> cdf(K);
  std::vector<std::uint32_t> nd(K);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    std::vector<std::uint32_t> tokens;
    for (std::uint32_t w : docs[d])
      if (w < V) tokens.push_back(w);
    if (tokens.empty()) {
      for (std::size_t k = 0; k < K; ++k) out(d, k) = 1.0 / static_cast<double>(K);
      fallback.push_back(d);
      continue;
    }
    std::fill(nd.begin(), nd.end(), 0u);
    std::vector<std::uint32_t> z(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      z[i] = static_cast<std::uint32_t>(rng.index(K));
      ++nd[z[i]];
    }
    for (std::size_t it = 0; it < iterations; ++it) {
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        --nd[z[i]];
        const auto ww = word_weight.row(tokens[i]);
        double acc = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
          acc += (nd[k] + alpha) * ww[k];
          cdf[k] = acc;
        }
        z[i] = static_cast<std::uint32_t>(sample(cdf, rng));
        ++nd[z[i]];
      }
    }
    const double denom = tokens.size() + static_cast<double>(K) * alpha;
    for (std::size_t k = 0; k < K; ++k) out(d, k) = (nd[k] + alpha) / denom;
  }
  return TopicMatrix(std::move(out), std::move(fallback));
}

TopicMatrix lda_infer(const LdaModel& model, const Vocabulary& vocab, const TokenizedCorpus& docs,
                      std::size_t iterations, std::uint64_t seed) {
  if (!model.vocab_hash.empty() && model.vocab_hash != vocab.hash()) {
    throw InvalidArgument("vocabulary does not match the one the LDA model was trained on");
  }
  std::vector<std::vector<std::uint32_t>> encoded;
  encoded.reserve(docs.size());
  for (const auto& d : docs) encoded.push_back(vocab.encode(d));
  return lda_infer(model, encoded, iterations, seed);
}

namespace {
constexpr int kLdaFormatVersion = 1;
}

void save_lda_model(const std::filesystem::path& path, const LdaModel& m) {
  nlohmann::json j = {{"format", "screener-lda"},
                      {"version", kLdaFormatVersion},
                      {"topics", m.topics},
                      {"vocab_size", m.vocab_size},
                      {"alpha", m.alpha},
                      {"beta", m.beta},
                      {"seed", m.seed},
                      {"iterations", m.iterations},
                      {"vocab_hash", m.vocab_hash},
                      {"topic_word", m.topic_word},
                      {"doc_topic", m.doc_topic},
                      {"doc_length", m.doc_length}};
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump() << '\n';
}

LdaModel load_lda_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed LDA model: ") + e.what(), 0);
  }
  if (j.value("format", "") != "screener-lda" || j.value("version", 0) != kLdaFormatVersion) {
    throw ParseError("unsupported LDA model format or version", 0);
  }
  LdaModel m;
  try {
    m.topics = j.at("topics");
    m.vocab_size = j.at("vocab_size");
    m.alpha = j.at("alpha");
    m.beta = j.at("beta");
    m.seed = j.at("seed");
    m.iterations = j.at("iterations");
    m.vocab_hash = j.at("vocab_hash");
    m.topic_word = j.at("topic_word").get<std::vector<std::uint32_t>>();
    m.doc_topic = j.at("doc_topic").get<std::vector<std::uint32_t>>();
    m.doc_length = j.at("doc_length").get<std::vector<std::uint32_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed LDA model: ") + e.what(), 0);
  }
  if (m.topic_word.size() != m.topics * m.vocab_size || m.doc_topic.size() != m.doc_length.size() * m.topics) {
    throw ParseError("LDA model count matrices have inconsistent shapes", 0);
  }
  m.topic_total.assign(m.topics, 0);
  for (std::size_t k = 0; k < m.topics; ++k)
    for (std::size_t w = 0; w < m.vocab_size; ++w) m.topic_total[k] += m.topic_word_count(k, w);
  return m;
}

}  // namespace screener
