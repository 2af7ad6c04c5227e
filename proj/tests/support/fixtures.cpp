#include "fixtures.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

namespace fixtures {

using screener::Corpus;
using screener::Document;

Document doc(std::string id, std::string title, std::string abstract, std::optional<int> label) {
  return Document{std::move(id), std::move(title), std::move(abstract), label};
}

Corpus tiny_corpus() {
  return Corpus({doc("a", "Statin therapy", "Statins reduce cholesterol in adults.", 1),
                 doc("b", "Exercise and mood", "Regular exercise improves mood in adults.", 0),
                 doc("c", "Statin adherence", "Adherence to statin therapy is poor.", 0)});
}

std::vector<std::size_t> TwoCluster::members(int c) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < cluster.size(); ++i)
    if (cluster[i] == c) out.push_back(i);
  return out;
}

TwoCluster two_cluster_corpus(std::size_t n, double relevant_fraction, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  auto pick = [&](const std::string& prefix, std::size_t count) {
    return prefix + std::to_string(std::uniform_int_distribution<std::size_t>(0, count - 1)(gen));
  };
  const std::size_t relevant = static_cast<std::size_t>(relevant_fraction * static_cast<double>(n) + 0.5);
  TwoCluster out;
  std::vector<Document> docs;
  for (std::size_t i = 0; i < n; ++i) {
    const int c = i < n / 2 ? 0 : 1;
    const std::size_t in_cluster = c == 0 ? i : i - n / 2;
    const bool rel = in_cluster < (c == 0 ? relevant / 2 : relevant - relevant / 2);
    const std::string words = c == 0 ? "alpha" : "beta";
    std::ostringstream title, abstract;
    for (int w = 0; w < 6; ++w) title << pick(words, 150) << ' ';
    for (int w = 0; w < 40; ++w) abstract << pick(words, 150) << ' ';
    for (int w = 0; w < 12; ++w) abstract << pick("common", 60) << ' ';
    if (rel) {
      for (int w = 0; w < 8; ++w) abstract << pick(c == 0 ? "relalpha" : "relbeta", 8) << ' ';
    }
    docs.push_back(doc("doc" + std::to_string(i), title.str(), abstract.str(), rel ? 1 : 0));
    out.cluster.push_back(c);
  }
  // Interleave so corpus order carries no cluster information.
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), gen);
  std::vector<Document> shuffled;
  std::vector<int> cluster;
  for (std::size_t i : perm) {
    shuffled.push_back(docs[i]);
    cluster.push_back(out.cluster[i]);
  }
  out.corpus = Corpus(std::move(shuffled));
  out.cluster = std::move(cluster);
  return out;
}

LdaSynthetic lda_synthetic(std::size_t documents, std::size_t doc_length, std::size_t k, std::size_t block,
                           std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  LdaSynthetic out;
  out.vocab_size = k * block;
  out.phi = screener::DenseMatrix(k, out.vocab_size);
  std::gamma_distribution<double> word_weight(2.0, 1.0);
  for (std::size_t t = 0; t < k; ++t) {
    double total = 0.0;
    for (std::size_t w = 0; w < block; ++w) total += out.phi(t, t * block + w) = word_weight(gen);
    for (std::size_t w = 0; w < block; ++w) out.phi(t, t * block + w) /= total;
  }
  std::gamma_distribution<double> mix(1.0, 1.0);
  for (std::size_t d = 0; d < documents; ++d) {
    std::vector<double> theta(k);
    for (auto& x : theta) x = mix(gen);
    std::discrete_distribution<std::size_t> topic(theta.begin(), theta.end());
    std::vector<std::uint32_t> words;
    for (std::size_t i = 0; i < doc_length; ++i) {
      const std::size_t t = topic(gen);
      std::discrete_distribution<std::size_t> word(out.phi.row(t).begin(), out.phi.row(t).end());
      words.push_back(static_cast<std::uint32_t>(word(gen)));
    }
    out.docs.push_back(std::move(words));
  }
  return out;
}

Corpus random_corpus(std::size_t n, double p, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::bernoulli_distribution rel(p);
  std::uniform_int_distribution<int> word(0, 79);
  std::vector<Document> docs;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool r = rel(gen) || (i + 1 == n && positives == 0);
    positives += r;
    std::ostringstream text;
    for (int w = 0; w < 25; ++w) text << "w" << word(gen) << ' ';
    if (r) text << "signal" << word(gen) % 4 << ' ';
    docs.push_back(doc("r" + std::to_string(i), "", text.str(), r ? 1 : 0));
  }
  return Corpus(std::move(docs));
}

TempDir::TempDir() {
  static std::mt19937_64 gen(std::random_device{}());
  path_ = std::filesystem::temp_directory_path() / ("screener-test-" + std::to_string(gen()));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

}  // namespace fixtures
