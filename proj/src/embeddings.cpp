#include "screener/embeddings.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "screener/error.hpp"

namespace screener {

FeatureMatrix EmbeddingSet::to_features(const Corpus& corpus) const {
  std::unordered_map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < ids.size(); ++i) pos.emplace(ids[i], i);
  DenseMatrix m(corpus.size(), dim());
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    auto it = pos.find(corpus[d].id);
    if (it == pos.end()) throw MissingIdError(corpus[d].id);
    auto src = vectors.row(it->second);
    std::copy(src.begin(), src.end(), m.row(d).begin());
  }
  return FeatureMatrix::from_dense(FeatureKind::kEmbeddingDense, std::move(m));
}

namespace {

double parse_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError("non-numeric value \"" + std::string(s) + "\"", line);
  }
  return v;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const std::size_t b = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > b) out.push_back(s.substr(b, i - b));
  }
  return out;
}

}  // namespace

EmbeddingSet parse_embeddings(std::istream& in, const Corpus& corpus) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty embedding file", 1);
  const auto header = split_ws(line);
  if (header.size() != 2) throw ParseError("header must be \"n dim\"", 1);
  const auto n = static_cast<std::size_t>(parse_double(header[0], 1));
  const auto dim = static_cast<std::size_t>(parse_double(header[1], 1));
  if (dim == 0) throw ParseError("embedding dimension must be positive", 1);

  std::unordered_map<std::string, std::vector<double>> by_id;
  std::size_t lineno = 1, count = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto parts = split_ws(line);
    if (parts.empty()) continue;
    if (parts.size() != dim + 1) {
      throw ParseError("dimension mismatch: expected " + std::to_string(dim) + " values, got " +
                           std::to_string(parts.size() - 1),
                       lineno);
    }
    std::vector<double> v(dim);
    for (std::size_t i = 0; i < dim; ++i) v[i] = parse_double(parts[i + 1], lineno);
    if (!by_id.emplace(std::string(parts[0]), std::move(v)).second) {
      throw DuplicateIdError(std::string(parts[0]));
    }
    ++count;
  }
  if (count != n) {
    throw ParseError("header declares " + std::to_string(n) + " vectors, file has " + std::to_string(count), 1);
  }

  EmbeddingSet set;
  set.vectors = DenseMatrix(corpus.size(), dim);
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    auto it = by_id.find(corpus[d].id);
    if (it == by_id.end()) throw MissingIdError(corpus[d].id);
    set.ids.push_back(corpus[d].id);
    std::copy(it->second.begin(), it->second.end(), set.vectors.row(d).begin());
  }
  return set;
}

EmbeddingSet load_embeddings(const std::filesystem::path& path, const Corpus& corpus) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embedding file " + path.string());
  return parse_embeddings(in, corpus);
}

void write_embeddings(std::ostream& out, const EmbeddingSet& set) {
  out << set.size() << ' ' << set.dim() << '\n';
  char buf[32];
  for (std::size_t i = 0; i < set.size(); ++i) {
    out << set.ids[i];
    for (double x : set.vectors.row(i)) {
      std::snprintf(buf, sizeof buf, "%.17g", x);
      out << ' ' << buf;
    }
    out << '\n';
  }
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingSet& set) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write embedding file " + path.string());
  write_embeddings(out, set);
}

}  // namespace screener
