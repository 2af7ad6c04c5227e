#include "screener/artifacts.hpp"

#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "screener/digest.hpp"
#include "screener/tfidf.hpp"
#include "screener/vocabulary.hpp"

namespace screener {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

constexpr char kMagic[8] = {'S', 'C', 'R', 'M', 'A', 'T', '0', '1'};
constexpr std::uint32_t kMatrixVersion = 1;
constexpr int kMetaVersion = 1;

template <class T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
void put_vec(std::ostream& out, const std::vector<T>& v) {
  put<std::uint64_t>(out, v.size());
  if (!v.empty()) out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <class T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw ArtifactError("truncated matrix artifact");
  return v;
}

template <class T>
std::vector<T> get_vec(std::istream& in, std::uint64_t limit) {
  const auto n = get<std::uint64_t>(in);
  if (n > limit) throw ArtifactError("corrupt matrix artifact (array length)");
  std::vector<T> v(n);
  if (n && !in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)))) {
    throw ArtifactError("truncated matrix artifact");
  }
  return v;
}

std::string file_sha256(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ArtifactError("cannot read " + p.string());
  Sha256 h;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) h.update({buf.data(), static_cast<std::size_t>(in.gcount())});
  }
  return h.hex();
}

ordered_json tokenizer_json(const FeatureParams& p) {
  return {{"lowercase", p.tokenizer.lowercase},
          {"keep_hyphens", p.tokenizer.keep_hyphens},
          {"min_length", p.tokenizer.min_length},
          {"stop_words", p.tokenizer.use_stop_words}};
}

ordered_json bow_json(const FeatureParams& p) {
  return {{"tokenizer", tokenizer_json(p)},
          {"min_df", p.min_df},
          {"max_df_fraction", p.max_df_fraction},
          {"sublinear_tf", p.sublinear_tf}};
}

ordered_json lda_json(const FeatureParams& p) {
  return {{"tokenizer", tokenizer_json(p)},
          {"min_df", p.min_df},
          {"max_df_fraction", p.max_df_fraction},
          {"topics", p.lda.topics},
          {"alpha", p.lda.resolved_alpha()},
          {"beta", p.lda.beta},
          {"iterations", p.lda.iterations},
          {"seed", p.lda.seed}};
}

ordered_json pv_json(const FeatureParams& p) {
  return {{"tokenizer", tokenizer_json(p)},
          {"dim", p.pv.dim},
          {"window", p.pv.window},
          {"negative", p.pv.negative},
          {"epochs", p.pv.epochs},
          {"learning_rate", p.pv.learning_rate},
          {"min_learning_rate", p.pv.min_learning_rate},
          {"seed", p.pv.seed}};
}

ordered_json cluster_json(const FeatureParams& p, FeatureModel base) {
  return {{"base", base == FeatureModel::kPv ? pv_json(p) : bow_json(p)},
          {"clusters", p.cluster.clusters},
          {"distance", p.cluster.distance == ClusterDistance::kCosine ? "cosine" : "euclidean"},
          {"max_iterations", p.cluster.max_iterations},
          {"seed", p.cluster.seed}};
}

struct Text {
  TokenizedCorpus tokens;
  Vocabulary vocab;
};

Text prepare_text(const Corpus& corpus, const FeatureParams& p, bool need_vocab) {
  Text t;
  t.tokens = tokenize_corpus(corpus, Tokenizer(p.tokenizer));
  if (need_vocab) t.vocab = build_vocabulary(t.tokens, p.min_df, p.max_df_fraction);
  return t;
}

FeatureMatrix build_bow(const Corpus& corpus, const FeatureParams& p) {
  const Text t = prepare_text(corpus, p, true);
  return tfidf(t.tokens, t.vocab, p.sublinear_tf);
}

FeatureMatrix build_lda(const Corpus& corpus, const FeatureParams& p, const fs::path* extra) {
  const Text t = prepare_text(corpus, p, true);
  const LdaModel model = lda_fit(t.tokens, t.vocab, p.lda);
  if (extra) save_lda_model(*extra / "lda_model.json", model);
  const TopicMatrix topics = lda_doc_topics(model);
  FeatureMatrix m = topics.as_features();
  m.set_flagged_rows(topics.fallback_rows());
  return m;
}

FeatureMatrix build_pv(const Corpus& corpus, const FeatureParams& p, const fs::path* extra) {
  const Text t = prepare_text(corpus, p, false);
  const EmbeddingSet set = pv_train(corpus, t.tokens, p.pv);
  if (extra) save_embeddings(*extra / "embeddings.txt", set);
  return set.to_features(corpus);
}

TopicMatrix to_topics(const FeatureMatrix& m) { return TopicMatrix(m.to_dense(), m.flagged_rows()); }

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) throw InvalidArgument("bad value \"" + v + "\" for " + key);
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InvalidArgument("bad boolean \"" + v + "\" for " + key);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

bool apply_feature_value(FeatureParams& p, const std::string& key, const std::string& v) {
  if (key == "model") p.model = feature_model_from_string(v);
  else if (key == "min_df") p.min_df = parse_number<std::size_t>(key, v);
  else if (key == "max_df_fraction") p.max_df_fraction = parse_number<double>(key, v);
  else if (key == "sublinear_tf") p.sublinear_tf = parse_bool(key, v);
  else if (key == "keep_hyphens") p.tokenizer.keep_hyphens = parse_bool(key, v);
  else if (key == "stop_words") p.tokenizer.use_stop_words = parse_bool(key, v);
  else if (key == "min_token_length") p.tokenizer.min_length = parse_number<std::size_t>(key, v);
  else if (key == "lda_topics") p.lda.topics = parse_number<std::size_t>(key, v);
  else if (key == "lda_alpha") {
    if (v.empty() || v == "auto") p.lda.alpha.reset();
    else p.lda.alpha = parse_number<double>(key, v);
  } else if (key == "lda_beta") p.lda.beta = parse_number<double>(key, v);
  else if (key == "lda_iterations") p.lda.iterations = parse_number<std::size_t>(key, v);
  else if (key == "lda_seed") p.lda.seed = parse_number<std::uint64_t>(key, v);
  else if (key == "pv_dim") p.pv.dim = parse_number<std::size_t>(key, v);
  else if (key == "pv_window") p.pv.window = parse_number<std::size_t>(key, v);
  else if (key == "pv_negative") p.pv.negative = parse_number<std::size_t>(key, v);
  else if (key == "pv_epochs") p.pv.epochs = parse_number<std::size_t>(key, v);
  else if (key == "pv_learning_rate") p.pv.learning_rate = parse_number<double>(key, v);
  else if (key == "pv_seed") p.pv.seed = parse_number<std::uint64_t>(key, v);
  else if (key == "clusters") p.cluster.clusters = parse_number<std::size_t>(key, v);
  else if (key == "cluster_distance") {
    if (v == "euclidean") p.cluster.distance = ClusterDistance::kEuclidean;
    else if (v == "cosine") p.cluster.distance = ClusterDistance::kCosine;
    else throw InvalidArgument("bad value \"" + v + "\" for cluster_distance");
  } else if (key == "cluster_iterations") p.cluster.max_iterations = parse_number<std::size_t>(key, v);
  else if (key == "cluster_seed") p.cluster.seed = parse_number<std::uint64_t>(key, v);
  else return false;
  return true;
}

std::string format_feature_params(const FeatureParams& p) {
  std::ostringstream os;
  os << "model = " << to_string(p.model) << '\n'
     << "min_df = " << p.min_df << '\n'
     << "max_df_fraction = " << fmt(p.max_df_fraction) << '\n'
     << "sublinear_tf = " << (p.sublinear_tf ? "true" : "false") << '\n'
     << "keep_hyphens = " << (p.tokenizer.keep_hyphens ? "true" : "false") << '\n'
     << "stop_words = " << (p.tokenizer.use_stop_words ? "true" : "false") << '\n'
     << "min_token_length = " << p.tokenizer.min_length << '\n'
     << "lda_topics = " << p.lda.topics << '\n'
     << "lda_alpha = " << (p.lda.alpha ? fmt(*p.lda.alpha) : "auto") << '\n'
     << "lda_beta = " << fmt(p.lda.beta) << '\n'
     << "lda_iterations = " << p.lda.iterations << '\n'
     << "lda_seed = " << p.lda.seed << '\n'
     << "pv_dim = " << p.pv.dim << '\n'
     << "pv_window = " << p.pv.window << '\n'
     << "pv_negative = " << p.pv.negative << '\n'
     << "pv_epochs = " << p.pv.epochs << '\n'
     << "pv_learning_rate = " << fmt(p.pv.learning_rate) << '\n'
     << "pv_seed = " << p.pv.seed << '\n'
     << "clusters = " << p.cluster.clusters << '\n'
     << "cluster_distance = " << (p.cluster.distance == ClusterDistance::kCosine ? "cosine" : "euclidean") << '\n'
     << "cluster_iterations = " << p.cluster.max_iterations << '\n'
     << "cluster_seed = " << p.cluster.seed << '\n';
  return os.str();
}

void apply_setting(RunSettings& settings, const std::string& key, const std::string& value) {
  if (!apply_feature_value(settings.features, key, value)) apply_config_value(settings.strategy, key, value);
}

RunSettings parse_run_settings(std::istream& in, RunSettings base) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", lineno);
    try {
      apply_setting(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const InvalidArgument& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  base.strategy.validate();
  return base;
}

RunSettings load_run_settings(const std::filesystem::path& path, RunSettings base) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  return parse_run_settings(in, base);
}

std::string to_string(FeatureModel m) {
  switch (m) {
    case FeatureModel::kBow: return "bow";
    case FeatureModel::kLda: return "lda";
    case FeatureModel::kPv: return "pv";
    case FeatureModel::kPvTm: return "pv_tm";
    case FeatureModel::kBowTm: return "bow_tm";
  }
  return "?";
}

FeatureModel feature_model_from_string(const std::string& s) {
  if (s == "bow") return FeatureModel::kBow;
  if (s == "lda") return FeatureModel::kLda;
  if (s == "pv") return FeatureModel::kPv;
  if (s == "pv_tm") return FeatureModel::kPvTm;
  if (s == "bow_tm") return FeatureModel::kBowTm;
  throw InvalidArgument("unknown feature model \"" + s + "\" (expected bow, lda, pv, pv_tm or bow_tm)");
}

std::string corpus_hash(const Corpus& corpus) {
  Sha256 h;
  h.field("screener-corpus");
  for (const auto& d : corpus) {
    h.field(d.id).field(d.title).field(d.abstract);
    h.field(d.label ? std::to_string(*d.label) : "-");
  }
  return h.hex();
}

void write_feature_matrix(std::ostream& out, const FeatureMatrix& m) {
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kMatrixVersion);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(m.kind()));
  put<std::uint8_t>(out, m.is_sparse() ? 1 : 0);
  put<std::uint64_t>(out, m.rows());
  put<std::uint64_t>(out, m.cols());
  std::vector<std::uint64_t> row_ptr(m.row_ptr().begin(), m.row_ptr().end());
  put_vec(out, row_ptr);
  put_vec(out, m.indices());
  put_vec(out, m.values());
  std::vector<std::uint64_t> flagged(m.flagged_rows().begin(), m.flagged_rows().end());
  put_vec(out, flagged);
  if (!out) throw ArtifactError("failed to write matrix artifact");
}

FeatureMatrix read_feature_matrix(std::istream& in) {
  char magic[sizeof kMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw ArtifactError("not a matrix artifact");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kMatrixVersion) throw ArtifactError("unsupported matrix artifact version " + std::to_string(version));
  const auto kind = get<std::uint8_t>(in);
  if (kind > static_cast<std::uint8_t>(FeatureKind::kClusterDistanceDense)) throw ArtifactError("bad feature kind");
  const bool sparse = get<std::uint8_t>(in) != 0;
  const auto rows = get<std::uint64_t>(in);
  const auto cols = get<std::uint64_t>(in);
  constexpr std::uint64_t kLimit = std::uint64_t{1} << 40;
  const auto row_ptr = get_vec<std::uint64_t>(in, kLimit);
  auto indices = get_vec<std::uint32_t>(in, kLimit);
  auto values = get_vec<double>(in, kLimit);
  const auto flagged = get_vec<std::uint64_t>(in, kLimit);

  try {
    FeatureMatrix m;
    if (sparse) {
      m = FeatureMatrix::from_csr(static_cast<FeatureKind>(kind), rows, cols,
                                  std::vector<std::size_t>(row_ptr.begin(), row_ptr.end()), std::move(indices),
                                  std::move(values));
    } else {
      if (values.size() != rows * cols) throw ArtifactError("corrupt dense matrix artifact");
      DenseMatrix d(rows, cols);
      d.data = std::move(values);
      m = FeatureMatrix::from_dense(static_cast<FeatureKind>(kind), std::move(d));
    }
    m.set_flagged_rows(std::vector<std::size_t>(flagged.begin(), flagged.end()));
    return m;
  } catch (const InvalidArgument& e) {
    throw ArtifactError(std::string("corrupt matrix artifact: ") + e.what());
  }
}

ArtifactStore::ArtifactStore(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

fs::path ArtifactStore::entry_dir(const std::string& name, const std::string& key) const {
  return root_ / (name + "-" + key.substr(0, 16));
}

FeatureMatrix ArtifactStore::get_or_build(const std::string& name, const std::string& key,
                                          const std::string& params_json, const Builder& build) {
  const fs::path dir = entry_dir(name, key);
  const fs::path meta_path = dir / "meta.json";
  if (fs::exists(meta_path)) {
    ordered_json meta;
    try {
      std::ifstream in(meta_path);
      meta = ordered_json::parse(in);
    } catch (const std::exception& e) {
      throw ArtifactError("unreadable artifact metadata " + meta_path.string() + ": " + e.what());
    }
    if (meta.value("format", "") != "screener-artifact" || meta.value("version", 0) != kMetaVersion) {
      throw ArtifactError("unsupported artifact metadata in " + dir.string());
    }
    if (meta.value("key", "") != key) throw ArtifactError("cache key mismatch in " + dir.string());
    for (const auto& [file, digest] : meta.at("files").items()) {
      const fs::path p = dir / file;
      if (!fs::exists(p)) throw ArtifactError("artifact file missing: " + p.string());
      if (file_sha256(p) != digest.get<std::string>()) {
        throw ArtifactError("hash mismatch for " + p.string() + "; refusing to use or rebuild it");
      }
    }
    std::ifstream in(dir / "matrix.bin", std::ios::binary);
    ++hits_;
    return read_feature_matrix(in);
  }

  ++misses_;
  const fs::path tmp = dir.string() + ".tmp-" + std::to_string(::getpid());
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  FeatureMatrix m = build(tmp);
  {
    std::ofstream out(tmp / "matrix.bin", std::ios::binary);
    write_feature_matrix(out, m);
  }
  ordered_json files = ordered_json::object();
  std::vector<fs::path> stored;
  for (const auto& e : fs::directory_iterator(tmp)) stored.push_back(e.path());
  std::sort(stored.begin(), stored.end());
  for (const auto& p : stored) files[p.filename().string()] = file_sha256(p);
  ordered_json meta = {{"format", "screener-artifact"},
                       {"version", kMetaVersion},
                       {"name", name},
                       {"key", key},
                       {"params", ordered_json::parse(params_json)},
                       {"rows", m.rows()},
                       {"cols", m.cols()},
                       {"files", files}};
  {
    std::ofstream out(tmp / "meta.json");
    out << meta.dump(2) << '\n';
    if (!out) throw ArtifactError("failed to write " + (tmp / "meta.json").string());
  }
  fs::remove_all(dir);
  fs::rename(tmp, dir);
  return m;
}

namespace {

std::string make_key(const std::string& name, const Corpus& corpus, const std::string& params_json) {
  Sha256 h;
  h.field("screener-artifact-v1").field(name).field(corpus_hash(corpus)).field(params_json);
  return h.hex();
}

}  // namespace

FeatureMatrix ArtifactStore::bow(const Corpus& corpus, const FeatureParams& params) {
  const std::string pj = bow_json(params).dump();
  return get_or_build("bow", make_key("bow", corpus, pj), pj,
                      [&](const fs::path&) { return build_bow(corpus, params); });
}

FeatureMatrix ArtifactStore::lda(const Corpus& corpus, const FeatureParams& params) {
  const std::string pj = lda_json(params).dump();
  return get_or_build("lda", make_key("lda", corpus, pj), pj,
                      [&](const fs::path& extra) { return build_lda(corpus, params, &extra); });
}

FeatureMatrix ArtifactStore::pv(const Corpus& corpus, const FeatureParams& params) {
  const std::string pj = pv_json(params).dump();
  return get_or_build("pv", make_key("pv", corpus, pj), pj,
                      [&](const fs::path& extra) { return build_pv(corpus, params, &extra); });
}

FeatureMatrix ArtifactStore::clustered(const Corpus& corpus, const FeatureParams& params, FeatureModel base) {
  const std::string name = base == FeatureModel::kPv ? "pv_tm" : "bow_tm";
  const std::string pj = cluster_json(params, base).dump();
  return get_or_build(name, make_key(name, corpus, pj), pj, [&](const fs::path&) {
    const FeatureMatrix input = base == FeatureModel::kPv ? pv(corpus, params) : bow(corpus, params);
    return cluster_topics(input, params.cluster).second;
  });
}

FeatureMatrix ArtifactStore::features(const Corpus& corpus, const FeatureParams& params) {
  switch (params.model) {
    case FeatureModel::kBow: return bow(corpus, params);
    case FeatureModel::kLda: return lda(corpus, params);
    case FeatureModel::kPv: return pv(corpus, params);
    case FeatureModel::kPvTm: return clustered(corpus, params, FeatureModel::kPv);
    case FeatureModel::kBowTm: return clustered(corpus, params, FeatureModel::kBow);
  }
  throw InvalidArgument("unknown feature model");
}

TopicMatrix ArtifactStore::topics(const Corpus& corpus, const FeatureParams& params) {
  switch (params.model) {
    case FeatureModel::kPvTm: return to_topics(clustered(corpus, params, FeatureModel::kPv));
    case FeatureModel::kBowTm: return to_topics(clustered(corpus, params, FeatureModel::kBow));
    default: return to_topics(lda(corpus, params));
  }
}

FeatureSet ArtifactStore::feature_set(const Corpus& corpus, const FeatureParams& params, bool with_topics) {
  FeatureSet set;
  set.features = features(corpus, params);
  if (with_topics) set.topics = topics(corpus, params);
  return set;
}

FeatureSet build_features(const Corpus& corpus, const FeatureParams& params, bool with_topics) {
  FeatureSet set;
  std::optional<FeatureMatrix> lda_rows;
  switch (params.model) {
    case FeatureModel::kBow: set.features = build_bow(corpus, params); break;
    case FeatureModel::kLda: lda_rows = build_lda(corpus, params, nullptr); set.features = *lda_rows; break;
    case FeatureModel::kPv: set.features = build_pv(corpus, params, nullptr); break;
    case FeatureModel::kPvTm:
      set.features = cluster_topics(build_pv(corpus, params, nullptr), params.cluster).second;
      break;
    case FeatureModel::kBowTm: set.features = cluster_topics(build_bow(corpus, params), params.cluster).second; break;
  }
  if (with_topics) {
    if (params.model == FeatureModel::kPvTm || params.model == FeatureModel::kBowTm) {
      set.topics = to_topics(set.features);
    } else {
      if (!lda_rows) lda_rows = build_lda(corpus, params, nullptr);
      set.topics = to_topics(*lda_rows);
    }
  }
  return set;
}

}  // namespace screener
