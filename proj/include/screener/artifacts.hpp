#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

#include "screener/cluster_topics.hpp"
#include "screener/corpus.hpp"
#include "screener/embeddings.hpp"
#include "screener/error.hpp"
#include "screener/feature_matrix.hpp"
#include "screener/lda.hpp"
#include "screener/strategy_config.hpp"
#include "screener/tokenizer.hpp"

namespace screener {

// Stored artifact is unreadable or its content hash does not match the sidecar.
class ArtifactError : public Error {
 public:
  using Error::Error;
};

enum class FeatureModel { kBow, kLda, kPv, kPvTm, kBowTm };

std::string to_string(FeatureModel m);
FeatureModel feature_model_from_string(const std::string& s);

// Everything that determines the extracted matrices.
struct FeatureParams {
  FeatureModel model = FeatureModel::kBow;
  TokenizerOptions tokenizer;
  std::size_t min_df = 1;
  double max_df_fraction = 1.0;
  bool sublinear_tf = false;
  LdaOptions lda;
  PvOptions pv;
  ClusterOptions cluster;
};

// Applies one feature key (model, min_df, lda_topics, pv_dim, clusters, ...).
// Returns false for keys it does not know; throws InvalidArgument for bad values.
bool apply_feature_value(FeatureParams& params, const std::string& key, const std::string& value);
std::string format_feature_params(const FeatureParams& params);

// Strategy and feature settings from one "key = value" file.
struct RunSettings {
  StrategyConfig strategy;
  FeatureParams features;
};

void apply_setting(RunSettings& settings, const std::string& key, const std::string& value);
RunSettings parse_run_settings(std::istream& in, RunSettings base = {});
RunSettings load_run_settings(const std::filesystem::path& path, RunSettings base = {});

// Digest of ids, titles, abstracts and labels in corpus order.
std::string corpus_hash(const Corpus& corpus);

// Binary matrix format (little-endian, versioned header).
void write_feature_matrix(std::ostream& out, const FeatureMatrix& m);
FeatureMatrix read_feature_matrix(std::istream& in);

struct FeatureSet {
  FeatureMatrix features;
  // Topic space for the novelty term: LDA proportions, or the cluster
  // distance rows for the *_tm models.
  std::optional<TopicMatrix> topics;
};

// Content-addressed cache of extracted matrices under `root`. Each entry is a
// directory holding matrix.bin and meta.json (cache key, parameters, SHA-256
// of every stored file). A stored file whose digest disagrees with its
// sidecar raises ArtifactError instead of being rebuilt.
class ArtifactStore {
 public:
  explicit ArtifactStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }

  // Classifier features for params.model.
  FeatureMatrix features(const Corpus& corpus, const FeatureParams& params);
  // Topic matrix used by IG with these features.
  TopicMatrix topics(const Corpus& corpus, const FeatureParams& params);
  FeatureSet feature_set(const Corpus& corpus, const FeatureParams& params, bool with_topics);

  // Directory of the entry for (name, key); exists only after a build.
  std::filesystem::path entry_dir(const std::string& name, const std::string& key) const;

 private:
  using Builder = std::function<FeatureMatrix(const std::filesystem::path& extra_dir)>;
  FeatureMatrix get_or_build(const std::string& name, const std::string& key, const std::string& params_json,
                             const Builder& build);

  FeatureMatrix bow(const Corpus& corpus, const FeatureParams& params);
  FeatureMatrix lda(const Corpus& corpus, const FeatureParams& params);
  FeatureMatrix pv(const Corpus& corpus, const FeatureParams& params);
  FeatureMatrix clustered(const Corpus& corpus, const FeatureParams& params, FeatureModel base);

  std::filesystem::path root_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

// Uncached extraction (tests, small runs).
FeatureSet build_features(const Corpus& corpus, const FeatureParams& params, bool with_topics);

}  // namespace screener
