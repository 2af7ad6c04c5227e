#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace screener {

// A citation to be screened. label: 1 = relevant (included), 0 = excluded.
struct Document {
  std::string id;
  std::string title;
  std::string abstract;
  std::optional<int> label;

  bool operator==(const Document&) const = default;
};

enum class CorpusFormat { kJsonl, kCsv };

// Ordered, immutable collection of documents with unique ids.
class Corpus {
 public:
  Corpus() = default;
  // Throws DuplicateIdError, InvalidArgument (empty title and abstract, bad label).
  explicit Corpus(std::vector<Document> documents);

  std::size_t size() const { return documents_.size(); }
  bool empty() const { return documents_.empty(); }
  const Document& operator[](std::size_t i) const { return documents_[i]; }
  const std::vector<Document>& documents() const { return documents_; }
  auto begin() const { return documents_.begin(); }
  auto end() const { return documents_.end(); }

  std::optional<std::size_t> index_of(const std::string& id) const;
  bool fully_labelled() const;
  std::size_t relevant_count() const;
  // Defined only when every document carries a label.
  std::optional<double> relevant_fraction() const;
  // Gold labels in corpus order; throws DegenerateInput when any label is absent.
  std::vector<int> gold_labels() const;

  bool operator==(const Corpus& other) const { return documents_ == other.documents_; }

 private:
  std::vector<Document> documents_;
  std::unordered_map<std::string, std::size_t> index_;
};

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format);
// Format chosen from the extension: .csv => CSV, anything else => JSONL.
Corpus load_corpus(const std::filesystem::path& path);
Corpus parse_jsonl(std::istream& in);
Corpus parse_csv(std::istream& in);

void write_jsonl(std::ostream& out, const Corpus& corpus);
void write_csv(std::ostream& out, const Corpus& corpus);
void save_corpus(const std::filesystem::path& path, const Corpus& corpus, CorpusFormat format);

}  // namespace screener
