#include "screener/corpus.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "screener/error.hpp"

namespace screener {

using nlohmann::json;

Corpus::Corpus(std::vector<Document> documents) : documents_(std::move(documents)) {
  index_.reserve(documents_.size());
  for (std::size_t i = 0; i < documents_.size(); ++i) {
    const Document& d = documents_[i];
    if (d.title.empty() && d.abstract.empty()) {
      throw InvalidArgument("document \"" + d.id + "\" has neither title nor abstract");
    }
    if (d.label && *d.label != 0 && *d.label != 1) {
      throw InvalidArgument("document \"" + d.id + "\" has label outside {0,1}");
    }
    if (!index_.emplace(d.id, i).second) throw DuplicateIdError(d.id);
  }
}

std::optional<std::size_t> Corpus::index_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool Corpus::fully_labelled() const {
  for (const auto& d : documents_)
    if (!d.label) return false;
  return true;
}

std::size_t Corpus::relevant_count() const {
  std::size_t r = 0;
  for (const auto& d : documents_) r += d.label.value_or(0) == 1;
  return r;
}

std::optional<double> Corpus::relevant_fraction() const {
  if (documents_.empty() || !fully_labelled()) return std::nullopt;
  return static_cast<double>(relevant_count()) / static_cast<double>(documents_.size());
}

std::vector<int> Corpus::gold_labels() const {
  std::vector<int> out;
  out.reserve(documents_.size());
  for (const auto& d : documents_) {
    if (!d.label) throw DegenerateInput("document \"" + d.id + "\" has no gold label");
    out.push_back(*d.label);
  }
  return out;
}

namespace {

std::optional<int> parse_label(const json& v, std::size_t line) {
  if (v.is_null()) return std::nullopt;
  if (v.is_number_integer()) {
    const auto x = v.get<long long>();
    if (x == 0 || x == 1) return static_cast<int>(x);
  }
  throw ParseError("label must be 0 or 1, got " + v.dump(), line);
}

std::string required_string(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string("missing field \"") + key + "\"", line);
  if (!it->is_string()) throw ParseError(std::string("field \"") + key + "\" must be a string", line);
  return it->get<std::string>();
}

Corpus build(std::vector<Document> docs, const std::vector<std::size_t>& lines) {
  // Re-raise construction failures with the offending line attached.
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (!seen.emplace(docs[i].id, i).second) throw DuplicateIdError(docs[i].id);
    if (docs[i].title.empty() && docs[i].abstract.empty()) {
      throw ParseError("document \"" + docs[i].id + "\" has neither title nor abstract", lines[i]);
    }
  }
  return Corpus(std::move(docs));
}

}  // namespace

Corpus parse_jsonl(std::istream& in) {
  std::vector<Document> docs;
  std::vector<std::size_t> lines;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), lineno);
    }
    if (!obj.is_object()) throw ParseError("expected a JSON object", lineno);
    Document d;
    d.id = required_string(obj, "id", lineno);
    d.title = required_string(obj, "title", lineno);
    d.abstract = required_string(obj, "abstract", lineno);
    if (auto it = obj.find("label"); it != obj.end()) d.label = parse_label(*it, lineno);
    docs.push_back(std::move(d));
    lines.push_back(lineno);
  }
  return build(std::move(docs), lines);
}

namespace {

// RFC 4180 record reader. Returns false at end of input. start_line receives
// the 1-based line on which the record begins.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields, std::size_t& lineno,
                     std::size_t& start_line) {
  fields.clear();
  if (in.peek() == std::char_traits<char>::eof()) return false;
  ++lineno;
  start_line = lineno;
  std::string field;
  bool quoted = false;
  bool field_was_quoted = false;
  char c;
  while (in.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++lineno;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      if (!field.empty()) throw ParseError("stray quote inside unquoted field", lineno);
      quoted = true;
      field_was_quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      field_was_quoted = false;
    } else if (c == '\n') {
      if (!field.empty() && field.back() == '\r' && !field_was_quoted) field.pop_back();
      fields.push_back(std::move(field));
      return true;
    } else {
      field.push_back(c);
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", start_line);
  if (!field.empty() && field.back() == '\r') field.pop_back();
  fields.push_back(std::move(field));
  return true;
}

}  // namespace

Corpus parse_csv(std::istream& in) {
  std::vector<std::string> fields;
  std::size_t lineno = 0, start = 0;
  if (!read_csv_record(in, fields, lineno, start)) throw ParseError("empty CSV file", 0);
  if (!fields.empty() && fields[0].starts_with("\xEF\xBB\xBF")) fields[0].erase(0, 3);
  int col_id = -1, col_title = -1, col_abstract = -1, col_label = -1;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (fields[i] == "id") col_id = static_cast<int>(i);
    else if (fields[i] == "title") col_title = static_cast<int>(i);
    else if (fields[i] == "abstract") col_abstract = static_cast<int>(i);
    else if (fields[i] == "label") col_label = static_cast<int>(i);
  }
  if (col_id < 0 || col_title < 0 || col_abstract < 0) {
    throw ParseError("CSV header must contain id, title, abstract", 1);
  }
  const std::size_t width = fields.size();
  std::vector<Document> docs;
  std::vector<std::size_t> lines;
  while (read_csv_record(in, fields, lineno, start)) {
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != width) {
      throw ParseError("expected " + std::to_string(width) + " fields, got " +
                           std::to_string(fields.size()),
                       start);
    }
    Document d;
    d.id = fields[col_id];
    d.title = fields[col_title];
    d.abstract = fields[col_abstract];
    if (d.id.empty()) throw ParseError("empty id", start);
    if (col_label >= 0) {
      const std::string& l = fields[col_label];
      if (l == "1") d.label = 1;
      else if (l == "0") d.label = 0;
      else if (!l.empty()) throw ParseError("label must be 0 or 1, got \"" + l + "\"", start);
    }
    docs.push_back(std::move(d));
    lines.push_back(start);
  }
  return build(std::move(docs), lines);
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open corpus file " + path.string());
  return format == CorpusFormat::kCsv ? parse_csv(in) : parse_jsonl(in);
}

Corpus load_corpus(const std::filesystem::path& path) {
  return load_corpus(path, path.extension() == ".csv" ? CorpusFormat::kCsv : CorpusFormat::kJsonl);
}

void write_jsonl(std::ostream& out, const Corpus& corpus) {
  for (const auto& d : corpus) {
    json obj = {{"id", d.id}, {"title", d.title}, {"abstract", d.abstract}};
    if (d.label) obj["label"] = *d.label;
    out << obj.dump() << '\n';
  }
}

namespace {
std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q.push_back('"');
    q.push_back(c);
  }
  q.push_back('"');
  return q;
}
}  // namespace

void write_csv(std::ostream& out, const Corpus& corpus) {
  out << "id,title,abstract,label\n";
  for (const auto& d : corpus) {
    out << csv_quote(d.id) << ',' << csv_quote(d.title) << ',' << csv_quote(d.abstract) << ',';
    if (d.label) out << *d.label;
    out << '\n';
  }
}

void save_corpus(const std::filesystem::path& path, const Corpus& corpus, CorpusFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write corpus file " + path.string());
  if (format == CorpusFormat::kCsv) write_csv(out, corpus);
  else write_jsonl(out, corpus);
}

}  // namespace screener
