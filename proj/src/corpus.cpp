// Copyright 2026 The hsr Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hsr/corpus.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "hsr/utf8.h"

namespace hsr::corpus {

namespace {

constexpr std::string_view kHeader = "id\ttext\tlabel\tlanguage\tsource_id";

struct Row {
  int line = 0;
  std::vector<std::string> fields;
};

// Delimited reader. CSV fields may be double-quoted (with "" escapes and
// embedded newlines); TSV fields are taken verbatim.
class RowReader {
 public:
  RowReader(std::istream& in, char delim, bool quoting, std::string name)
      : in_(in), delim_(delim), quoting_(quoting), name_(std::move(name)) {}

  bool next(Row& row) {
    std::string line;
    if (!std::getline(in_, line)) return false;
    ++line_no_;
    row.line = line_no_;
    row.fields.clear();
    strip_cr(line);
    if (!quoting_) {
      size_t start = 0;
      while (true) {
        size_t p = line.find(delim_, start);
        row.fields.push_back(line.substr(start, p - start));
        if (p == std::string::npos) break;
        start = p + 1;
      }
      return true;
    }
    std::string field;
    bool in_quotes = false;
    bool was_quoted = false;
    size_t i = 0;
    while (true) {
      if (i >= line.size()) {
        if (!in_quotes) break;
        std::string more;
        if (!std::getline(in_, more)) {
          fail(ErrorCode::kParse, name_ + ":" + std::to_string(row.line) +
                                      ": malformed row: unterminated quoted field");
        }
        ++line_no_;
        strip_cr(more);
        field.push_back('\n');
        line = std::move(more);
        i = 0;
        continue;
      }
      char c = line[i];
      if (in_quotes) {
        if (c == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            field.push_back('"');
            ++i;
          } else {
            in_quotes = false;
          }
        } else {
          field.push_back(c);
        }
      } else if (c == '"' && field.empty() && !was_quoted) {
        in_quotes = true;
        was_quoted = true;
      } else if (c == delim_) {
        row.fields.push_back(std::move(field));
        field.clear();
        was_quoted = false;
      } else {
        field.push_back(c);
      }
      ++i;
    }
    row.fields.push_back(std::move(field));
    return true;
  }

 private:
  static void strip_cr(std::string& s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
  }

  std::istream& in_;
  char delim_;
  bool quoting_;
  std::string name_;
  int line_no_ = 0;
};

std::string at(const std::string& name, int line) { return name + ":" + std::to_string(line); }

}  // namespace

std::vector<UnifiedRecord> ingest_source(const SourceDescriptor& source) {
  std::ifstream in(source.path, std::ios::binary);
  if (!in) fail(ErrorCode::kNotFound, "source file not found: " + source.path.string());
  const std::string name = source.path.string();
  const bool csv = source.format == SourceFormat::kCsv;
  RowReader reader(in, csv ? ',' : '\t', csv, name);

  Row header;
  if (!reader.next(header)) fail(ErrorCode::kParse, name + ": empty source file");
  if (!header.fields.empty() && header.fields[0].rfind("\xEF\xBB\xBF", 0) == 0) {
    header.fields[0].erase(0, 3);
  }
  auto column = [&](const std::string& col) -> size_t {
    for (size_t i = 0; i < header.fields.size(); ++i) {
      if (trim(header.fields[i]) == col) return i;
    }
    fail(ErrorCode::kParse, name + ": declared column '" + col + "' not in header");
  };
  const size_t text_col = column(source.text_column);
  const size_t label_col = column(source.label_column);
  const size_t needed = std::max(text_col, label_col) + 1;

  std::vector<UnifiedRecord> records;
  Row row;
  while (reader.next(row)) {
    if (row.fields.size() == 1 && trim(row.fields[0]).empty()) continue;
    if (row.fields.size() < needed) {
      fail(ErrorCode::kParse, at(name, row.line) + ": malformed row: expected at least " +
                                  std::to_string(needed) + " fields, got " +
                                  std::to_string(row.fields.size()));
    }
    std::string label_str = trim(row.fields[label_col]);
    auto it = source.label_map.find(label_str);
    if (it == source.label_map.end()) {
      fail(ErrorCode::kInvalidArgument,
           at(name, row.line) + ": unmapped label '" + label_str + "' in source '" +
               source.source_id + "'");
    }
    std::string text = row.fields[text_col];
    if (trim(text).empty()) {
      fail(ErrorCode::kParse, at(name, row.line) + ": malformed row: empty text");
    }
    records.push_back({0, std::move(text), it->second, source.language, source.source_id});
  }
  return records;
}

Corpus collate(const std::vector<SourceDescriptor>& sources, bool dedup) {
  std::unordered_set<std::string> ids;
  for (const auto& s : sources) {
    if (!ids.insert(s.source_id).second) {
      fail(ErrorCode::kAlreadyExists, "duplicate source_id '" + s.source_id + "'");
    }
  }
  Corpus corpus;
  std::unordered_set<std::string> seen;
  for (const auto& s : sources) {
    for (auto& r : ingest_source(s)) {
      if (dedup && !seen.insert(r.text).second) continue;
      r.id = static_cast<int64_t>(corpus.size());
      corpus.push_back(std::move(r));
    }
  }
  return corpus;
}

std::vector<SourceDescriptor> load_source_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kNotFound, "source config not found: " + path.string());
  const auto base = path.parent_path();
  std::vector<SourceDescriptor> sources;
  std::vector<bool> has_path;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    std::string t = trim(line);
    if (t.empty() || t[0] == ';' || (t[0] == '#' && (t.size() == 1 || t[1] == ' '))) continue;
    if (t.front() == '[') {
      if (t.back() != ']' || t.rfind("[source ", 0) != 0) {
        fail(ErrorCode::kParse, at(path.string(), n) + ": expected [source <id>]");
      }
      SourceDescriptor d;
      d.source_id = trim(t.substr(8, t.size() - 9));
      if (d.source_id.empty()) fail(ErrorCode::kParse, at(path.string(), n) + ": empty source id");
      sources.push_back(std::move(d));
      has_path.push_back(false);
      continue;
    }
    if (sources.empty()) {
      fail(ErrorCode::kParse, at(path.string(), n) + ": key outside a [source] section");
    }
    size_t eq = t.find('=');
    if (eq == std::string::npos) fail(ErrorCode::kParse, at(path.string(), n) + ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    auto& d = sources.back();
    if (key == "path") {
      std::filesystem::path p(value);
      d.path = p.is_absolute() ? p : base / p;
      has_path.back() = true;
    } else if (key == "format") {
      if (value == "tsv") {
        d.format = SourceFormat::kTsv;
      } else if (value == "csv") {
        d.format = SourceFormat::kCsv;
      } else {
        fail(ErrorCode::kParse, at(path.string(), n) + ": format must be tsv or csv");
      }
    } else if (key == "text_column") {
      d.text_column = value;
    } else if (key == "label_column") {
      d.label_column = value;
    } else if (key == "language") {
      auto l = parse_language(value);
      if (!l) fail(ErrorCode::kParse, at(path.string(), n) + ": unknown language '" + value + "'");
      d.language = *l;
    } else if (key.rfind("label.", 0) == 0) {
      auto l = parse_label(value);
      if (!l) fail(ErrorCode::kParse, at(path.string(), n) + ": unknown unified label '" + value + "'");
      d.label_map[key.substr(6)] = *l;
    } else {
      fail(ErrorCode::kParse, at(path.string(), n) + ": unknown key '" + key + "'");
    }
  }
  for (size_t i = 0; i < sources.size(); ++i) {
    const auto& d = sources[i];
    if (!has_path[i] || d.text_column.empty() || d.label_column.empty() || d.label_map.empty()) {
      fail(ErrorCode::kParse, "source '" + d.source_id +
                                  "' needs path, text_column, label_column and label.* entries");
    }
  }
  return sources;
}

std::string escape_field(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '\\':
        out += "\\\\";
        break;
      case '\t':
        out += "\\t";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\r':
        out += "\\r";
        break;
      default:
        out.push_back(c);
    }
  }
  return out;
}

std::string unescape_field(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '\\' || i + 1 == text.size()) {
      out.push_back(text[i]);
      continue;
    }
    switch (text[++i]) {
      case 't':
        out.push_back('\t');
        break;
      case 'n':
        out.push_back('\n');
        break;
      case 'r':
        out.push_back('\r');
        break;
      case '\\':
        out.push_back('\\');
        break;
      default:
        out.push_back('\\');
        out.push_back(text[i]);
    }
  }
  return out;
}

void write_tsv(const Corpus& corpus, std::ostream& out) {
  out << kHeader << '\n';
  for (const auto& r : corpus) {
    out << r.id << '\t' << escape_field(r.text) << '\t' << label_name(r.label) << '\t'
        << language_name(r.language) << '\t' << escape_field(r.source_id) << '\n';
  }
}

void write_tsv(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  write_tsv(corpus, out);
  out.flush();
  if (!out) fail(ErrorCode::kIo, "write failed: " + path.string());
}

Corpus read_tsv(std::istream& in, const std::string& name) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::kParse, name + ": missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) fail(ErrorCode::kParse, name + ": unexpected header '" + line + "'");
  Corpus corpus;
  int n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    std::vector<std::string> f;
    size_t start = 0;
    while (true) {
      size_t p = line.find('\t', start);
      f.push_back(line.substr(start, p - start));
      if (p == std::string::npos) break;
      start = p + 1;
    }
    if (f.size() != 5) fail(ErrorCode::kParse, at(name, n) + ": expected 5 fields");
    UnifiedRecord r;
    try {
      r.id = parse_int(f[0]);
    } catch (const Error& e) {
      fail(ErrorCode::kParse, at(name, n) + ": " + e.what());
    }
    r.text = unescape_field(f[1]);
    auto label = parse_label(f[2]);
    auto lang = parse_language(f[3]);
    if (!label) fail(ErrorCode::kParse, at(name, n) + ": unknown label '" + f[2] + "'");
    if (!lang) fail(ErrorCode::kParse, at(name, n) + ": unknown language '" + f[3] + "'");
    r.label = *label;
    r.language = *lang;
    r.source_id = unescape_field(f[4]);
    corpus.push_back(std::move(r));
  }
  return corpus;
}

Corpus read_tsv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kNotFound, "corpus file not found: " + path.string());
  return read_tsv(in, path.string());
}

void validate(const Corpus& corpus) {
  for (size_t i = 0; i < corpus.size(); ++i) {
    const auto& r = corpus[i];
    if (r.id != static_cast<int64_t>(i)) {
      fail(ErrorCode::kFailedPrecondition, "record " + std::to_string(i) + " has id " +
                                               std::to_string(r.id) + "; ids must be dense");
    }
    if (trim(r.text).empty()) {
      fail(ErrorCode::kFailedPrecondition, "record " + std::to_string(r.id) + " has empty text");
    }
    if (index_of(r.label) < 0 || index_of(r.label) >= kNumClasses) {
      fail(ErrorCode::kFailedPrecondition, "record " + std::to_string(r.id) + " has invalid label");
    }
  }
}

CorpusStats compute_stats(const Corpus& corpus, const TokenizerFn& tokenizer) {
  CorpusStats stats;
  std::array<std::unordered_set<std::string>, kNumLanguages> vocab;
  for (const auto& r : corpus) {
    auto& ls = stats.languages[index_of(r.language)];
    ++ls.records;
    ++ls.label_counts[index_of(r.label)];
    ++stats.per_source[r.source_id];
    ++stats.total;
    auto tokens = tokenizer(r.text, r.language);
    ls.token_occurrences += tokens.size();
    ls.max_seq_len = std::max(ls.max_seq_len, tokens.size());
    for (auto& t : tokens) vocab[index_of(r.language)].insert(std::move(t));
  }
  for (int i = 0; i < kNumLanguages; ++i) {
    auto& ls = stats.languages[i];
    ls.vocab_size = vocab[i].size();
    if (ls.records > 0) {
      ls.hate_fraction = static_cast<double>(ls.label_counts[index_of(Label::kHate)]) / ls.records;
      ls.abuse_fraction =
          static_cast<double>(ls.label_counts[index_of(Label::kAbusive)]) / ls.records;
    }
  }
  return stats;
}

std::pair<Corpus, Corpus> split(const Corpus& corpus, const SplitSpec& spec) {
  if (!(spec.train_fraction >= 0.0 && spec.train_fraction <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "train fraction must be in [0, 1]");
  }
  std::map<std::pair<int, int>, std::vector<size_t>> strata;
  for (size_t i = 0; i < corpus.size(); ++i) {
    const auto& r = corpus[i];
    strata[{spec.stratify_label ? index_of(r.label) : 0,
            spec.stratify_language ? index_of(r.language) : 0}]
        .push_back(i);
  }
  Rng rng(spec.seed);
  std::vector<size_t> train_idx, test_idx;
  for (auto& [key, members] : strata) {
    rng.shuffle(members);
    size_t n_train = members.size() == 1
                         ? 1
                         : static_cast<size_t>(std::floor(spec.train_fraction * members.size() + 0.5));
    for (size_t k = 0; k < members.size(); ++k) {
      (k < n_train ? train_idx : test_idx).push_back(members[k]);
    }
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  std::pair<Corpus, Corpus> out;
  for (size_t i : train_idx) out.first.push_back(corpus[i]);
  for (size_t i : test_idx) out.second.push_back(corpus[i]);
  return out;
}

std::vector<std::string> label_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& raw : utf8::split_whitespace(text)) {
    auto cps = utf8::decode_all(raw);
    size_t b = 0, e = cps.size();
    while (b < e && utf8::is_punct(cps[b]) && cps[b] != '#' && cps[b] != '*') ++b;
    while (e > b && utf8::is_punct(cps[e - 1]) && cps[e - 1] != '*') --e;
    if (b == e) continue;
    out.push_back(ascii_lower(utf8::encode(std::vector<char32_t>(cps.begin() + b, cps.begin() + e))));
  }
  return out;
}

Label weak_label(std::string_view text, const LexiconSet& lexicon) {
  if (!lexicon.has_annotation_lists()) {
    fail(ErrorCode::kFailedPrecondition, "weak_label needs slur and abusive-word lexicons loaded");
  }
  const auto tokens = label_tokens(text);
  // 3(a): slur aimed at a group.
  for (const auto& t : tokens) {
    if (lexicon.is_slur(t)) return Label::kHate;
  }
  // 3(b): stereotype phrases, matched on token boundaries.
  std::string joined = " ";
  for (const auto& t : tokens) joined += t + " ";
  for (const auto& phrase : lexicon.stereotypes()) {
    std::string p = " ";
    for (const auto& t : label_tokens(phrase)) p += t + " ";
    if (p.size() > 1 && joined.find(p) != std::string::npos) return Label::kHate;
  }
  // 3(c): problematic hashtags.
  for (const auto& t : tokens) {
    if (t.size() > 1 && t[0] == '#' && lexicon.is_problematic_hashtag(t)) return Label::kHate;
  }
  // 3(d): only abusive words (including masked ones like "f**k").
  for (const auto& t : tokens) {
    if (lexicon.profanity_score(t)) return Label::kAbusive;
    if (t.find('*') != std::string::npos) {
      for (char c : t) {
        if ((c >= 'a' && c <= 'z')) return Label::kAbusive;
      }
    }
  }
  // 3(e).
  return Label::kNeither;
}

}  // namespace hsr::corpus
