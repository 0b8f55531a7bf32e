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

#ifndef HSR_CORPUS_H_
#define HSR_CORPUS_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hsr/common.h"
#include "hsr/lexicon.h"

namespace hsr::corpus {

enum class SourceFormat { kTsv, kCsv };

// Describes one source dataset and how its labels fold into the unified
// three-class scheme.
struct SourceDescriptor {
  std::string source_id;
  std::filesystem::path path;
  SourceFormat format = SourceFormat::kTsv;
  std::string text_column;
  std::string label_column;
  std::map<std::string, Label> label_map;
  Language language = Language::kEn;
};

struct UnifiedRecord {
  int64_t id = 0;
  std::string text;
  Label label = Label::kNeither;
  Language language = Language::kEn;
  std::string source_id;

  bool operator==(const UnifiedRecord&) const = default;
};

using Corpus = std::vector<UnifiedRecord>;

std::vector<UnifiedRecord> ingest_source(const SourceDescriptor& source);

// Concatenates sources in order and assigns dense ids 0..N-1. With dedup,
// later exact duplicates of a text are dropped before ids are assigned.
Corpus collate(const std::vector<SourceDescriptor>& sources, bool dedup = false);

// Reads the declarative source list:
//
//   [source hasoc2019-en]
//   path = hasoc_en.tsv
//   format = tsv
//   text_column = text
//   label_column = task_1
//   language = en
//   label.HOF = hate
//   label.NOT = neither
//
// Relative paths resolve against the config file's directory.
std::vector<SourceDescriptor> load_source_config(const std::filesystem::path& path);

// Unified on-disk format: UTF-8 TSV with header id, text, label, language,
// source_id. Backslash, tab, newline and carriage return in text are escaped.
std::string escape_field(std::string_view text);
std::string unescape_field(std::string_view text);
void write_tsv(const Corpus& corpus, std::ostream& out);
void write_tsv(const Corpus& corpus, const std::filesystem::path& path);
Corpus read_tsv(std::istream& in, const std::string& name = "<stream>");
Corpus read_tsv(const std::filesystem::path& path);

// Checks the record invariants (non-empty trimmed text, dense ids).
void validate(const Corpus& corpus);

struct LanguageStats {
  size_t records = 0;
  std::array<size_t, kNumClasses> label_counts{};
  double hate_fraction = 0.0;
  double abuse_fraction = 0.0;
  size_t vocab_size = 0;
  size_t token_occurrences = 0;
  size_t max_seq_len = 0;
};

struct CorpusStats {
  std::array<LanguageStats, kNumLanguages> languages{};
  std::map<std::string, size_t> per_source;
  size_t total = 0;

  const LanguageStats& of(Language l) const { return languages[index_of(l)]; }
};

using TokenizerFn = std::function<std::vector<std::string>(std::string_view, Language)>;

CorpusStats compute_stats(const Corpus& corpus, const TokenizerFn& tokenizer);

struct SplitSpec {
  double train_fraction = 0.8;
  uint64_t seed = 0;
  bool stratify_label = true;
  bool stratify_language = true;
};

// Stratified split. Each stratum contributes round(fraction * size) records
// to train; a single-record stratum goes wholly to train. Both halves are
// returned in id order.
std::pair<Corpus, Corpus> split(const Corpus& corpus, const SplitSpec& spec);

// Annotation guideline as ordered rules: slur, stereotype or problematic
// hashtag -> hate; otherwise any abusive/profane word -> abusive; else
// neither.
Label weak_label(std::string_view text, const LexiconSet& lexicon);

// Lowercased word tokens with surrounding punctuation stripped; hashtags
// keep their '#'. Shared by the weak labeler and its scanners.
std::vector<std::string> label_tokens(std::string_view text);

}  // namespace hsr::corpus

#endif  // HSR_CORPUS_H_
