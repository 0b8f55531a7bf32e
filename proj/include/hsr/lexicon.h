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

#ifndef HSR_LEXICON_H_
#define HSR_LEXICON_H_

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace hsr {

struct ProfanityEntry {
  std::string romanized;
  std::string devanagari;  // empty when the word has no Devanagari form
  double score = 0.0;
};

// One line of a lexicon file: key<TAB>value[<TAB>score]. Lines starting
// with '#' followed by a tab or space, and blank lines, are comments.
struct LexiconLine {
  int line_number = 0;
  std::vector<std::string> fields;
};

std::vector<LexiconLine> read_lexicon_file(const std::filesystem::path& path);

// Immutable after load; share it across threads via shared_ptr<const>.
class LexiconSet {
 public:
  // Loads every lexicon file from a directory laid out like data/lexicons.
  static LexiconSet load(const std::filesystem::path& dir);

  // Directory of the bundled lexicons: $HSR_LEXICON_DIR if set, otherwise
  // the path baked in at build time.
  static std::filesystem::path default_dir();

  const std::unordered_map<std::string, std::string>& contractions() const {
    return contractions_;
  }
  const std::unordered_map<std::string, std::string>& emoticons() const {
    return emoticons_;
  }
  const std::unordered_map<std::string, std::string>& slang() const {
    return slang_;
  }
  const std::vector<ProfanityEntry>& profanity_entries() const {
    return profanity_;
  }
  // Score by either romanized or Devanagari surface.
  std::optional<double> profanity_score(const std::string& token) const;

  bool is_slur(const std::string& token) const { return slurs_.count(token); }
  const std::vector<std::string>& slurs() const { return slur_list_; }
  const std::vector<std::string>& stereotypes() const { return stereotypes_; }
  bool is_problematic_hashtag(const std::string& tag) const {
    return hashtags_.count(tag);
  }
  const std::vector<std::string>& problematic_hashtags() const {
    return hashtag_list_;
  }
  // Romanized Hindi function words, plus romanized profanity that has a
  // Devanagari form.
  bool is_codemix_word(const std::string& token) const;

  // Unigram log-probability, or nullopt for out-of-vocabulary words.
  std::optional<double> unigram_logprob(const std::string& word) const;
  bool in_unigrams(const std::string& word) const {
    return unigram_counts_.count(word);
  }
  const std::unordered_map<std::string, double>& unigram_counts() const {
    return unigram_counts_;
  }

  // Builders used by tests and the loader. Each validates its invariants.
  void add_contraction(const std::string& key, const std::string& value);
  void add_emoticon(const std::string& key, const std::string& value);
  void add_slang(const std::string& key, const std::string& value);
  void add_profanity(const ProfanityEntry& entry);
  void add_slur(const std::string& term);
  void add_stereotype(const std::string& phrase);
  void add_problematic_hashtag(const std::string& tag);
  void add_codemix_word(const std::string& word);
  void add_unigram(const std::string& word, double count);

  bool has_annotation_lists() const {
    return !slurs_.empty() && !profanity_index_.empty();
  }

 private:
  std::unordered_map<std::string, std::string> contractions_;
  std::unordered_map<std::string, std::string> emoticons_;
  std::unordered_map<std::string, std::string> slang_;
  std::vector<ProfanityEntry> profanity_;
  std::unordered_map<std::string, double> profanity_index_;
  std::unordered_set<std::string> romanized_hindi_profanity_;
  std::unordered_set<std::string> slurs_;
  std::vector<std::string> slur_list_;
  std::vector<std::string> stereotypes_;
  std::unordered_set<std::string> hashtags_;
  std::vector<std::string> hashtag_list_;
  std::unordered_set<std::string> codemix_;
  std::unordered_map<std::string, double> unigram_counts_;
  double unigram_total_ = 0.0;
};

}  // namespace hsr

#endif  // HSR_LEXICON_H_
