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

#include "hsr/lexicon.h"

#include <cmath>
#include <cstdlib>
#include <fstream>

#include "hsr/common.h"

#ifndef HSR_DEFAULT_LEXICON_DIR
#define HSR_DEFAULT_LEXICON_DIR "data/lexicons"
#endif

namespace hsr {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return out;
}

template <typename Map>
void insert_unique(Map& map, const std::string& key, const std::string& value,
                   const char* what) {
  if (key.empty()) fail(ErrorCode::kInvalidArgument, std::string(what) + ": empty key");
  auto [it, inserted] = map.emplace(key, value);
  if (!inserted && it->second != value) {
    fail(ErrorCode::kInvalidArgument,
         std::string(what) + ": conflicting entries for '" + key + "'");
  }
}

std::string where(const std::filesystem::path& p, int line) {
  return p.string() + ":" + std::to_string(line);
}

}  // namespace

std::vector<LexiconLine> read_lexicon_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open lexicon " + path.string());
  std::vector<LexiconLine> lines;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.size() >= 2 && line[0] == '#' && (line[1] == ' ' || line[1] == '\t')) {
      continue;
    }
    lines.push_back({n, split_tabs(line)});
  }
  return lines;
}

LexiconSet LexiconSet::load(const std::filesystem::path& dir) {
  LexiconSet lex;
  auto need = [&](const char* name, size_t min_fields) {
    auto path = dir / name;
    auto lines = read_lexicon_file(path);
    for (const auto& l : lines) {
      if (l.fields.size() < min_fields) {
        fail(ErrorCode::kParse, where(path, l.line_number) + ": expected " +
                                    std::to_string(min_fields) + " fields");
      }
    }
    return std::make_pair(path, lines);
  };

  for (auto& [name, adder] :
       std::vector<std::pair<const char*, void (LexiconSet::*)(const std::string&,
                                                               const std::string&)>>{
           {"contractions.tsv", &LexiconSet::add_contraction},
           {"emoticons.tsv", &LexiconSet::add_emoticon},
           {"slang.tsv", &LexiconSet::add_slang}}) {
    auto [path, lines] = need(name, 2);
    for (const auto& l : lines) (lex.*adder)(l.fields[0], l.fields[1]);
  }

  {
    auto [path, lines] = need("profanity.tsv", 3);
    for (const auto& l : lines) {
      ProfanityEntry e;
      e.romanized = ascii_lower(l.fields[0]);
      e.devanagari = l.fields[1] == "-" ? "" : l.fields[1];
      try {
        e.score = parse_double(l.fields[2]);
      } catch (const Error& err) {
        fail(ErrorCode::kParse, where(path, l.line_number) + ": " + err.what());
      }
      lex.add_profanity(e);
    }
  }
  {
    auto [path, lines] = need("slurs.tsv", 1);
    for (const auto& l : lines) lex.add_slur(l.fields[0]);
  }
  {
    auto [path, lines] = need("stereotypes.tsv", 1);
    for (const auto& l : lines) lex.add_stereotype(l.fields[0]);
  }
  {
    auto [path, lines] = need("hashtags.tsv", 1);
    for (const auto& l : lines) lex.add_problematic_hashtag(l.fields[0]);
  }
  {
    auto [path, lines] = need("codemix.tsv", 1);
    for (const auto& l : lines) lex.add_codemix_word(l.fields[0]);
  }
  {
    auto [path, lines] = need("unigrams.tsv", 2);
    for (const auto& l : lines) {
      double count = 0;
      try {
        count = parse_double(l.fields[1]);
      } catch (const Error& err) {
        fail(ErrorCode::kParse, where(path, l.line_number) + ": " + err.what());
      }
      lex.add_unigram(l.fields[0], count);
    }
  }
  return lex;
}

std::filesystem::path LexiconSet::default_dir() {
  if (const char* env = std::getenv("HSR_LEXICON_DIR"); env && *env) {
    return env;
  }
  return HSR_DEFAULT_LEXICON_DIR;
}

std::optional<double> LexiconSet::profanity_score(const std::string& token) const {
  auto it = profanity_index_.find(token);
  if (it == profanity_index_.end()) return std::nullopt;
  return it->second;
}

bool LexiconSet::is_codemix_word(const std::string& token) const {
  return codemix_.count(token) || romanized_hindi_profanity_.count(token);
}

std::optional<double> LexiconSet::unigram_logprob(const std::string& word) const {
  auto it = unigram_counts_.find(word);
  if (it == unigram_counts_.end()) return std::nullopt;
  return std::log(it->second / unigram_total_);
}

void LexiconSet::add_contraction(const std::string& key, const std::string& value) {
  insert_unique(contractions_, ascii_lower(key), value, "contraction");
}

void LexiconSet::add_emoticon(const std::string& key, const std::string& value) {
  insert_unique(emoticons_, key, value, "emoticon");
}

void LexiconSet::add_slang(const std::string& key, const std::string& value) {
  insert_unique(slang_, ascii_lower(key), value, "slang");
}

void LexiconSet::add_profanity(const ProfanityEntry& entry) {
  if (!(entry.score >= 0.0) || !std::isfinite(entry.score)) {
    fail(ErrorCode::kInvalidArgument,
         "profanity score must be >= 0 for '" + entry.romanized + "'");
  }
  auto add = [&](const std::string& key) {
    if (key.empty()) return;
    auto [it, inserted] = profanity_index_.emplace(key, entry.score);
    if (!inserted && it->second != entry.score) {
      fail(ErrorCode::kInvalidArgument, "profanity: conflicting scores for '" + key + "'");
    }
  };
  add(entry.romanized);
  add(entry.devanagari);
  if (!entry.devanagari.empty()) romanized_hindi_profanity_.insert(entry.romanized);
  profanity_.push_back(entry);
}

void LexiconSet::add_slur(const std::string& term) {
  std::string t = ascii_lower(term);
  if (slurs_.insert(t).second) slur_list_.push_back(t);
}

void LexiconSet::add_stereotype(const std::string& phrase) {
  stereotypes_.push_back(ascii_lower(phrase));
}

void LexiconSet::add_problematic_hashtag(const std::string& tag) {
  std::string t = ascii_lower(tag);
  if (t.empty() || t[0] != '#') t = "#" + t;
  if (hashtags_.insert(t).second) hashtag_list_.push_back(t);
}

void LexiconSet::add_codemix_word(const std::string& word) {
  codemix_.insert(ascii_lower(word));
}

void LexiconSet::add_unigram(const std::string& word, double count) {
  if (!(count > 0.0) || !std::isfinite(count)) {
    fail(ErrorCode::kInvalidArgument, "unigram count must be > 0 for '" + word + "'");
  }
  auto [it, inserted] = unigram_counts_.emplace(ascii_lower(word), count);
  if (!inserted) {
    if (it->second != count) {
      fail(ErrorCode::kInvalidArgument, "unigram: conflicting counts for '" + word + "'");
    }
    return;
  }
  unigram_total_ += count;
}

}  // namespace hsr
