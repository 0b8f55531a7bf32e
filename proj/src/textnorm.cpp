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

#include "hsr/textnorm.h"

#include <algorithm>
#include <limits>
#include <optional>
#include <regex>

#include "hsr/utf8.h"

namespace hsr::textnorm {

namespace {

constexpr std::string_view kPlaceholders[kNumEntities] = {
    "<url>", "<email>", "<percent>", "<money>", "<phone>",
    "<user>", "<time>", "<date>", "<number>"};
constexpr std::string_view kMarkers[kNumMarkers] = {
    "<hashtag>", "<allcaps>", "<elongated>", "<repeated>", "<emphasis>", "<censored>"};

// Leading/trailing punctuation peeled off a whitespace token before the
// entity and marker rules look at it. '<' and '>' are never peeled so that
// placeholders stay whole.
bool leading_affix(char c) { return c == '(' || c == '[' || c == '{' || c == '"' || c == '\''; }
bool trailing_affix(char c) {
  return c == '.' || c == ',' || c == '!' || c == '?' || c == ';' || c == ':' || c == ')' ||
         c == ']' || c == '}' || c == '"' || c == '\'';
}

struct Affixed {
  std::string prefix;
  std::string core;
  std::string suffix;
};

Affixed split_affixes(std::string_view token) {
  size_t b = 0, e = token.size();
  while (b < e && leading_affix(token[b])) ++b;
  while (e > b && trailing_affix(token[e - 1])) --e;
  return {std::string(token.substr(0, b)), std::string(token.substr(b, e - b)),
          std::string(token.substr(e))};
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (p.empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out += p;
  }
  return out;
}

struct EntityRule {
  Entity entity;
  std::regex pattern;
};

// Matching order differs from the placeholder order: dates and times are
// tried before phone numbers, which would otherwise swallow them.
const std::vector<EntityRule>& entity_rules() {
  static const std::vector<EntityRule> rules = [] {
    auto icase = std::regex::ECMAScript | std::regex::icase | std::regex::optimize;
    std::vector<EntityRule> r;
    r.push_back({Entity::kUrl, std::regex(R"((https?://|www\.)[^\s]+)", icase)});
    r.push_back({Entity::kEmail,
                 std::regex(R"([a-z0-9._%+\-]+@[a-z0-9\-]+(\.[a-z0-9\-]+)*\.[a-z]{2,})", icase)});
    r.push_back({Entity::kUser, std::regex(R"(@[a-z0-9_]+)", icase)});
    r.push_back({Entity::kMoney,
                 std::regex(R"(((\$|£|€|₹)\d+([.,]\d+)*[km]?)|(\d+([.,]\d+)*(\$|£|€|₹))|((rs\.?|inr|usd)\d+([.,]\d+)*))",
                            icase)});
    r.push_back({Entity::kPercent, std::regex(R"([+\-]?\d+([.,]\d+)?%)", icase)});
    r.push_back({Entity::kTime,
                 std::regex(R"((\d{1,2}:\d{2}(:\d{2})?([ap]\.?m\.?)?)|(\d{1,2}[ap]\.?m\.?))", icase)});
    r.push_back({Entity::kDate,
                 std::regex(R"((\d{4}[\-/.]\d{1,2}[\-/.]\d{1,2})|(\d{1,2}[\-/.]\d{1,2}[\-/.]\d{2,4}))",
                            icase)});
    r.push_back({Entity::kPhone,
                 std::regex(R"(\+?\(?\d{1,4}\)?([\-.]?\d{2,5}){2,4})", icase)});
    r.push_back({Entity::kNumber, std::regex(R"([+\-]?\d+([.,]\d+)*)", icase)});
    return r;
  }();
  return rules;
}

int count_digits(std::string_view s) {
  int n = 0;
  for (char c : s) n += (c >= '0' && c <= '9');
  return n;
}

std::optional<Entity> classify_entity(const std::string& core, const NormConfig& config) {
  if (core.empty() || core.front() == '<') return std::nullopt;
  const bool has_digit = count_digits(core) > 0;
  const bool has_at = core.find('@') != std::string::npos;
  const std::string lower = ascii_lower(core);
  const bool urlish = lower.rfind("http", 0) == 0 || lower.rfind("www.", 0) == 0;
  if (!has_digit && !has_at && !urlish) return std::nullopt;
  for (const auto& rule : entity_rules()) {
    if (!config.entity_on(rule.entity)) continue;
    if (!std::regex_match(core, rule.pattern)) continue;
    if (rule.entity == Entity::kPhone) {
      // Needs either an explicit international prefix/separator or ten digits.
      const int digits = count_digits(core);
      const bool separated = core.find_first_of("+-.()") != std::string::npos;
      if (digits < 7 || (!separated && digits < 10)) continue;
    }
    return rule.entity;
  }
  return std::nullopt;
}

bool has_ascii_letter(std::string_view s) {
  for (char c : s) {
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) return true;
  }
  return false;
}

bool is_upper_word(std::string_view s) {
  int upper = 0;
  for (char c : s) {
    if (c >= 'a' && c <= 'z') return false;
    if (c >= 'A' && c <= 'Z') ++upper;
  }
  return upper >= 2;
}

// Collapses runs of three or more identical ASCII letters down to keep.
std::string collapse_runs(std::string_view s, size_t keep) {
  std::string out;
  size_t i = 0;
  while (i < s.size()) {
    size_t j = i;
    while (j < s.size() && s[j] == s[i]) ++j;
    const size_t run = j - i;
    const bool letter = has_ascii_letter(s.substr(i, 1));
    out.append(letter && run >= 3 ? keep : run, s[i]);
    i = j;
  }
  return out;
}

bool has_elongation(std::string_view s) {
  for (size_t i = 0; i + 2 < s.size(); ++i) {
    if (s[i] == s[i + 1] && s[i] == s[i + 2] && has_ascii_letter(s.substr(i, 1))) return true;
  }
  return false;
}

struct Annotated {
  std::string word;
  std::vector<std::string> markers;
};

Annotated annotate_token(const std::string& token, const LexiconSet& lexicon,
                         const NormConfig& config) {
  if (is_placeholder(token) || is_marker(token) || token.front() == '#' ||
      lexicon.emoticons().count(token)) {
    return {token, {}};
  }
  Affixed a = split_affixes(token);
  std::vector<std::string> markers;
  std::string core = a.core;

  if (core.find('*') != std::string::npos && has_ascii_letter(core)) {
    const bool emphasis = core.size() >= 3 && core.front() == '*' && core.back() == '*' &&
                          core.find('*', 1) == core.size() - 1;
    if (emphasis) {
      if (config.marker_on(Marker::kEmphasis)) {
        core = core.substr(1, core.size() - 2);
        markers.emplace_back(marker(Marker::kEmphasis));
      }
    } else if (config.marker_on(Marker::kCensored)) {
      return {a.prefix + std::string(marker(Marker::kCensored)) + a.suffix, {}};
    }
  }

  if (config.marker_on(Marker::kAllcaps) && is_upper_word(core)) {
    markers.insert(markers.begin(), std::string(marker(Marker::kAllcaps)));
  }
  if (config.lowercase) {
    core = ascii_lower(core);
    a.prefix = ascii_lower(a.prefix);
    a.suffix = ascii_lower(a.suffix);
  }
  if (config.marker_on(Marker::kElongated) && has_elongation(core)) {
    std::string single = collapse_runs(core, 1);
    core = lexicon.in_unigrams(ascii_lower(single)) ? single : collapse_runs(core, 2);
    markers.emplace_back(marker(Marker::kElongated));
  }
  return {a.prefix + core + a.suffix, std::move(markers)};
}

void append_tokens(std::vector<Token>& out, const std::vector<Token>& more) {
  out.insert(out.end(), more.begin(), more.end());
}

void append_words(std::vector<Token>& out, std::string_view text, TokenKind kind) {
  for (auto& w : utf8::split_whitespace(text)) {
    TokenKind k = is_placeholder(w) ? TokenKind::kPlaceholder
                  : is_marker(w)    ? TokenKind::kAnnotation
                                    : kind;
    out.push_back({std::move(w), k});
  }
}

}  // namespace

std::string_view placeholder(Entity e) { return kPlaceholders[static_cast<int>(e)]; }
std::string_view marker(Marker m) { return kMarkers[static_cast<int>(m)]; }

bool is_placeholder(std::string_view surface) {
  for (auto p : kPlaceholders) {
    if (p == surface) return true;
  }
  return false;
}

bool is_marker(std::string_view surface) {
  for (auto m : kMarkers) {
    if (m == surface) return true;
  }
  return false;
}

std::string normalize_entities(std::string_view text, const NormConfig& config) {
  std::vector<std::string> out;
  for (auto& token : utf8::split_whitespace(text)) {
    Affixed a = split_affixes(token);
    if (auto e = classify_entity(a.core, config)) {
      out.push_back(a.prefix + std::string(placeholder(*e)) + a.suffix);
    } else {
      out.push_back(std::move(token));
    }
  }
  return join(out);
}

std::string annotate_markers(std::string_view text, const LexiconSet& lexicon,
                             const NormConfig& config) {
  std::vector<Annotated> items;
  for (const auto& token : utf8::split_whitespace(text)) {
    items.push_back(annotate_token(token, lexicon, config));
  }
  std::vector<std::string> out;
  size_t i = 0;
  while (i < items.size()) {
    size_t j = i + 1;
    if (config.marker_on(Marker::kRepeated)) {
      while (j < items.size() && items[j].word == items[i].word) ++j;
    }
    out.push_back(items[i].word);
    for (auto& m : items[i].markers) out.push_back(m);
    if (j - i >= 2) out.emplace_back(marker(Marker::kRepeated));
    i = j;
  }
  return join(out);
}

std::string expand_contractions(std::string_view text, const LexiconSet& lexicon) {
  std::vector<std::string> out;
  for (auto& token : utf8::split_whitespace(text)) {
    std::string t = token;
    // Typographic apostrophe (U+2019) counts as an ASCII one.
    for (size_t p; (p = t.find("\xE2\x80\x99")) != std::string::npos;) t.replace(p, 3, "'");
    size_t b = 0, e = t.size();
    while (b < e && (t[b] == '(' || t[b] == '"' || t[b] == '[')) ++b;
    while (e > b && trailing_affix(t[e - 1]) && t[e - 1] != '\'') --e;
    std::string core = ascii_lower(t.substr(b, e - b));
    auto it = lexicon.contractions().find(core);
    if (it != lexicon.contractions().end()) {
      out.push_back(t.substr(0, b) + it->second + t.substr(e));
    } else {
      out.push_back(std::move(token));
    }
  }
  return join(out);
}

std::string expand_emoticons(std::string_view text, const LexiconSet& lexicon,
                             const NormConfig& config) {
  std::vector<std::string> out;
  for (auto& token : utf8::split_whitespace(text)) {
    if (config.emoticons) {
      auto it = lexicon.emoticons().find(token);
      if (it != lexicon.emoticons().end()) {
        out.push_back(it->second);
        continue;
      }
    }
    if (config.slang && !is_placeholder(token) && !is_marker(token)) {
      Affixed a = split_affixes(token);
      auto it = lexicon.slang().find(ascii_lower(a.core));
      if (!a.core.empty() && it != lexicon.slang().end()) {
        out.push_back(a.prefix + it->second + a.suffix);
        continue;
      }
    }
    out.push_back(std::move(token));
  }
  return join(out);
}

double unknown_word_logprob(size_t length) { return -(3.0 + 2.0 * static_cast<double>(length)); }

double segmentation_score(const std::vector<std::string>& words, const LexiconSet& lexicon) {
  double score = 0.0;
  for (const auto& w : words) {
    auto lp = lexicon.unigram_logprob(w);
    score += lp ? *lp : unknown_word_logprob(utf8::length(w));
  }
  return score;
}

namespace {

std::vector<std::string> segment_piece(const std::string& body, const LexiconSet& lexicon) {
  const auto cps = utf8::decode_all(body);
  const size_t n = cps.size();
  if (n == 0) return {};
  std::vector<double> best(n + 1, -std::numeric_limits<double>::infinity());
  std::vector<size_t> back(n + 1, 0);
  best[0] = 0.0;
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 0; j < i; ++j) {
      std::string word = utf8::encode(std::vector<char32_t>(cps.begin() + j, cps.begin() + i));
      auto lp = lexicon.unigram_logprob(word);
      double s = best[j] + (lp ? *lp : unknown_word_logprob(i - j));
      if (s > best[i]) {
        best[i] = s;
        back[i] = j;
      }
    }
  }
  std::vector<std::string> words;
  for (size_t i = n; i > 0; i = back[i]) {
    words.push_back(utf8::encode(std::vector<char32_t>(cps.begin() + back[i], cps.begin() + i)));
  }
  std::reverse(words.begin(), words.end());
  // The unsplit body is one of the DP candidates; keep it unless a split is
  // strictly better.
  if (words.size() > 1 && !(best[n] > segmentation_score({body}, lexicon))) return {body};
  return words;
}

}  // namespace

std::vector<std::string> segment_hashtag(std::string_view tag, const LexiconSet& lexicon) {
  if (tag.empty() || tag.front() != '#') {
    fail(ErrorCode::kInvalidArgument, "hashtag must start with '#': " + std::string(tag));
  }
  std::string body = ascii_lower(tag.substr(1));
  std::vector<std::string> words;
  size_t start = 0;
  while (start <= body.size()) {
    size_t us = body.find('_', start);
    if (us == std::string::npos) us = body.size();
    for (auto& w : segment_piece(body.substr(start, us - start), lexicon)) {
      words.push_back(std::move(w));
    }
    start = us + 1;
  }
  return words;
}

std::vector<Token> tokenize(std::string_view text, Language language) {
  std::vector<Token> out;
  const bool latin = language != Language::kHi;
  for (const auto& chunk : utf8::split_whitespace(text)) {
    const auto cps = utf8::decode_all(chunk);
    std::string word;
    auto flush = [&] {
      if (!word.empty()) out.push_back({std::move(word), TokenKind::kWord});
      word.clear();
    };
    size_t i = 0;
    while (i < cps.size()) {
      const char32_t cp = cps[i];
      if (cp == '<') {
        size_t close = i + 1;
        while (close < cps.size() && close - i <= 12 && cps[close] != '>') ++close;
        if (close < cps.size() && cps[close] == '>') {
          std::string cand = utf8::encode(std::vector<char32_t>(cps.begin() + i, cps.begin() + close + 1));
          if (is_placeholder(cand) || is_marker(cand)) {
            flush();
            out.push_back({cand, is_placeholder(cand) ? TokenKind::kPlaceholder : TokenKind::kAnnotation});
            i = close + 1;
            continue;
          }
        }
      }
      if (utf8::is_punct(cp)) {
        // Apostrophes inside Latin words stay attached ("o'clock").
        if (latin && cp == '\'' && !word.empty() && i + 1 < cps.size() &&
            utf8::is_letter(cps[i + 1])) {
          utf8::append(word, cp);
          ++i;
          continue;
        }
        flush();
        std::string punct;
        size_t j = i;
        while (j < cps.size() && cps[j] == cp) utf8::append(punct, cps[j++]);
        out.push_back({std::move(punct), TokenKind::kWord});
        i = j;
        continue;
      }
      utf8::append(word, cp);
      ++i;
    }
    flush();
  }
  return out;
}

std::vector<Token> pipeline(std::string_view text, Language language, const LexiconSet& lexicon,
                            const NormConfig& config) {
  std::string t = normalize_entities(text, config);
  t = annotate_markers(t, lexicon, config);
  if (config.contractions && language != Language::kHi) t = expand_contractions(t, lexicon);

  std::vector<Token> out;
  for (const auto& chunk : utf8::split_whitespace(t)) {
    if (out.size() >= config.token_cap) break;
    if (config.emoticons) {
      auto it = lexicon.emoticons().find(chunk);
      if (it != lexicon.emoticons().end()) {
        append_words(out, it->second, TokenKind::kEmoticonExpansion);
        continue;
      }
    }
    if (is_placeholder(chunk) || is_marker(chunk)) {
      append_tokens(out, tokenize(chunk, language));
      continue;
    }
    Affixed a = split_affixes(chunk);
    if (config.slang) {
      auto it = lexicon.slang().find(ascii_lower(a.core));
      if (!a.core.empty() && it != lexicon.slang().end()) {
        append_tokens(out, tokenize(a.prefix, language));
        append_words(out, it->second, TokenKind::kEmoticonExpansion);
        append_tokens(out, tokenize(a.suffix, language));
        continue;
      }
    }
    if (config.segment_hashtags && a.prefix.empty() && a.core.size() > 1 && a.core[0] == '#' &&
        a.core.find('#', 1) == std::string::npos) {
      auto words = segment_hashtag(a.core, lexicon);
      if (!words.empty()) {
        for (auto& w : words) out.push_back({std::move(w), TokenKind::kHashtagSegment});
        if (config.marker_on(Marker::kHashtag)) {
          out.push_back({std::string(marker(Marker::kHashtag)), TokenKind::kAnnotation});
        }
        append_tokens(out, tokenize(a.suffix, language));
        continue;
      }
    }
    append_tokens(out, tokenize(chunk, language));
  }
  if (out.size() > config.token_cap) out.resize(config.token_cap);
  return out;
}

std::vector<std::string> surfaces(const std::vector<Token>& tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.surface);
  return out;
}

}  // namespace hsr::textnorm
