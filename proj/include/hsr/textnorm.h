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

#ifndef HSR_TEXTNORM_H_
#define HSR_TEXTNORM_H_

#include <string>
#include <string_view>
#include <vector>

#include "hsr/common.h"
#include "hsr/lexicon.h"

namespace hsr::textnorm {

enum class TokenKind { kWord, kPlaceholder, kAnnotation, kHashtagSegment, kEmoticonExpansion };

struct Token {
  std::string surface;
  TokenKind kind = TokenKind::kWord;

  bool operator==(const Token&) const = default;
};

// Entity placeholders, in matching priority order.
enum class Entity { kUrl, kEmail, kPercent, kMoney, kPhone, kUser, kTime, kDate, kNumber };
inline constexpr int kNumEntities = 9;

enum class Marker { kHashtag, kAllcaps, kElongated, kRepeated, kEmphasis, kCensored };
inline constexpr int kNumMarkers = 6;

std::string_view placeholder(Entity e);
std::string_view marker(Marker m);
bool is_placeholder(std::string_view surface);
bool is_marker(std::string_view surface);

inline constexpr size_t kDefaultTokenCap = 128;

// Every normalization class and every annotation class is explicitly on or
// off. The defaults enable everything except the hashtag marker.
struct NormConfig {
  bool entities[kNumEntities] = {true, true, true, true, true, true, true, true, true};
  bool markers[kNumMarkers] = {false, true, true, true, true, true};
  bool contractions = true;
  bool emoticons = true;
  bool slang = true;
  bool segment_hashtags = true;
  bool lowercase = true;
  size_t token_cap = kDefaultTokenCap;

  bool entity_on(Entity e) const { return entities[static_cast<int>(e)]; }
  bool marker_on(Marker m) const { return markers[static_cast<int>(m)]; }
};

std::string normalize_entities(std::string_view text, const NormConfig& config = {});

std::string annotate_markers(std::string_view text, const LexiconSet& lexicon,
                             const NormConfig& config = {});

std::string expand_contractions(std::string_view text, const LexiconSet& lexicon);

// Emoticons and slang both expand here; the config toggles each map.
std::string expand_emoticons(std::string_view text, const LexiconSet& lexicon,
                             const NormConfig& config = {});

// Unknown words score -(3 + 2 * length) in log space.
double unknown_word_logprob(size_t length);
double segmentation_score(const std::vector<std::string>& words, const LexiconSet& lexicon);

// Maximum-likelihood unigram split of a hashtag (leading '#' required).
std::vector<std::string> segment_hashtag(std::string_view tag, const LexiconSet& lexicon);

std::vector<Token> tokenize(std::string_view text, Language language);

// Full chain: entities, markers, contractions, emoticons/slang, hashtag
// segmentation, tokenization. Truncated to config.token_cap.
std::vector<Token> pipeline(std::string_view text, Language language,
                            const LexiconSet& lexicon, const NormConfig& config = {});

std::vector<std::string> surfaces(const std::vector<Token>& tokens);

}  // namespace hsr::textnorm

#endif  // HSR_TEXTNORM_H_
