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

#include "hsr/langid.h"

#include "hsr/corpus.h"
#include "hsr/utf8.h"

namespace hsr::langid {

void LangIdConfig::validate() const {
  auto ok = [](double v) { return v > 0.0 && v <= 1.0; };
  if (!ok(devanagari_threshold) || !ok(codemix_threshold)) {
    fail(ErrorCode::kInvalidArgument, "language thresholds must be in (0, 1]");
  }
}

RoutingDecision detect(std::string_view text, const LexiconSet& lexicon, const LangIdConfig& config) {
  if (trim(text).empty()) fail(ErrorCode::kInvalidArgument, "cannot detect the language of empty text");
  RoutingDecision d;
  d.thresholds = config;

  size_t devanagari = 0, letters = 0;
  for (char32_t cp : utf8::decode_all(text)) {
    if (utf8::is_devanagari(cp) && !utf8::is_danda(cp) && !(cp >= 0x0966 && cp <= 0x096F)) {
      ++devanagari;
      ++letters;
    } else if (utf8::is_letter(cp)) {
      ++letters;
    }
  }
  if (letters > 0) d.devanagari_fraction = static_cast<double>(devanagari) / static_cast<double>(letters);

  size_t words = 0, hits = 0;
  for (const auto& tok : corpus::label_tokens(text)) {
    bool latin = false;
    for (char ch : tok) latin = latin || (ch >= 'a' && ch <= 'z');
    if (!latin) continue;
    ++words;
    if (lexicon.is_codemix_word(tok)) ++hits;
  }
  if (words > 0) d.codemix_rate = static_cast<double>(hits) / static_cast<double>(words);

  if (d.devanagari_fraction >= config.devanagari_threshold) {
    d.language = Language::kHi;
  } else if (d.codemix_rate >= config.codemix_threshold) {
    d.language = Language::kHiCodemix;
  } else {
    d.language = Language::kEn;
  }
  return d;
}

}  // namespace hsr::langid
