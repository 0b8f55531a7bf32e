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

#ifndef HSR_LANGID_H_
#define HSR_LANGID_H_

#include <string_view>

#include "hsr/common.h"
#include "hsr/lexicon.h"

namespace hsr::langid {

struct LangIdConfig {
  double devanagari_threshold = 0.30;
  double codemix_threshold = 0.15;

  void validate() const;
};

struct RoutingDecision {
  Language language = Language::kEn;
  // Devanagari share of the letter-bearing codepoints.
  double devanagari_fraction = 0.0;
  // Share of Latin-script word tokens found in the codemix lexicon.
  double codemix_rate = 0.0;
  LangIdConfig thresholds;
};

// Devanagari fraction >= devanagari_threshold -> hi; else codemix rate >=
// codemix_threshold -> hi_codemix; else en. Throws on blank text.
RoutingDecision detect(std::string_view text, const LexiconSet& lexicon,
                       const LangIdConfig& config = {});

}  // namespace hsr::langid

#endif  // HSR_LANGID_H_
