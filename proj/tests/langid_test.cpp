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

#include "doctest.h"
#include "hsr/utf8.h"
#include "test_util.h"

namespace hsr::langid {
namespace {

using hsr::testing::bundled_lexicons;

// Routing examples, one per language.
constexpr std::string_view kHindiRow = "ये लोग देश के गद्दार हैं, इन्हें यहाँ से निकालो";
constexpr std::string_view kCodemixRow =
    "Main jutt Punjabi hoon aur paka N league. Madarchod Imran ki Punjab say nafrat clear hai.";
constexpr std::string_view kEnglishRow = "Black on the bus";

TEST_CASE("example rows route to their languages") {
  const auto& lex = bundled_lexicons();
  CHECK(detect(kHindiRow, lex).language == Language::kHi);
  auto cm = detect(kCodemixRow, lex);
  CHECK(cm.language == Language::kHiCodemix);
  CHECK(cm.codemix_rate == doctest::Approx(0.5));
  auto en = detect(kEnglishRow, lex);
  CHECK(en.language == Language::kEn);
  CHECK(en.codemix_rate == 0.0);
  CHECK(en.devanagari_fraction == 0.0);
  CHECK(detect("I am literally too mad right now a ARAB won #MissAmerica", lex).language ==
        Language::kEn);
}

TEST_CASE("evidence and thresholds") {
  const auto& lex = bundled_lexicons();
  auto d = detect("hello नमस्ते", lex);
  CHECK(d.devanagari_fraction > 0.0);
  CHECK(d.devanagari_fraction < 1.0);
  CHECK(d.thresholds.devanagari_threshold == 0.30);
  CHECK(detect("12345 !!!", lex).language == Language::kEn);
  CHECK_THROWS_AS(detect("   ", lex), Error);
  CHECK_THROWS_AS(detect("", lex), Error);

  LangIdConfig strict{0.99, 0.99};
  CHECK(detect(kCodemixRow, lex, strict).language == Language::kEn);
  CHECK_THROWS_AS((LangIdConfig{0.0, 0.5}.validate()), Error);
}

std::string random_devanagari(Rng& rng, size_t letters) {
  std::string s;
  for (size_t i = 0; i < letters; ++i) {
    utf8::append(s, static_cast<char32_t>(0x0915 + rng.below(0x0939 - 0x0915 + 1)));
    if (rng.below(5) == 0) s += ' ';
  }
  return s;
}

TEST_CASE("pure Devanagari strings route to hi") {
  const auto& lex = bundled_lexicons();
  Rng rng(31);
  for (int i = 0; i < 200; ++i) {
    auto s = random_devanagari(rng, 10 + rng.below(40));
    if (rng.below(2)) s += " 123 !";
    CHECK(detect(s, lex).language == Language::kHi);
  }
}

TEST_CASE("adding Devanagari never flips hi to en") {
  const auto& lex = bundled_lexicons();
  Rng rng(32);
  const std::vector<std::string> latin = {"the", "weather", "hai", "bus", "party", "nahi"};
  for (int i = 0; i < 200; ++i) {
    std::string s;
    for (size_t k = 1 + rng.below(6); k > 0; --k) s += latin[rng.below(latin.size())] + " ";
    s += random_devanagari(rng, 1 + rng.below(8));
    Language before = detect(s, lex).language;
    for (int step = 0; step < 5; ++step) {
      s += random_devanagari(rng, 1 + rng.below(4));
      Language after = detect(s, lex).language;
      if (before == Language::kHi) CHECK(after == Language::kHi);
      before = after;
    }
  }
}

TEST_CASE("detection is total and deterministic") {
  const auto& lex = bundled_lexicons();
  Rng rng(33);
  for (int i = 0; i < 300; ++i) {
    std::string s;
    for (size_t k = 1 + rng.below(30); k > 0; --k) s.push_back(static_cast<char>(33 + rng.below(94)));
    auto a = detect(s, lex);
    auto b = detect(s, lex);
    CHECK(a.language == b.language);
    CHECK(a.devanagari_fraction >= 0.0);
    CHECK(a.devanagari_fraction <= 1.0);
    CHECK(a.codemix_rate >= 0.0);
    CHECK(a.codemix_rate <= 1.0);
  }
}

}  // namespace
}  // namespace hsr::langid
