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

#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "doctest.h"
#include "hsr/textnorm.h"
#include "test_util.h"

namespace hsr::corpus {
namespace {

using hsr::testing::bundled_lexicons;
using hsr::testing::test_data;
using hsr::testing::TempDir;

std::vector<std::string> whitespace_tokens(std::string_view text, Language) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

Corpus make_corpus(const std::vector<std::tuple<std::string, Label, Language>>& rows) {
  Corpus c;
  for (const auto& [text, label, lang] : rows) {
    c.push_back({static_cast<int64_t>(c.size()), text, label, lang, "toy"});
  }
  return c;
}

TEST_CASE("ingest_source maps labels and keeps source identity") {
  auto sources = load_source_config(test_data("sources.ini"));
  REQUIRE(sources.size() == 2);
  auto davidson = ingest_source(sources[0]);
  REQUIRE(davidson.size() == 4);
  CHECK(davidson[0].label == Label::kHate);
  CHECK(davidson[0].text == "those vermin should leave, now");
  CHECK(davidson[1].label == Label::kAbusive);
  CHECK(davidson[2].text == "lovely weather \"today\"");
  CHECK(davidson[3].text == "line one\nline two");
  CHECK(davidson[3].source_id == "davidson");

  auto hasoc = ingest_source(sources[1]);
  REQUIRE(hasoc.size() == 2);
  CHECK(hasoc[0].label == Label::kHate);
  CHECK(hasoc[1].label == Label::kNeither);
  CHECK(hasoc[1].language == Language::kEn);
}

TEST_CASE("ingest_source errors") {
  SourceDescriptor d;
  d.source_id = "x";
  d.text_column = "text";
  d.label_column = "task_1";
  d.label_map = {{"NOT", Label::kNeither}};

  d.path = test_data("missing.tsv");
  CHECK_THROWS_WITH_AS(ingest_source(d), doctest::Contains("not found"), Error);

  d.path = test_data("bad_label.tsv");
  CHECK_THROWS_WITH_AS(ingest_source(d), doctest::Contains("unmapped label 'xyz'"), Error);

  d.path = test_data("short_row.tsv");
  CHECK_THROWS_WITH_AS(ingest_source(d), doctest::Contains("short_row.tsv:2: malformed row"),
                       Error);

  d.path = test_data("hasoc_en_sample.tsv");
  d.label_column = "task_9";
  CHECK_THROWS_WITH_AS(ingest_source(d), doctest::Contains("task_9"), Error);
}

TEST_CASE("collate concatenates in source order with dense ids") {
  auto sources = load_source_config(test_data("sources.ini"));
  auto corpus = collate(sources);
  REQUIRE(corpus.size() == 6);
  for (size_t i = 0; i < corpus.size(); ++i) CHECK(corpus[i].id == static_cast<int64_t>(i));
  CHECK(corpus[4].source_id == "hasoc2019-en");
  CHECK_NOTHROW(validate(corpus));

  CHECK(collate({}).empty());

  auto dup = sources;
  dup[1].source_id = "davidson";
  CHECK_THROWS_WITH_AS(collate(dup), doctest::Contains("duplicate source_id"), Error);

  auto twice = std::vector<SourceDescriptor>{sources[1], sources[1]};
  twice[1].source_id = "copy";
  CHECK(collate(twice).size() == 4);
  CHECK(collate(twice, /*dedup=*/true).size() == 2);
}

TEST_CASE("unified TSV round-trips records exactly") {
  auto corpus = collate(load_source_config(test_data("sources.ini")));
  corpus.push_back({6, "tab\there\\n back\\slash\r\nend", Label::kAbusive, Language::kHiCodemix,
                    "odd\tsource"});
  corpus.push_back({7, "नमस्ते दुनिया।", Label::kNeither, Language::kHi, "hi"});
  std::stringstream buf;
  write_tsv(corpus, buf);
  CHECK(read_tsv(buf) == corpus);

  std::stringstream bad("id\ttext\n");
  CHECK_THROWS_AS(read_tsv(bad), Error);
}

TEST_CASE("escape and unescape are inverse on random byte strings") {
  Rng rng(3);
  const std::string alphabet = "ab\\\t\n\rnt ";
  for (int i = 0; i < 500; ++i) {
    std::string s;
    for (size_t k = rng.below(20); k > 0; --k) s.push_back(alphabet[rng.below(alphabet.size())]);
    std::string e = escape_field(s);
    CHECK(e.find('\t') == std::string::npos);
    CHECK(e.find('\n') == std::string::npos);
    CHECK(unescape_field(e) == s);
  }
}

TEST_CASE("compute_stats") {
  auto c = make_corpus({{"a b", Label::kHate, Language::kEn},
                        {"b c", Label::kNeither, Language::kEn},
                        {"x", Label::kHate, Language::kEn},
                        {"y z w", Label::kAbusive, Language::kEn}});
  auto s = compute_stats(c, whitespace_tokens);
  const auto& en = s.of(Language::kEn);
  CHECK(en.records == 4);
  CHECK(en.hate_fraction == 0.5);
  CHECK(en.abuse_fraction == 0.25);
  CHECK(s.of(Language::kHi).records == 0);
  CHECK(s.of(Language::kHi).hate_fraction == 0.0);

  auto toy = compute_stats(make_corpus({{"a b", Label::kNeither, Language::kEn},
                                        {"b c", Label::kNeither, Language::kEn}}),
                           whitespace_tokens);
  CHECK(toy.of(Language::kEn).vocab_size == 3);
  CHECK(toy.of(Language::kEn).max_seq_len == 2);
  CHECK(toy.of(Language::kEn).vocab_size <= toy.of(Language::kEn).token_occurrences);
}

TEST_CASE("compute_stats counts are additive over disjoint corpora") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    Corpus a, b, both;
    for (int i = 0; i < 40; ++i) {
      UnifiedRecord r{i, "w" + std::to_string(rng.below(9)) + " v" + std::to_string(rng.below(5)),
                      kAllLabels[rng.below(3)], kAllLanguages[rng.below(3)], "s"};
      (i % 2 ? a : b).push_back(r);
      both.push_back(r);
    }
    auto sa = compute_stats(a, whitespace_tokens);
    auto sb = compute_stats(b, whitespace_tokens);
    auto sab = compute_stats(both, whitespace_tokens);
    CHECK(sab.total == sa.total + sb.total);
    for (Language l : kAllLanguages) {
      CHECK(sab.of(l).records == sa.of(l).records + sb.of(l).records);
      CHECK(sab.of(l).token_occurrences == sa.of(l).token_occurrences + sb.of(l).token_occurrences);
      for (int k = 0; k < kNumClasses; ++k) {
        CHECK(sab.of(l).label_counts[k] == sa.of(l).label_counts[k] + sb.of(l).label_counts[k]);
      }
      CHECK(sab.of(l).hate_fraction >= 0.0);
      CHECK(sab.of(l).hate_fraction <= 1.0);
    }
  }
}

TEST_CASE("split is deterministic and stratified") {
  Corpus ten;
  for (int i = 0; i < 10; ++i) ten.push_back({i, "t" + std::to_string(i), Label::kNeither, Language::kEn, "s"});
  SplitSpec spec{0.8, 7};
  auto [train, test] = split(ten, spec);
  CHECK(train.size() == 8);
  CHECK(test.size() == 2);
  auto again = split(ten, spec);
  CHECK(again.first == train);
  CHECK(again.second == test);
  std::stringstream s1, s2;
  write_tsv(train, s1);
  write_tsv(again.first, s2);
  CHECK(s1.str() == s2.str());

  Corpus one = {{0, "only", Label::kHate, Language::kHi, "s"}};
  auto [t1, e1] = split(one, spec);
  CHECK(t1.size() == 1);
  CHECK(e1.empty());

  Corpus hundred;
  for (int i = 0; i < 100; ++i) {
    Label l = i < 50 ? Label::kHate : i < 80 ? Label::kAbusive : Label::kNeither;
    hundred.push_back({i, "x" + std::to_string(i), l, Language::kEn, "s"});
  }
  auto [tr, te] = split(hundred, {0.8, 99});
  std::array<int, 3> counts{};
  for (const auto& r : tr) ++counts[index_of(r.label)];
  CHECK(std::abs(counts[0] - 40) <= 1);
  CHECK(std::abs(counts[1] - 24) <= 1);
  CHECK(std::abs(counts[2] - 16) <= 1);
  CHECK(tr.size() + te.size() == 100);
}

TEST_CASE("split keeps every stratum within one record of the fraction") {
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    Corpus c;
    const int n = 1 + static_cast<int>(rng.below(200));
    for (int i = 0; i < n; ++i) {
      c.push_back({i, "r", kAllLabels[rng.below(3)], kAllLanguages[rng.below(3)], "s"});
    }
    const double f = 0.5 + 0.4 * rng.uniform();
    auto [tr, te] = split(c, {f, rng.next()});
    std::map<std::pair<int, int>, std::pair<int, int>> per;
    for (const auto& r : c) ++per[{index_of(r.label), index_of(r.language)}].first;
    for (const auto& r : tr) ++per[{index_of(r.label), index_of(r.language)}].second;
    for (const auto& [key, v] : per) {
      if (v.first == 1) {
        CHECK(v.second == 1);
      } else {
        CHECK(std::abs(v.second - f * v.first) <= 1.0);
      }
    }
  }
}

TEST_CASE("weak_label follows the guideline order") {
  const auto& lex = bundled_lexicons();
  CHECK(weak_label("those vermin are everywhere", lex) == Label::kHate);
  CHECK(weak_label("you idiot, stop it", lex) == Label::kAbusive);
  CHECK(weak_label("have a nice day", lex) == Label::kNeither);
  // A slur wins over abusive words in the same text.
  CHECK(weak_label("shut up you stupid parasites", lex) == Label::kHate);
  CHECK(weak_label("Go back to your country!", lex) == Label::kHate);
  CHECK(weak_label("so true #SendThemBack", lex) == Label::kHate);
  CHECK(weak_label("f**k off", lex) == Label::kAbusive);
  CHECK(weak_label("tu pagal hai kya", lex) == Label::kAbusive);
  CHECK(weak_label("ये लोग गद्दार हैं", lex) == Label::kHate);
  CHECK(weak_label("तुम बेवकूफ हो", lex) == Label::kAbusive);

  LexiconSet empty;
  CHECK_THROWS_AS(weak_label("anything", empty), Error);
}

TEST_CASE("ingested labels are always one of the three classes") {
  TempDir dir;
  Rng rng(21);
  const std::vector<std::string> raw = {"HOF", "NOT", "OFF", "hateful", "normal"};
  for (int trial = 0; trial < 10; ++trial) {
    SourceDescriptor d;
    d.source_id = "p" + std::to_string(trial);
    d.path = dir / (d.source_id + ".tsv");
    d.text_column = "text";
    d.label_column = "label";
    for (const auto& r : raw) d.label_map[r] = kAllLabels[rng.below(3)];
    {
      std::ofstream out(d.path);
      out << "label\ttext\n";
      for (int i = 0; i < 50; ++i) out << raw[rng.below(raw.size())] << "\tsample " << i << "\n";
    }
    for (const auto& rec : ingest_source(d)) {
      CHECK(parse_label(label_name(rec.label)).has_value());
    }
  }
}

}  // namespace
}  // namespace hsr::corpus
