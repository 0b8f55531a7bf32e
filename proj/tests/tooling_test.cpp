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

#include <algorithm>
#include <atomic>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "hsr/corpus.h"
#include "hsr/langid.h"
#include "hsr/tooling.h"
#include "test_util.h"

using namespace hsr;
using hsr::testing::bundled_lexicons;

namespace {

tooling::SynthSpec spec_of(size_t en, size_t hi, size_t cm, std::array<double, 3> mix, uint64_t seed) {
  tooling::SynthSpec s;
  s.counts = {en, hi, cm};
  s.mixture = mix;
  s.seed = seed;
  return s;
}

std::string to_tsv(const corpus::Corpus& c) {
  std::ostringstream out;
  corpus::write_tsv(c, out);
  return out.str();
}

}  // namespace

TEST_CASE("class counts follow the mixture") {
  auto c = tooling::class_counts(1000, {0.60, 0.05, 0.35});
  CHECK(c == std::array<size_t, 3>{600, 50, 350});
  c = tooling::class_counts(10, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  CHECK(c[0] + c[1] + c[2] == 10);
  CHECK(c == std::array<size_t, 3>{4, 3, 3});
  c = tooling::class_counts(7, {0.5, 0.5, 0.0});
  CHECK(c == std::array<size_t, 3>{4, 3, 0});
  for (size_t n : {1u, 2u, 13u, 999u}) {
    auto k = tooling::class_counts(n, {0.2, 0.3, 0.5});
    CHECK(k[0] + k[1] + k[2] == n);
    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(static_cast<double>(k[i]) - n * std::array{0.2, 0.3, 0.5}[i]) < 1.0);
    }
  }
}

TEST_CASE("1000 EN records at 60/5/35") {
  auto corpus = tooling::generate_synthetic(spec_of(1000, 0, 0, {0.60, 0.05, 0.35}, 1), bundled_lexicons());
  REQUIRE(corpus.size() == 1000);
  std::array<size_t, 3> counts{};
  for (const auto& r : corpus) {
    ++counts[index_of(r.label)];
    CHECK(r.language == Language::kEn);
  }
  CHECK(counts == std::array<size_t, 3>{600, 50, 350});
}

TEST_CASE("same seed gives byte-identical output") {
  const auto spec = spec_of(120, 80, 80, {0.3, 0.3, 0.4}, 9);
  CHECK(to_tsv(tooling::generate_synthetic(spec, bundled_lexicons())) ==
        to_tsv(tooling::generate_synthetic(spec, bundled_lexicons())));
  auto other = spec;
  other.seed = 10;
  CHECK(to_tsv(tooling::generate_synthetic(spec, bundled_lexicons())) !=
        to_tsv(tooling::generate_synthetic(other, bundled_lexicons())));
}

TEST_CASE("labels agree with an independent lexicon scan") {
  const auto& lex = bundled_lexicons();
  auto corpus = tooling::generate_synthetic(spec_of(300, 300, 300, {0.4, 0.3, 0.3}, 3), lex);
  for (const auto& r : corpus) {
    const auto tokens = corpus::label_tokens(r.text);
    const bool has_slur =
        std::any_of(tokens.begin(), tokens.end(), [&](const auto& t) { return lex.is_slur(t); });
    const bool has_abuse = std::any_of(tokens.begin(), tokens.end(),
                                       [&](const auto& t) { return lex.profanity_score(t).has_value(); });
    INFO(r.text);
    switch (r.label) {
      case Label::kHate:
        CHECK(has_slur);
        break;
      case Label::kAbusive:
        CHECK_FALSE(has_slur);
        CHECK(has_abuse);
        break;
      case Label::kNeither:
        CHECK_FALSE(has_slur);
        CHECK_FALSE(has_abuse);
        break;
    }
  }
}

TEST_CASE("synthetic corpora satisfy the corpus invariants") {
  hsr::testing::TempDir dir;
  auto corpus = tooling::generate_synthetic(spec_of(200, 150, 150, {0.3, 0.2, 0.5}, 5), bundled_lexicons());
  CHECK_NOTHROW(corpus::validate(corpus));
  for (size_t i = 0; i < corpus.size(); ++i) CHECK(corpus[i].id == static_cast<int64_t>(i));
  corpus::write_tsv(corpus, dir / "synth.tsv");
  CHECK(corpus::read_tsv(dir / "synth.tsv") == corpus);
}

TEST_CASE("generated languages route to their own model") {
  const auto& lex = bundled_lexicons();
  auto corpus = tooling::generate_synthetic(spec_of(60, 60, 60, {0.3, 0.3, 0.4}, 2), lex);
  size_t agree = 0;
  for (const auto& r : corpus) agree += langid::detect(r.text, lex).language == r.language;
  CHECK(agree == corpus.size());
}

TEST_CASE("invalid synthetic specs") {
  const auto& lex = bundled_lexicons();
  CHECK_THROWS_AS(tooling::generate_synthetic(spec_of(0, 0, 0, {0.3, 0.3, 0.4}, 1), lex), Error);
  CHECK_THROWS_AS(tooling::generate_synthetic(spec_of(10, 0, 0, {0.5, 0.5, 0.5}, 1), lex), Error);
  CHECK_THROWS_AS(tooling::generate_synthetic(spec_of(10, 0, 0, {-0.1, 0.6, 0.5}, 1), lex), Error);
}

TEST_CASE("percentiles use nearest rank") {
  std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  CHECK(tooling::percentile(v, 50) == 5);
  CHECK(tooling::percentile(v, 95) == 10);
  CHECK(tooling::percentile(v, 10) == 1);
  CHECK(tooling::percentile({42}, 99) == 42);
  CHECK_THROWS_AS(tooling::percentile({}, 50), Error);
  CHECK_THROWS_AS(tooling::percentile(v, 0), Error);
}

TEST_CASE("benchmark report shape") {
  std::vector<std::string> texts{"a", "bb", "ccc"};
  std::atomic<size_t> calls{0};
  tooling::BenchConfig config;
  config.requests = 1000;
  config.concurrency = 4;
  auto r = tooling::run_benchmark(
      texts, [&](const std::string& t) {
        ++calls;
        if (t == "bb" && calls % 7 == 0) throw std::runtime_error("boom");
      },
      config);
  CHECK(calls == 1000);
  CHECK(r.requests == 1000);
  CHECK(r.failures > 0);
  CHECK(r.p50_ms <= r.p95_ms);
  CHECK(r.p95_ms <= r.p99_ms);
  CHECK(r.p99_ms <= r.max_ms);
  CHECK(r.throughput_rps > 0);
  CHECK(r.json().find("\"p95_ms\"") != std::string::npos);

  config.requests = 0;
  CHECK_THROWS_AS(tooling::run_benchmark(texts, [](const std::string&) {}, config), Error);
  config.requests = 5;
  CHECK_THROWS_AS(tooling::run_benchmark({}, [](const std::string&) {}, config), Error);
}

TEST_CASE("benchmark request set is deterministic") {
  std::vector<std::string> texts{"a", "b", "c", "d"};
  tooling::BenchConfig config;
  config.requests = 50;
  config.seed = 7;
  std::vector<std::string> first, second;
  tooling::run_benchmark(texts, [&](const std::string& t) { first.push_back(t); }, config);
  tooling::run_benchmark(texts, [&](const std::string& t) { second.push_back(t); }, config);
  CHECK(first == second);
}
