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

#include "hsr/features.h"

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "hsr/textnorm.h"
#include "test_util.h"

namespace hsr::features {
namespace {

using hsr::testing::bundled_lexicons;

// Dense brute-force reference: n-grams rebuilt by hand, df by scanning
// every document, weights normalized per document.
struct Reference {
  std::map<std::string, double> idf;
  std::vector<std::map<std::string, double>> rows;
};

std::vector<std::string> naive_grams(const Document& d, int lo, int hi) {
  std::vector<std::string> out;
  for (int n = lo; n <= hi; ++n) {
    for (size_t i = 0; i + n <= d.size(); ++i) {
      std::string g = d[i];
      for (int k = 1; k < n; ++k) g += " " + d[i + k];
      out.push_back(g);
    }
  }
  return out;
}

Reference brute_force(const std::vector<Document>& docs, int lo, int hi) {
  Reference ref;
  std::set<std::string> all;
  for (const auto& d : docs) {
    for (const auto& g : naive_grams(d, lo, hi)) all.insert(g);
  }
  const double n = static_cast<double>(docs.size());
  for (const auto& g : all) {
    double df = 0;
    for (const auto& d : docs) {
      auto grams = naive_grams(d, lo, hi);
      if (std::find(grams.begin(), grams.end(), g) != grams.end()) df += 1;
    }
    ref.idf[g] = std::log((1 + n) / (1 + df)) + 1;
  }
  for (const auto& d : docs) {
    std::map<std::string, double> row;
    for (const auto& g : naive_grams(d, lo, hi)) row[g] += ref.idf[g];
    double sq = 0;
    for (auto& [g, w] : row) sq += w * w;
    for (auto& [g, w] : row) w /= std::sqrt(sq);
    ref.rows.push_back(row);
  }
  return ref;
}

std::vector<Document> random_corpus(Rng& rng) {
  std::vector<Document> docs(1 + rng.below(20));
  for (auto& d : docs) {
    for (size_t k = rng.below(31); k > 0; --k) d.push_back("t" + std::to_string(rng.below(12)));
  }
  return docs;
}

TEST_CASE("tf-idf matches a brute-force counter on random corpora") {
  Rng rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    auto docs = random_corpus(rng);
    const int hi = 1 + static_cast<int>(rng.below(2));
    auto vocab = Vocabulary::fit(docs, {1, hi, 1, 1000000});
    auto ref = brute_force(docs, 1, hi);
    REQUIRE(vocab.size() == ref.idf.size());
    for (uint32_t i = 0; i < vocab.size(); ++i) {
      CHECK(std::abs(vocab.idf(i) - ref.idf.at(vocab.ngram(i))) <= 1e-12);
    }
    for (size_t j = 0; j < docs.size(); ++j) {
      auto fv = transform(vocab, docs[j]);
      REQUIRE(fv.sparse.size() == ref.rows[j].size());
      for (const auto& e : fv.sparse) {
        CHECK(std::abs(e.weight - ref.rows[j].at(vocab.ngram(e.index))) <= 1e-12);
      }
    }
  }
}

TEST_CASE("idf values") {
  std::vector<Document> docs = {{"a", "b"}, {"a"}, {"c"}};
  auto v = Vocabulary::fit(docs, {1, 1});
  CHECK(v.idf(*v.index("a")) == doctest::Approx(std::log(4.0 / 3.0) + 1).epsilon(1e-15));
  CHECK(v.idf(*v.index("b")) == doctest::Approx(std::log(2.0) + 1).epsilon(1e-15));
  CHECK(v.idf(*v.index("b")) == doctest::Approx(1.6931471805599454));

  auto single = Vocabulary::fit({{"x", "y", "x"}}, {1, 1});
  CHECK(single.idf(0) == 1.0);
  CHECK(single.idf(1) == 1.0);

  CHECK_THROWS_AS(Vocabulary::fit({}), Error);
  CHECK_THROWS_AS(Vocabulary::fit(docs, {2, 1}), Error);
}

TEST_CASE("idf never increases when a document containing the term is added") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto docs = random_corpus(rng);
    docs[0].push_back("probe");
    auto before = Vocabulary::fit(docs, {1, 1});
    docs.push_back({"probe"});
    auto after = Vocabulary::fit(docs, {1, 1});
    CHECK(after.idf(*after.index("probe")) <= before.idf(*before.index("probe")));
  }
}

TEST_CASE("transform rows are unit norm or empty with sorted indices") {
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    auto docs = random_corpus(rng);
    auto vocab = Vocabulary::fit(docs);
    for (const auto& d : docs) {
      auto fv = transform(vocab, d);
      const double norm = fv.sparse_norm();
      if (d.empty()) {
        CHECK(norm == 0.0);
      } else {
        CHECK(std::abs(norm - 1.0) <= 1e-9);
      }
      for (size_t k = 1; k < fv.sparse.size(); ++k) {
        CHECK(fv.sparse[k - 1].index < fv.sparse[k].index);
      }
      for (const auto& e : fv.sparse) CHECK(e.weight >= 0.0);
    }
    CHECK(transform(vocab, {"never", "seen"}).sparse.empty());
  }
}

TEST_CASE("vocabulary ordering, min_df and max_size") {
  std::vector<Document> docs = {{"b", "a"}, {"b", "c"}, {"b", "a"}, {"d"}};
  auto all = Vocabulary::fit(docs, {1, 1});
  REQUIRE(all.size() == 4);
  CHECK(all.ngram(0) == "a");
  CHECK(all.ngram(3) == "d");

  auto frequent = Vocabulary::fit(docs, {1, 1, 2});
  REQUIRE(frequent.size() == 2);
  CHECK(frequent.ngram(0) == "a");
  CHECK(frequent.ngram(1) == "b");

  // df: b=3, a=2, c=1, d=1; the c/d tie goes to c.
  auto capped = Vocabulary::fit(docs, {1, 1, 1, 3});
  REQUIRE(capped.size() == 3);
  CHECK(capped.index("c").has_value());
  CHECK_FALSE(capped.index("d").has_value());

  auto bigrams = Vocabulary::fit({{"x", "y", "z"}}, {1, 2});
  CHECK(bigrams.size() == 5);
  CHECK(bigrams.index("x y").has_value());
  CHECK(bigrams.index("y z").has_value());
  CHECK(ngrams({"x", "y", "z"}, 2, 2) == std::vector<std::string>{"x y", "y z"});
}

TEST_CASE("vocabulary text format round-trips") {
  auto v = Vocabulary::fit({{"hello", "world"}, {"hello", "there"}, {"नमस्ते"}}, {1, 2, 1, 50});
  std::stringstream buf;
  v.save(buf);
  auto back = Vocabulary::load(buf);
  CHECK(back == v);
  CHECK(back.params().ngram_max == 2);
  CHECK(back.params().max_size == 50);
  auto doc = Document{"hello", "world"};
  CHECK(transform(back, doc) == transform(v, doc));

  std::stringstream bad("not-a-vocab\n");
  CHECK_THROWS_AS(Vocabulary::load(bad), Error);
}

TEST_CASE("profanity and auxiliary features") {
  const auto& lex = bundled_lexicons();
  Document toks = {"you", "idiot", "and", "moron"};
  auto p = profanity_features(toks, lex);
  CHECK(p[0] == 2.0);
  CHECK(p[1] == doctest::Approx(*lex.profanity_score("idiot") + *lex.profanity_score("moron")));
  CHECK(p[2] == 0.0);

  auto none = profanity_features({"have", "a", "nice", "day"}, lex);
  CHECK(none == std::array<double, 3>{0, 0, 0});

  auto toks2 = textnorm::surfaces(textnorm::pipeline("You IDIOT f**k sooooo", Language::kEn, lex));
  auto aux = auxiliary_block(toks2, lex);
  REQUIRE(aux.size() == kAuxDim);
  CHECK(aux[0] >= 1.0);
  CHECK(aux[2] == 1.0);
  CHECK(aux[3] == 1.0);

  auto vocab = Vocabulary::fit({toks});
  Featurizer with(vocab, true), without(vocab, false);
  CHECK(with.dimension() == vocab.size() + kAuxDim);
  CHECK(without.dimension() == vocab.size());
  CHECK(with(toks, lex).aux.size() == kAuxDim);
  CHECK(without(toks, lex).aux.empty());
}

}  // namespace
}  // namespace hsr::features
