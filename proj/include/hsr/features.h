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

#ifndef HSR_FEATURES_H_
#define HSR_FEATURES_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "hsr/lexicon.h"

namespace hsr::features {

using Document = std::vector<std::string>;

struct VocabParams {
  int ngram_min = 1;
  int ngram_max = 2;
  size_t min_df = 1;
  size_t max_size = 100000;
};

// All n-grams of the requested orders, joined with a single space, in
// position order.
std::vector<std::string> ngrams(const Document& tokens, int min_n, int max_n);

// Smoothed inverse document frequency: ln((1 + N) / (1 + df)) + 1.
double smoothed_idf(size_t num_docs, size_t df);

class Vocabulary {
 public:
  Vocabulary() = default;

  // Keeps n-grams with df >= min_df; if more than max_size survive, the
  // highest-df ones win with ties broken lexicographically. Indices are
  // then assigned in lexicographic order.
  static Vocabulary fit(const std::vector<Document>& docs, const VocabParams& params = {});

  size_t size() const { return ngrams_.size(); }
  size_t num_docs() const { return num_docs_; }
  const VocabParams& params() const { return params_; }
  std::optional<uint32_t> index(const std::string& ngram) const;
  const std::string& ngram(uint32_t i) const { return ngrams_[i]; }
  size_t df(uint32_t i) const { return df_[i]; }
  double idf(uint32_t i) const { return idf_[i]; }

  // Text format: a "hsr-vocab" header line, then ngram<TAB>index<TAB>df<TAB>idf.
  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(std::istream& in, const std::string& name = "<stream>");
  static Vocabulary load(const std::filesystem::path& path);

  bool operator==(const Vocabulary& o) const {
    return ngrams_ == o.ngrams_ && df_ == o.df_ && idf_ == o.idf_ && num_docs_ == o.num_docs_;
  }

 private:
  VocabParams params_;
  size_t num_docs_ = 0;
  std::vector<std::string> ngrams_;
  std::vector<size_t> df_;
  std::vector<double> idf_;
  std::unordered_map<std::string, uint32_t> index_;
};

struct SparseEntry {
  uint32_t index = 0;
  double weight = 0.0;

  bool operator==(const SparseEntry&) const = default;
};

// Sparse TF-IDF block (strictly increasing indices, unit L2 norm unless
// empty) followed by an optional dense auxiliary block that occupies
// indices V .. V + aux.size() - 1.
struct FeatureVector {
  std::vector<SparseEntry> sparse;
  std::vector<double> aux;

  double sparse_norm() const;
  bool operator==(const FeatureVector&) const = default;
};

FeatureVector transform(const Vocabulary& vocab, const Document& tokens);

// [profane-token count, summed profanity score, <censored> marker count].
std::array<double, 3> profanity_features(const Document& tokens, const LexiconSet& lexicon);

inline constexpr size_t kAuxDim = 7;

// profanity_features followed by counts of <allcaps>, <elongated>,
// <repeated> and <emphasis> markers.
std::vector<double> auxiliary_block(const Document& tokens, const LexiconSet& lexicon);

// TF-IDF plus, when a lexicon is given, the auxiliary block.
class Featurizer {
 public:
  Featurizer() = default;
  Featurizer(Vocabulary vocab, bool use_aux) : vocab_(std::move(vocab)), use_aux_(use_aux) {}

  FeatureVector operator()(const Document& tokens, const LexiconSet& lexicon) const;
  size_t dimension() const { return vocab_.size() + (use_aux_ ? kAuxDim : 0); }
  const Vocabulary& vocabulary() const { return vocab_; }
  bool use_aux() const { return use_aux_; }

 private:
  Vocabulary vocab_;
  bool use_aux_ = true;
};

}  // namespace hsr::features

#endif  // HSR_FEATURES_H_
