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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <unordered_set>

#include "hsr/common.h"
#include "hsr/textnorm.h"

namespace hsr::features {

namespace {
constexpr std::string_view kVocabMagic = "hsr-vocab";
}

std::vector<std::string> ngrams(const Document& tokens, int min_n, int max_n) {
  std::vector<std::string> out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    std::string gram;
    for (int n = 1; n <= max_n && i + n <= tokens.size(); ++n) {
      if (n > 1) gram.push_back(' ');
      gram += tokens[i + n - 1];
      if (n >= min_n) out.push_back(gram);
    }
  }
  return out;
}

double smoothed_idf(size_t num_docs, size_t df) {
  return std::log((1.0 + static_cast<double>(num_docs)) / (1.0 + static_cast<double>(df))) + 1.0;
}

Vocabulary Vocabulary::fit(const std::vector<Document>& docs, const VocabParams& params) {
  if (docs.empty()) fail(ErrorCode::kInvalidArgument, "cannot fit a vocabulary on zero documents");
  if (params.ngram_min < 1 || params.ngram_max < params.ngram_min) {
    fail(ErrorCode::kInvalidArgument, "invalid n-gram range");
  }
  std::unordered_map<std::string, size_t> df;
  for (const auto& doc : docs) {
    auto grams = ngrams(doc, params.ngram_min, params.ngram_max);
    std::unordered_set<std::string> unique(grams.begin(), grams.end());
    for (const auto& g : unique) ++df[g];
  }
  std::vector<std::pair<std::string, size_t>> kept;
  for (auto& [g, d] : df) {
    if (d >= params.min_df) kept.emplace_back(g, d);
  }
  if (kept.size() > params.max_size) {
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    kept.resize(params.max_size);
  }
  std::sort(kept.begin(), kept.end());

  Vocabulary v;
  v.params_ = params;
  v.num_docs_ = docs.size();
  for (auto& [g, d] : kept) {
    v.index_.emplace(g, static_cast<uint32_t>(v.ngrams_.size()));
    v.ngrams_.push_back(g);
    v.df_.push_back(d);
    v.idf_.push_back(smoothed_idf(docs.size(), d));
  }
  return v;
}

std::optional<uint32_t> Vocabulary::index(const std::string& ngram) const {
  auto it = index_.find(ngram);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void Vocabulary::save(std::ostream& out) const {
  out << kVocabMagic << "\t1\tdocs=" << num_docs_ << "\tngram=" << params_.ngram_min << "-"
      << params_.ngram_max << "\tmin_df=" << params_.min_df << "\tmax_size=" << params_.max_size
      << '\n';
  for (size_t i = 0; i < ngrams_.size(); ++i) {
    out << ngrams_[i] << '\t' << i << '\t' << df_[i] << '\t' << format_double(idf_[i]) << '\n';
  }
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  save(out);
  if (!out) fail(ErrorCode::kIo, "write failed: " + path.string());
}

Vocabulary Vocabulary::load(std::istream& in, const std::string& name) {
  auto split = [](const std::string& line) {
    std::vector<std::string> f;
    size_t start = 0;
    while (true) {
      size_t p = line.find('\t', start);
      f.push_back(line.substr(start, p - start));
      if (p == std::string::npos) break;
      start = p + 1;
    }
    return f;
  };
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::kParse, name + ": empty vocabulary file");
  auto head = split(line);
  if (head.size() != 6 || head[0] != kVocabMagic || head[1] != "1") {
    fail(ErrorCode::kParse, name + ": not a version-1 vocabulary file");
  }
  Vocabulary v;
  auto value = [&](const std::string& field, const std::string& key) {
    if (field.rfind(key + "=", 0) != 0) fail(ErrorCode::kParse, name + ": expected " + key);
    return field.substr(key.size() + 1);
  };
  v.num_docs_ = static_cast<size_t>(parse_int(value(head[2], "docs")));
  std::string range = value(head[3], "ngram");
  auto dash = range.find('-');
  if (dash == std::string::npos) fail(ErrorCode::kParse, name + ": bad n-gram range");
  v.params_.ngram_min = static_cast<int>(parse_int(range.substr(0, dash)));
  v.params_.ngram_max = static_cast<int>(parse_int(range.substr(dash + 1)));
  v.params_.min_df = static_cast<size_t>(parse_int(value(head[4], "min_df")));
  v.params_.max_size = static_cast<size_t>(parse_int(value(head[5], "max_size")));
  int n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    auto f = split(line);
    if (f.size() != 4) fail(ErrorCode::kParse, name + ":" + std::to_string(n) + ": expected 4 fields");
    if (static_cast<size_t>(parse_int(f[1])) != v.ngrams_.size()) {
      fail(ErrorCode::kParse, name + ":" + std::to_string(n) + ": indices must be dense");
    }
    v.index_.emplace(f[0], static_cast<uint32_t>(v.ngrams_.size()));
    v.ngrams_.push_back(f[0]);
    v.df_.push_back(static_cast<size_t>(parse_int(f[2])));
    v.idf_.push_back(parse_double(f[3]));
  }
  return v;
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kNotFound, "vocabulary not found: " + path.string());
  return load(in, path.string());
}

double FeatureVector::sparse_norm() const {
  double s = 0;
  for (const auto& e : sparse) s += e.weight * e.weight;
  return std::sqrt(s);
}

FeatureVector transform(const Vocabulary& vocab, const Document& tokens) {
  std::map<uint32_t, double> tf;
  for (const auto& g : ngrams(tokens, vocab.params().ngram_min, vocab.params().ngram_max)) {
    if (auto i = vocab.index(g)) tf[*i] += 1.0;
  }
  FeatureVector fv;
  fv.sparse.reserve(tf.size());
  double sq = 0;
  for (auto [i, count] : tf) {
    double w = count * vocab.idf(i);
    fv.sparse.push_back({i, w});
    sq += w * w;
  }
  if (sq > 0) {
    const double norm = std::sqrt(sq);
    for (auto& e : fv.sparse) e.weight /= norm;
  }
  return fv;
}

std::array<double, 3> profanity_features(const Document& tokens, const LexiconSet& lexicon) {
  std::array<double, 3> out{};
  const auto censored = textnorm::marker(textnorm::Marker::kCensored);
  for (const auto& t : tokens) {
    if (auto s = lexicon.profanity_score(t)) {
      out[0] += 1.0;
      out[1] += *s;
    }
    if (t == censored) out[2] += 1.0;
  }
  return out;
}

std::vector<double> auxiliary_block(const Document& tokens, const LexiconSet& lexicon) {
  using textnorm::Marker;
  auto prof = profanity_features(tokens, lexicon);
  std::vector<double> aux(prof.begin(), prof.end());
  for (Marker m : {Marker::kAllcaps, Marker::kElongated, Marker::kRepeated, Marker::kEmphasis}) {
    const auto name = textnorm::marker(m);
    aux.push_back(static_cast<double>(std::count(tokens.begin(), tokens.end(), name)));
  }
  return aux;
}

FeatureVector Featurizer::operator()(const Document& tokens, const LexiconSet& lexicon) const {
  FeatureVector fv = transform(vocab_, tokens);
  if (use_aux_) fv.aux = auxiliary_block(tokens, lexicon);
  return fv;
}

}  // namespace hsr::features
