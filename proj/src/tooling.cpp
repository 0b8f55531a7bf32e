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

#include "hsr/tooling.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <thread>

#include "hsr/utf8.h"
#include "json.hpp"

namespace hsr::tooling {

void SynthSpec::validate() const {
  size_t total = 0;
  for (size_t c : counts) total += c;
  if (total == 0) fail(ErrorCode::kInvalidArgument, "synthetic spec needs at least one record");
  double sum = 0;
  for (double m : mixture) {
    if (!(m >= 0.0 && m <= 1.0)) fail(ErrorCode::kInvalidArgument, "mixture weights must be in [0,1]");
    sum += m;
  }
  if (std::abs(sum - 1.0) > 1e-9) fail(ErrorCode::kInvalidArgument, "mixture must sum to 1");
}

std::array<size_t, kNumClasses> class_counts(size_t n, const std::array<double, kNumClasses>& mixture) {
  std::array<size_t, kNumClasses> out{};
  std::array<double, kNumClasses> rem{};
  size_t assigned = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    const double exact = mixture[c] * static_cast<double>(n);
    out[c] = static_cast<size_t>(std::floor(exact));
    rem[c] = exact - std::floor(exact);
    assigned += out[c];
  }
  std::array<int, kNumClasses> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rem[a] > rem[b]; });
  for (size_t k = 0; assigned < n; ++k, ++assigned) ++out[order[k % kNumClasses]];
  return out;
}

namespace {

bool is_devanagari_word(const std::string& w) {
  for (char32_t cp : utf8::decode_all(w)) {
    if (utf8::is_devanagari(cp)) return true;
  }
  return false;
}

struct Bank {
  std::vector<std::string> subjects, predicates, tails;
  std::vector<std::string> abusive_frames;  // '@' marks the abusive word
  std::vector<std::string> hate_frames;     // '@' marks the slur
};

const Bank& bank(Language lang) {
  static const Bank en{
      {"the new cafe", "my neighbour", "this movie", "the weekend match", "our team",
       "the city council", "the weather", "my sister", "the morning train", "this recipe",
       "the concert", "my phone"},
      {"was great today", "looks promising", "made me smile", "needs more practice",
       "opened late again", "is worth a visit", "surprised everyone", "felt calm and quiet",
       "ran on time", "turned out fine", "got an update", "deserves a second look"},
      {"", " honestly", " this morning", " last night", " again", "!", " :)", " for sure"},
      {"what a @", "you are such a @", "@ , nobody asked", "shut up you @", "this @ again"},
      {"those @ do not belong here", "the @ are ruining this place", "send the @ away",
       "@ like them should leave", "get rid of these @"}};
  static const Bank hi{
      {"आज का मौसम", "मेरा दोस्त", "यह फिल्म", "हमारी टीम", "नई किताब", "कल का मैच",
       "मेरी बहन", "यह खाना", "गाँव का मेला", "सुबह की ट्रेन"},
      {"बहुत अच्छा है", "समय पर आई", "सबको पसंद आया", "थोड़ा धीमा था", "फिर से शुरू हुआ",
       "देखने लायक है", "शांत और सुंदर था", "जल्दी खत्म हुआ"},
      {"", " आज", " फिर से", " सच में", "।"},
      {"तू @ है", "@ कहीं का", "चुप कर @", "कितना @ है यह"},
      {"ये @ यहाँ से निकालो", "इन @ को भगाओ", "@ लोग देश पर बोझ हैं", "सारे @ बाहर जाएं"}};
  static const Bank codemix{
      {"yeh movie", "aaj ka match", "mera dost", "hum sab", "kal ka plan", "yeh gaana",
       "meri behen", "apna desh", "woh cafe", "aaj ka din"},
      {"bahut accha tha yaar", "kal phir dekhenge", "sach mein mast hai", "thoda slow tha bhai",
       "sab ko pasand aaya", "abhi shuru hua hai", "kaafi funny tha", "accha laga mujhe"},
      {"", " yaar", " bhai", " lol", " pakka"},
      {"tu @ hai", "@ kahin ka", "chup kar @", "kitna @ hai yeh banda"},
      {"ye @ desh se bahar jao", "in @ ko nikalo yahan se", "@ log sab barbaad kar rahe hain",
       "sab @ ko bhagao"}};
  switch (lang) {
    case Language::kEn:
      return en;
    case Language::kHi:
      return hi;
    case Language::kHiCodemix:
      return codemix;
  }
  return en;
}

struct Planted {
  std::vector<std::string> abusive, slurs;
};

Planted planted_words(Language lang, const LexiconSet& lex) {
  Planted p;
  for (const auto& e : lex.profanity_entries()) {
    if (lang == Language::kEn && e.devanagari.empty()) p.abusive.push_back(e.romanized);
    if (lang == Language::kHiCodemix && !e.devanagari.empty()) p.abusive.push_back(e.romanized);
    if (lang == Language::kHi && !e.devanagari.empty()) p.abusive.push_back(e.devanagari);
  }
  for (const auto& s : lex.slurs()) {
    if ((lang == Language::kHi) == is_devanagari_word(s)) p.slurs.push_back(s);
  }
  // Lexicons without language-specific entries fall back to the whole list.
  if (p.abusive.empty()) {
    for (const auto& e : lex.profanity_entries()) p.abusive.push_back(e.romanized);
  }
  if (p.slurs.empty()) p.slurs = lex.slurs();
  return p;
}

template <typename T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  return v[static_cast<size_t>(rng.below(v.size()))];
}

std::string fill(const std::string& frame, const std::string& word) {
  std::string out = frame;
  const auto at = out.find('@');
  if (at != std::string::npos) out.replace(at, 1, word);
  return out;
}

std::string compose(Label label, const Bank& b, const Planted& p, Rng& rng) {
  const std::string clean = pick(b.subjects, rng) + " " + pick(b.predicates, rng);
  switch (label) {
    case Label::kNeither:
      return clean + pick(b.tails, rng);
    case Label::kAbusive:
      if (rng.below(2) == 0) return clean + ", " + fill(pick(b.abusive_frames, rng), pick(p.abusive, rng));
      return fill(pick(b.abusive_frames, rng), pick(p.abusive, rng)) + pick(b.tails, rng);
    case Label::kHate:
      if (rng.below(3) == 0) return clean + ". " + fill(pick(b.hate_frames, rng), pick(p.slurs, rng));
      return fill(pick(b.hate_frames, rng), pick(p.slurs, rng)) + pick(b.tails, rng);
  }
  return clean;
}

}  // namespace

corpus::Corpus generate_synthetic(const SynthSpec& spec, const LexiconSet& lexicon) {
  spec.validate();
  if (!lexicon.has_annotation_lists() || lexicon.slurs().empty() ||
      lexicon.profanity_entries().empty()) {
    fail(ErrorCode::kFailedPrecondition, "synthetic generation needs slur and profanity lexicons");
  }
  Rng rng(spec.seed);
  corpus::Corpus out;
  for (Language lang : kAllLanguages) {
    const size_t n = spec.counts[index_of(lang)];
    if (n == 0) continue;
    const auto counts = class_counts(n, spec.mixture);
    std::vector<Label> labels;
    for (int c = 0; c < kNumClasses; ++c) labels.insert(labels.end(), counts[c], kAllLabels[c]);
    rng.shuffle(labels);
    const Bank& b = bank(lang);
    const Planted planted = planted_words(lang, lexicon);
    for (Label label : labels) {
      std::string text;
      for (int attempt = 0;; ++attempt) {
        text = compose(label, b, planted, rng);
        if (corpus::weak_label(text, lexicon) == label) break;
        if (attempt == 100) {
          fail(ErrorCode::kInternal, "could not generate a '" + std::string(label_name(label)) +
                                         "' sentence consistent with the lexicons");
        }
      }
      corpus::UnifiedRecord r;
      r.id = static_cast<int64_t>(out.size());
      r.text = std::move(text);
      r.label = label;
      r.language = lang;
      r.source_id = "synth-" + std::string(language_name(lang));
      out.push_back(std::move(r));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Benchmark

void BenchConfig::validate() const {
  if (requests == 0) fail(ErrorCode::kInvalidArgument, "benchmark needs at least one request");
  if (concurrency == 0) fail(ErrorCode::kInvalidArgument, "concurrency must be at least 1");
}

double percentile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) fail(ErrorCode::kInvalidArgument, "percentile of no samples");
  if (!(p > 0.0 && p <= 100.0)) fail(ErrorCode::kInvalidArgument, "percentile must be in (0, 100]");
  const double rank = std::ceil(p / 100.0 * static_cast<double>(sorted.size()));
  const size_t idx = std::min(sorted.size(), static_cast<size_t>(std::max(1.0, rank))) - 1;
  return sorted[idx];
}

BenchReport run_benchmark(const std::vector<std::string>& texts,
                          const std::function<void(const std::string&)>& op,
                          const BenchConfig& config) {
  config.validate();
  if (texts.empty()) fail(ErrorCode::kInvalidArgument, "benchmark needs at least one text");
  Rng rng(config.seed);
  std::vector<size_t> plan(config.requests);
  for (auto& i : plan) i = static_cast<size_t>(rng.below(texts.size()));

  std::vector<double> latencies(config.requests, 0.0);
  std::atomic<size_t> next{0}, failures{0};
  auto worker = [&] {
    for (size_t i = next++; i < plan.size(); i = next++) {
      const auto t0 = std::chrono::steady_clock::now();
      try {
        op(texts[plan[i]]);
      } catch (...) {
        ++failures;
      }
      latencies[i] =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    }
  };
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::thread> threads;
  for (size_t t = 1; t < config.concurrency; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  BenchReport r;
  r.requests = config.requests;
  r.failures = failures;
  r.concurrency = config.concurrency;
  r.seconds = seconds;
  r.throughput_rps = seconds > 0 ? static_cast<double>(config.requests) / seconds : 0.0;
  std::vector<double> sorted = latencies;
  std::sort(sorted.begin(), sorted.end());
  r.p50_ms = percentile(sorted, 50);
  r.p95_ms = percentile(sorted, 95);
  r.p99_ms = percentile(sorted, 99);
  r.max_ms = sorted.back();
  double sum = 0;
  for (double v : sorted) sum += v;
  r.mean_ms = sum / static_cast<double>(sorted.size());
  return r;
}

std::string BenchReport::json() const {
  nlohmann::json j = {{"requests", requests},     {"failures", failures},
                      {"concurrency", concurrency}, {"p50_ms", p50_ms},
                      {"p95_ms", p95_ms},         {"p99_ms", p99_ms},
                      {"mean_ms", mean_ms},       {"max_ms", max_ms},
                      {"seconds", seconds},       {"throughput_rps", throughput_rps}};
  return j.dump(2);
}

std::string BenchReport::text() const {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "requests %zu (failures %zu, concurrency %zu)\n"
                "p50 %.3f ms  p95 %.3f ms  p99 %.3f ms  max %.3f ms\n"
                "throughput %.1f req/s over %.3f s\n",
                requests, failures, concurrency, p50_ms, p95_ms, p99_ms, max_ms, throughput_rps,
                seconds);
  return buf;
}

}  // namespace hsr::tooling
