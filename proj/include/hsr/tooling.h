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

#ifndef HSR_TOOLING_H_
#define HSR_TOOLING_H_

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hsr/common.h"
#include "hsr/corpus.h"
#include "hsr/lexicon.h"

namespace hsr::tooling {

// Mixture is indexed like Label: hate, abusive, neither.
struct SynthSpec {
  std::array<size_t, kNumLanguages> counts{};
  std::array<double, kNumClasses> mixture{1.0 / 3, 1.0 / 3, 1.0 / 3};
  uint64_t seed = 1;

  void validate() const;
};

// Largest-remainder apportionment of n records over the mixture; leftover
// records go to the larger remainders, ties to the earlier class.
std::array<size_t, kNumClasses> class_counts(size_t n, const std::array<double, kNumClasses>& mixture);

// Template sentences with planted lexicon words. Every record's label is the
// weak labeler's verdict on its text. Languages are emitted in en, hi,
// hi_codemix order; labels are shuffled within a language.
corpus::Corpus generate_synthetic(const SynthSpec& spec, const LexiconSet& lexicon);

struct BenchConfig {
  size_t requests = 1000;
  size_t concurrency = 1;
  uint64_t seed = 0;

  void validate() const;
};

struct BenchReport {
  size_t requests = 0;
  size_t failures = 0;
  size_t concurrency = 1;
  double p50_ms = 0, p95_ms = 0, p99_ms = 0;
  double mean_ms = 0, max_ms = 0;
  double seconds = 0;
  double throughput_rps = 0;

  std::string json() const;
  std::string text() const;
};

// Nearest-rank percentile of ascending samples, p in (0, 100].
double percentile(const std::vector<double>& sorted, double p);

// Issues `requests` calls of op over texts drawn deterministically from the
// seed. A call that throws counts as a failure; its latency still counts.
BenchReport run_benchmark(const std::vector<std::string>& texts,
                          const std::function<void(const std::string&)>& op,
                          const BenchConfig& config);

}  // namespace hsr::tooling

#endif  // HSR_TOOLING_H_
