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

#ifndef HSR_COMMON_H_
#define HSR_COMMON_H_

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hsr {

// Unified three-class taxonomy. The numeric order is also the severity
// order used for tie-breaking: lower index wins.
enum class Label : int { kHate = 0, kAbusive = 1, kNeither = 2 };

inline constexpr int kNumClasses = 3;
inline constexpr std::array<Label, kNumClasses> kAllLabels = {
    Label::kHate, Label::kAbusive, Label::kNeither};

enum class Language : int { kEn = 0, kHi = 1, kHiCodemix = 2 };

inline constexpr int kNumLanguages = 3;
inline constexpr std::array<Language, kNumLanguages> kAllLanguages = {
    Language::kEn, Language::kHi, Language::kHiCodemix};

std::string_view label_name(Label label);
std::optional<Label> parse_label(std::string_view name);
std::string_view language_name(Language language);
std::optional<Language> parse_language(std::string_view name);

inline int index_of(Label label) { return static_cast<int>(label); }
inline int index_of(Language language) { return static_cast<int>(language); }

enum class ErrorCode {
  kInvalidArgument,
  kNotFound,
  kAlreadyExists,
  kFailedPrecondition,
  kParse,
  kIo,
  kUnavailable,
  kInternal,
};

std::string_view error_code_name(ErrorCode code);

// All library failures are reported with this exception type. The code is
// what the service maps onto its error envelope.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

// SplitMix64-seeded xoshiro256** generator. Used instead of <random>
// distributions so that shuffles and samples are identical on every
// standard library.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t next();
  // Uniform integer in [0, bound). bound must be positive.
  uint64_t below(uint64_t bound);
  // Uniform double in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  template <typename Container>
  void shuffle(Container& items) {
    for (size_t i = items.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  std::array<uint64_t, 4> state_;
};

std::string trim(std::string_view text);
std::string ascii_lower(std::string_view text);

// Formats a double so that parsing it back yields the identical value.
std::string format_double(double value);
double parse_double(std::string_view text);
long long parse_int(std::string_view text);

}  // namespace hsr

#endif  // HSR_COMMON_H_
