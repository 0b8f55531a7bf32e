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

#ifndef HSR_UTF8_H_
#define HSR_UTF8_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace hsr::utf8 {

// Decodes one code point starting at text[pos] and advances pos. Invalid
// bytes decode as U+FFFD and consume a single byte.
char32_t decode(std::string_view text, size_t& pos);

std::vector<char32_t> decode_all(std::string_view text);
void append(std::string& out, char32_t cp);
std::string encode(const std::vector<char32_t>& cps);

size_t length(std::string_view text);

inline bool is_devanagari(char32_t cp) { return cp >= 0x0900 && cp <= 0x097F; }
inline bool is_danda(char32_t cp) { return cp == 0x0964 || cp == 0x0965; }
inline bool is_ascii_letter(char32_t cp) {
  return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
}
inline bool is_ascii_digit(char32_t cp) { return cp >= '0' && cp <= '9'; }
bool is_space(char32_t cp);

// Letters for script statistics: ASCII/Latin-1 letters and the Devanagari
// block excluding danda, digits and abbreviation signs.
bool is_letter(char32_t cp);
bool is_devanagari_letter(char32_t cp);

// ASCII punctuation plus danda, the Devanagari abbreviation sign and common
// typographic quotes/dashes.
bool is_punct(char32_t cp);

std::vector<std::string> split_whitespace(std::string_view text);

}  // namespace hsr::utf8

#endif  // HSR_UTF8_H_
