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

#ifndef HSR_TESTS_TEST_UTIL_H_
#define HSR_TESTS_TEST_UTIL_H_

#include <filesystem>
#include <memory>
#include <random>
#include <string>

#include "hsr/lexicon.h"

namespace hsr::testing {

inline const LexiconSet& bundled_lexicons() {
  static const LexiconSet lex = LexiconSet::load(LexiconSet::default_dir());
  return lex;
}

inline std::shared_ptr<const LexiconSet> shared_lexicons() {
  static const auto lex = std::make_shared<const LexiconSet>(bundled_lexicons());
  return lex;
}

inline std::filesystem::path test_data(const std::string& name) {
  return std::filesystem::path(HSR_TEST_DATA_DIR) / name;
}

// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("hsr-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace hsr::testing

#endif  // HSR_TESTS_TEST_UTIL_H_
