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

#ifndef HSR_SERVICE_H_
#define HSR_SERVICE_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hsr/common.h"
#include "hsr/hub.h"
#include "hsr/langid.h"
#include "hsr/lexicon.h"

namespace hsr::service {

inline constexpr size_t kMaxTextChars = 10000;
inline constexpr size_t kMaxPageComments = 1000;

struct ScoreResult {
  Label label = Label::kNeither;
  hub::Probs probs{};
  Language language = Language::kEn;
  bool language_detected = false;
  int model_version = 0;
  double latency_ms = 0.0;
  std::optional<int64_t> feedback_id;
  bool queued = false;
};

struct PageScore {
  std::array<size_t, kNumClasses> counts{};
  // 100 * count / total, indexed like Label.
  std::array<double, kNumClasses> percentages{};
  size_t total = 0;
  std::vector<ScoreResult> results;
};

struct CheckResult {
  bool allow = false;
  ScoreResult score;
};

// Transport-independent API core. All methods are safe to call
// concurrently.
class Service {
 public:
  Service(std::shared_ptr<const LexiconSet> lexicon, std::shared_ptr<hub::Hub> hub,
          langid::LangIdConfig langid = {});

  // Validates, routes (unless a language is given), scores with the serving
  // model and, when record is set, appends the result to the feedback log.
  ScoreResult score(std::string_view text, std::optional<Language> language = std::nullopt,
                    bool record = true);
  PageScore score_page(const std::vector<std::string>& comments, bool record = true);
  // Submission is allowed only for neither-class text.
  CheckResult check(std::string_view text, std::optional<Language> language = std::nullopt,
                    bool record = true);

  hub::FeedbackRecord resolve(int64_t id, const hub::Verdict& verdict);
  std::vector<hub::FeedbackRecord> review(std::optional<Language> language, size_t limit);
  hub::RetrainOutcome retrain(Language language);

  hub::Hub& hub() { return *hub_; }
  const LexiconSet& lexicon() const { return *lexicon_; }

 private:
  std::shared_ptr<const LexiconSet> lexicon_;
  std::shared_ptr<hub::Hub> hub_;
  langid::LangIdConfig langid_;
};

// Percentages from class counts; an empty page is an error.
std::array<double, kNumClasses> page_percentages(const std::array<size_t, kNumClasses>& counts);

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path data_dir = "hsr-data";
  // Defaults derive from data_dir when empty.
  std::filesystem::path feedback_log;
  std::filesystem::path model_dir;
  // Unified TSV corpus used for bootstrap and retrain. When empty a
  // synthetic corpus of synth_per_language records per language is used.
  std::filesystem::path base_corpus;
  size_t synth_per_language = 600;
  std::filesystem::path lexicon_dir;
  hub::RetrainPolicy policy;
  std::string model_kind = "linear";
  langid::LangIdConfig langid;
  size_t threads = 8;
  bool durable = true;

  void validate() const;
  std::filesystem::path feedback_path() const;
  std::filesystem::path models_path() const;

  // JSON config file; relative paths resolve against its directory.
  static ServiceConfig load(const std::filesystem::path& path);
  static ServiceConfig from_json_text(std::string_view text,
                                      const std::filesystem::path& base_dir = ".");
  // HSR_LISTEN=host:port overrides the listen address.
  void apply_env();
};

// "host:port" or ":port".
std::pair<std::string, int> parse_listen(std::string_view listen);

// Loads lexicons, opens the feedback log and registry, and bootstraps a
// model for every language that has base data but no published version.
std::unique_ptr<Service> build_service(const ServiceConfig& config);

// HTTP transport for /api/v1.
class HttpServer {
 public:
  HttpServer(Service& service, size_t threads = 8);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  // Serves until stop(); call after bind().
  void run();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace hsr::service

#endif  // HSR_SERVICE_H_
