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

#include "hsr/service.h"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "hsr/corpus.h"
#include "hsr/tooling.h"
#include "hsr/utf8.h"
#include "json.hpp"

namespace hsr::service {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void validate_text(std::string_view text) {
  if (trim(text).empty()) fail(ErrorCode::kInvalidArgument, "text must not be empty");
  size_t chars = 0;
  try {
    chars = utf8::length(text);
  } catch (const Error&) {
    fail(ErrorCode::kInvalidArgument, "text must be valid UTF-8");
  }
  if (chars > kMaxTextChars) {
    fail(ErrorCode::kInvalidArgument,
         "text has " + std::to_string(chars) + " characters; the limit is " +
             std::to_string(kMaxTextChars));
  }
}

}  // namespace

std::array<double, kNumClasses> page_percentages(const std::array<size_t, kNumClasses>& counts) {
  size_t total = 0;
  for (size_t c : counts) total += c;
  if (total == 0) fail(ErrorCode::kInvalidArgument, "page has no comments");
  std::array<double, kNumClasses> out{};
  for (int c = 0; c < kNumClasses; ++c) {
    out[c] = 100.0 * static_cast<double>(counts[c]) / static_cast<double>(total);
  }
  return out;
}

Service::Service(std::shared_ptr<const LexiconSet> lexicon, std::shared_ptr<hub::Hub> hub,
                 langid::LangIdConfig langid)
    : lexicon_(std::move(lexicon)), hub_(std::move(hub)), langid_(langid) {
  langid_.validate();
}

ScoreResult Service::score(std::string_view text, std::optional<Language> language, bool record) {
  const auto start = std::chrono::steady_clock::now();
  validate_text(text);
  ScoreResult r;
  if (language) {
    r.language = *language;
  } else {
    r.language = langid::detect(text, *lexicon_, langid_).language;
    r.language_detected = true;
  }
  auto model = hub_->registry().current(r.language);
  if (!model) {
    fail(ErrorCode::kUnavailable,
         "no model is serving language " + std::string(language_name(r.language)));
  }
  r.probs = model->score(text);
  r.label = linear::argmax_severity(r.probs);
  r.model_version = model->version();
  if (record) {
    r.feedback_id = hub_->store().record(text, r.language, r.probs, r.model_version);
    r.queued = hub_->store().get(*r.feedback_id)->queued;
  }
  r.latency_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

PageScore Service::score_page(const std::vector<std::string>& comments, bool record) {
  if (comments.empty()) fail(ErrorCode::kInvalidArgument, "page must contain at least one comment");
  if (comments.size() > kMaxPageComments) {
    fail(ErrorCode::kInvalidArgument,
         "page has " + std::to_string(comments.size()) + " comments; the limit is " +
             std::to_string(kMaxPageComments));
  }
  // Validate everything first so a bad comment records nothing.
  for (const auto& c : comments) validate_text(c);
  PageScore page;
  page.total = comments.size();
  for (const auto& c : comments) {
    page.results.push_back(score(c, std::nullopt, record));
    ++page.counts[index_of(page.results.back().label)];
  }
  page.percentages = page_percentages(page.counts);
  return page;
}

CheckResult Service::check(std::string_view text, std::optional<Language> language, bool record) {
  CheckResult c;
  c.score = score(text, language, record);
  c.allow = c.score.label == Label::kNeither;
  return c;
}

hub::FeedbackRecord Service::resolve(int64_t id, const hub::Verdict& verdict) {
  return hub_->store().resolve(id, verdict);
}

std::vector<hub::FeedbackRecord> Service::review(std::optional<Language> language, size_t limit) {
  if (limit == 0 || limit > 1000) fail(ErrorCode::kInvalidArgument, "limit must be in [1, 1000]");
  return hub_->store().review_queue(language, limit);
}

hub::RetrainOutcome Service::retrain(Language language) { return hub_->retrain(language); }

// ---------------------------------------------------------------------------
// Configuration

std::pair<std::string, int> parse_listen(std::string_view listen) {
  const auto colon = listen.rfind(':');
  if (colon == std::string_view::npos) {
    fail(ErrorCode::kInvalidArgument, "listen address must be host:port");
  }
  std::string host(listen.substr(0, colon));
  if (host.empty()) host = "127.0.0.1";
  long long port = 0;
  try {
    port = parse_int(listen.substr(colon + 1));
  } catch (const Error&) {
    fail(ErrorCode::kInvalidArgument, "bad port in listen address '" + std::string(listen) + "'");
  }
  if (port < 0 || port > 65535) fail(ErrorCode::kInvalidArgument, "port out of range");
  return {host, static_cast<int>(port)};
}

void ServiceConfig::validate() const {
  if (port < 0 || port > 65535) fail(ErrorCode::kInvalidArgument, "port out of range");
  if (threads == 0) fail(ErrorCode::kInvalidArgument, "threads must be at least 1");
  if (model_kind != "linear" && model_kind != "neural") {
    fail(ErrorCode::kInvalidArgument, "model_kind must be linear or neural");
  }
  policy.validate();
  langid.validate();
}

fs::path ServiceConfig::feedback_path() const {
  return feedback_log.empty() ? data_dir / "feedback.jsonl" : feedback_log;
}

fs::path ServiceConfig::models_path() const {
  return model_dir.empty() ? data_dir / "models" : model_dir;
}

ServiceConfig ServiceConfig::from_json_text(std::string_view text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, std::string("config: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::kParse, "config must be a JSON object");
  static const std::set<std::string> known = {
      "listen", "data_dir", "feedback_log", "model_dir", "base_corpus", "synth_per_language",
      "lexicon_dir", "review_threshold", "min_pool", "max_class_share", "model_kind",
      "devanagari_threshold", "codemix_threshold", "threads", "durable"};
  for (auto& [key, value] : j.items()) {
    if (!known.count(key)) fail(ErrorCode::kParse, "config: unknown key '" + key + "'");
  }
  ServiceConfig c;
  auto path_of = [&](const char* key, fs::path& out) {
    if (!j.contains(key)) return;
    fs::path p = j.at(key).get<std::string>();
    out = p.is_relative() ? base_dir / p : p;
  };
  try {
    if (j.contains("listen")) std::tie(c.host, c.port) = parse_listen(j.at("listen").get<std::string>());
    path_of("data_dir", c.data_dir);
    path_of("feedback_log", c.feedback_log);
    path_of("model_dir", c.model_dir);
    path_of("base_corpus", c.base_corpus);
    path_of("lexicon_dir", c.lexicon_dir);
    if (!j.contains("data_dir")) c.data_dir = base_dir / c.data_dir;
    c.synth_per_language = j.value("synth_per_language", c.synth_per_language);
    c.policy.review_threshold = j.value("review_threshold", c.policy.review_threshold);
    c.policy.min_pool = j.value("min_pool", c.policy.min_pool);
    c.policy.max_class_share = j.value("max_class_share", c.policy.max_class_share);
    c.model_kind = j.value("model_kind", c.model_kind);
    c.langid.devanagari_threshold = j.value("devanagari_threshold", c.langid.devanagari_threshold);
    c.langid.codemix_threshold = j.value("codemix_threshold", c.langid.codemix_threshold);
    c.threads = j.value("threads", c.threads);
    c.durable = j.value("durable", c.durable);
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ServiceConfig ServiceConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kNotFound, "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str(), path.has_parent_path() ? path.parent_path() : fs::path("."));
}

void ServiceConfig::apply_env() {
  if (const char* listen = std::getenv("HSR_LISTEN"); listen && *listen) {
    std::tie(host, port) = parse_listen(listen);
  }
}

std::unique_ptr<Service> build_service(const ServiceConfig& config) {
  config.validate();
  auto lexicon = std::make_shared<const LexiconSet>(
      LexiconSet::load(config.lexicon_dir.empty() ? LexiconSet::default_dir() : config.lexicon_dir));
  corpus::Corpus base;
  if (!config.base_corpus.empty()) {
    base = corpus::read_tsv(config.base_corpus);
  } else if (config.synth_per_language > 0) {
    tooling::SynthSpec spec;
    spec.counts.fill(config.synth_per_language);
    base = tooling::generate_synthetic(spec, *lexicon);
  }
  auto store = std::make_shared<hub::FeedbackStore>(config.feedback_path(),
                                                    config.policy.review_threshold, config.durable);
  auto registry = std::make_shared<hub::ModelRegistry>(config.models_path(), lexicon);
  hub::HubConfig hc;
  hc.policy = config.policy;
  hc.model_kind = config.model_kind;
  auto hub = std::make_shared<hub::Hub>(store, registry, lexicon, std::move(base), hc);
  for (Language l : kAllLanguages) hub->bootstrap(l);
  return std::make_unique<Service>(lexicon, hub, config.langid);
}

}  // namespace hsr::service
