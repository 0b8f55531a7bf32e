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

#include "hsr/hub.h"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace hsr::hub {

using nlohmann::json;
namespace fs = std::filesystem;

int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::string_view verdict_name(VerdictKind kind) {
  switch (kind) {
    case VerdictKind::kUnreviewed:
      return "unreviewed";
    case VerdictKind::kConfirmed:
      return "confirmed";
    case VerdictKind::kRelabeled:
      return "relabeled";
  }
  return "unreviewed";
}

namespace {

VerdictKind parse_verdict(const std::string& s) {
  if (s == "unreviewed") return VerdictKind::kUnreviewed;
  if (s == "confirmed") return VerdictKind::kConfirmed;
  if (s == "relabeled") return VerdictKind::kRelabeled;
  fail(ErrorCode::kParse, "unknown verdict '" + s + "'");
}

Label label_from(const json& j) {
  auto l = parse_label(j.get<std::string>());
  if (!l) fail(ErrorCode::kParse, "unknown label " + j.dump());
  return *l;
}

Language language_from(const json& j) {
  auto l = parse_language(j.get<std::string>());
  if (!l) fail(ErrorCode::kParse, "unknown language " + j.dump());
  return *l;
}

json record_json(const FeedbackRecord& r, bool with_verdict) {
  json j = {{"type", "record"},
            {"id", r.id},
            {"text", r.text},
            {"language", language_name(r.language)},
            {"predicted", label_name(r.predicted)},
            {"probs", r.probs},
            {"confidence", r.confidence},
            {"queued", r.queued},
            {"model_version", r.model_version},
            {"ts", r.timestamp_ms}};
  if (with_verdict && r.verdict.kind != VerdictKind::kUnreviewed) {
    j["verdict"] = verdict_name(r.verdict.kind);
    j["label"] = label_name(r.verdict.label);
    j["resolved_ts"] = r.resolved_ms;
  }
  return j;
}

void write_file_atomically(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd < 0) fail(ErrorCode::kIo, "cannot write " + tmp.string() + ": " + std::strerror(errno));
    size_t off = 0;
    while (off < content.size()) {
      ssize_t n = ::write(fd, content.data() + off, content.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        ::close(fd);
        fail(ErrorCode::kIo, "write failed: " + tmp.string());
      }
      off += static_cast<size_t>(n);
    }
    ::fsync(fd);
    ::close(fd);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::kIo, "cannot replace " + path.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kNotFound, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// FeedbackStore

FeedbackStore::FeedbackStore(fs::path path, double review_threshold, bool durable)
    : path_(std::move(path)), threshold_(review_threshold), durable_(durable) {
  if (!(review_threshold > 1.0 / 3.0 && review_threshold <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "review threshold must be in (1/3, 1]");
  }
  if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
  load();
  open_for_append();
}

FeedbackStore::~FeedbackStore() {
  if (fd_ >= 0) ::close(fd_);
}

void FeedbackStore::open_for_append() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = ::open(path_.c_str(), O_WRONLY | O_APPEND | O_CREAT, 0644);
  if (fd_ < 0) fail(ErrorCode::kIo, "cannot open " + path_.string() + ": " + std::strerror(errno));
}

void FeedbackStore::load() {
  records_.clear();
  index_.clear();
  next_id_ = 1;
  if (!fs::exists(path_)) return;
  const std::string data = read_file(path_);
  size_t pos = 0, line_no = 0;
  while (pos < data.size()) {
    size_t end = data.find('\n', pos);
    const bool torn = end == std::string::npos;
    std::string line = data.substr(pos, torn ? std::string::npos : end - pos);
    ++line_no;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      if (torn) {
        // A crash mid-append leaves an unterminated tail; drop it.
        fs::resize_file(path_, pos);
        break;
      }
      fail(ErrorCode::kParse, path_.string() + ":" + std::to_string(line_no) + ": malformed line");
    }
    try {
      const std::string type = j.at("type").get<std::string>();
      if (type == "record") {
        FeedbackRecord r;
        r.id = j.at("id").get<int64_t>();
        r.text = j.at("text").get<std::string>();
        r.language = language_from(j.at("language"));
        r.predicted = label_from(j.at("predicted"));
        r.probs = j.at("probs").get<Probs>();
        r.confidence = j.at("confidence").get<double>();
        r.queued = j.at("queued").get<bool>();
        r.model_version = j.at("model_version").get<int>();
        r.timestamp_ms = j.at("ts").get<int64_t>();
        if (j.contains("verdict")) {
          r.verdict.kind = parse_verdict(j.at("verdict").get<std::string>());
          r.verdict.label = label_from(j.at("label"));
          r.resolved_ms = j.at("resolved_ts").get<int64_t>();
        }
        if (index_.count(r.id)) fail(ErrorCode::kParse, "duplicate record id " + std::to_string(r.id));
        index_[r.id] = records_.size();
        next_id_ = std::max(next_id_, r.id + 1);
        records_.push_back(std::move(r));
      } else if (type == "verdict") {
        auto it = index_.find(j.at("id").get<int64_t>());
        if (it == index_.end()) fail(ErrorCode::kParse, "verdict for unknown id");
        auto& r = records_[it->second];
        r.verdict.kind = parse_verdict(j.at("verdict").get<std::string>());
        r.verdict.label = label_from(j.at("label"));
        r.resolved_ms = j.at("ts").get<int64_t>();
      } else {
        fail(ErrorCode::kParse, "unknown entry type '" + type + "'");
      }
    } catch (const json::exception& e) {
      fail(ErrorCode::kParse, path_.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      fail(ErrorCode::kParse, path_.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (torn) break;
    pos = end + 1;
  }
}

void FeedbackStore::append_line(const std::string& line) {
  const std::string buf = line + "\n";
  size_t off = 0;
  while (off < buf.size()) {
    ssize_t n = ::write(fd_, buf.data() + off, buf.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail(ErrorCode::kIo, "feedback append failed: " + std::string(std::strerror(errno)));
    }
    off += static_cast<size_t>(n);
  }
  if (durable_ && ::fdatasync(fd_) != 0) {
    fail(ErrorCode::kIo, "feedback sync failed: " + std::string(std::strerror(errno)));
  }
}

int64_t FeedbackStore::record(std::string_view text, Language language, const Probs& probs,
                              int model_version) {
  double sum = 0;
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::kInvalidArgument, "probabilities must be in [0,1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) fail(ErrorCode::kInvalidArgument, "probabilities must sum to 1");
  FeedbackRecord r;
  r.text = std::string(text);
  r.language = language;
  r.probs = probs;
  r.predicted = linear::argmax_severity(probs);
  r.confidence = *std::max_element(probs.begin(), probs.end());
  r.queued = r.confidence < threshold_;
  r.model_version = model_version;
  r.timestamp_ms = now_ms();
  std::lock_guard lock(mu_);
  r.id = next_id_;
  append_line(record_json(r, false).dump());
  ++next_id_;
  index_[r.id] = records_.size();
  records_.push_back(std::move(r));
  return records_.back().id;
}

std::optional<FeedbackRecord> FeedbackStore::get(int64_t id) const {
  std::lock_guard lock(mu_);
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return records_[it->second];
}

std::vector<FeedbackRecord> FeedbackStore::review_queue(std::optional<Language> language,
                                                        size_t limit) const {
  std::lock_guard lock(mu_);
  std::vector<FeedbackRecord> out;
  for (const auto& r : records_) {
    if (out.size() >= limit) break;
    if (!r.queued || r.verdict.kind != VerdictKind::kUnreviewed) continue;
    if (language && r.language != *language) continue;
    out.push_back(r);
  }
  return out;
}

FeedbackRecord FeedbackStore::resolve(int64_t id, const Verdict& verdict) {
  if (verdict.kind == VerdictKind::kUnreviewed) {
    fail(ErrorCode::kInvalidArgument, "verdict must be confirmed or relabeled");
  }
  std::lock_guard lock(mu_);
  auto it = index_.find(id);
  if (it == index_.end()) fail(ErrorCode::kNotFound, "no feedback record " + std::to_string(id));
  FeedbackRecord& r = records_[it->second];
  if (r.verdict.kind != VerdictKind::kUnreviewed) {
    fail(ErrorCode::kFailedPrecondition, "feedback record " + std::to_string(id) + " is already resolved");
  }
  Verdict v = verdict;
  if (v.kind == VerdictKind::kConfirmed) v.label = r.predicted;
  const int64_t ts = now_ms();
  append_line(json{{"type", "verdict"},
                   {"id", id},
                   {"verdict", verdict_name(v.kind)},
                   {"label", label_name(v.label)},
                   {"ts", ts}}
                  .dump());
  r.verdict = v;
  r.resolved_ms = ts;
  return r;
}

std::vector<FeedbackRecord> FeedbackStore::training_pool(Language language) const {
  std::lock_guard lock(mu_);
  std::vector<FeedbackRecord> out;
  for (const auto& r : records_) {
    if (r.language == language && r.verdict.kind != VerdictKind::kUnreviewed) out.push_back(r);
  }
  return out;
}

std::vector<FeedbackRecord> FeedbackStore::all() const {
  std::lock_guard lock(mu_);
  return records_;
}

size_t FeedbackStore::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

void FeedbackStore::compact() {
  std::lock_guard lock(mu_);
  std::string content;
  for (const auto& r : records_) content += record_json(r, true).dump() + "\n";
  write_file_atomically(path_, content);
  open_for_append();
}

// ---------------------------------------------------------------------------
// Serving models and bundles

std::vector<std::string> model_tokens(std::string_view text, Language language,
                                      const LexiconSet& lexicon, const textnorm::NormConfig& norm) {
  return textnorm::surfaces(textnorm::pipeline(text, language, lexicon, norm));
}

namespace {

class LinearServingModel final : public ServingModel {
 public:
  LinearServingModel(Language language, int version, LinearArtifacts a,
                     std::shared_ptr<const LexiconSet> lexicon)
      : ServingModel(language, version),
        featurizer_(std::move(a.vocab), a.use_aux),
        model_(std::move(a.model)),
        lexicon_(std::move(lexicon)) {
    if (featurizer_.dimension() != model_.dim()) {
      fail(ErrorCode::kParse, "model dimension does not match its vocabulary");
    }
  }

  Probs score(std::string_view text) const override {
    auto tokens = model_tokens(text, language(), *lexicon_);
    auto fv = featurizer_(tokens, *lexicon_);
    return model_.predict_proba(linear::flatten(fv, featurizer_.vocabulary().size()));
  }
  std::string kind() const override { return "linear"; }

 private:
  features::Featurizer featurizer_;
  linear::LogRegModel model_;
  std::shared_ptr<const LexiconSet> lexicon_;
};

class NeuralServingModel final : public ServingModel {
 public:
  NeuralServingModel(Language language, int version, NeuralArtifacts a,
                     std::shared_ptr<const LexiconSet> lexicon)
      : ServingModel(language, version),
        tokens_(std::move(a.tokens)),
        net_(std::move(a.net)),
        lexicon_(std::move(lexicon)) {}

  Probs score(std::string_view text) const override {
    auto ids = tokens_.encode(model_tokens(text, language(), *lexicon_), net_.config().seq_len);
    std::lock_guard lock(mu_);
    auto p = net_.predict_proba(ids);
    if (net_.config().activation == neural::Activation::kSigmoid) {
      double s = p[0] + p[1] + p[2];
      for (auto& v : p) v /= s;
    }
    return p;
  }
  std::string kind() const override { return "neural"; }

 private:
  neural::TokenIndex tokens_;
  mutable neural::Net net_;
  mutable std::mutex mu_;
  std::shared_ptr<const LexiconSet> lexicon_;
};

}  // namespace

void save_bundle(const ModelArtifacts& a, const fs::path& dir) {
  fs::create_directories(dir);
  json meta = {{"kind", a.kind}, {"train_records", a.train_records}};
  if (a.kind == "linear") {
    if (!a.linear) fail(ErrorCode::kInvalidArgument, "linear bundle without artifacts");
    meta["use_aux"] = a.linear->use_aux;
    a.linear->vocab.save(dir / "vocab.tsv");
    a.linear->model.save(dir / "model.txt");
  } else if (a.kind == "neural") {
    if (!a.neural) fail(ErrorCode::kInvalidArgument, "neural bundle without artifacts");
    std::ofstream tok(dir / "tokens.txt", std::ios::binary);
    a.neural->tokens.save(tok);
    if (!tok) fail(ErrorCode::kIo, "cannot write token index");
    a.neural->net.save(dir / "net.txt");
  } else {
    fail(ErrorCode::kInvalidArgument, "unknown model kind '" + a.kind + "'");
  }
  write_file_atomically(dir / "meta.json", meta.dump(2) + "\n");
}

std::shared_ptr<const ServingModel> load_bundle(const fs::path& dir, Language language, int version,
                                                std::shared_ptr<const LexiconSet> lexicon) {
  json meta;
  try {
    meta = json::parse(read_file(dir / "meta.json"));
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, (dir / "meta.json").string() + ": " + e.what());
  }
  const std::string kind = meta.value("kind", "");
  if (kind == "linear") {
    LinearArtifacts a{features::Vocabulary::load(dir / "vocab.tsv"), meta.value("use_aux", true),
                      linear::LogRegModel::load(dir / "model.txt")};
    return std::make_shared<LinearServingModel>(language, version, std::move(a), std::move(lexicon));
  }
  if (kind == "neural") {
    std::ifstream tok(dir / "tokens.txt", std::ios::binary);
    if (!tok) fail(ErrorCode::kNotFound, "missing token index in " + dir.string());
    NeuralArtifacts a{neural::TokenIndex::load(tok), neural::Net::load(dir / "net.txt")};
    return std::make_shared<NeuralServingModel>(language, version, std::move(a), std::move(lexicon));
  }
  fail(ErrorCode::kParse, dir.string() + ": unknown model kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// ModelRegistry

ModelRegistry::ModelRegistry(fs::path root, std::shared_ptr<const LexiconSet> lexicon)
    : root_(std::move(root)), lexicon_(std::move(lexicon)) {
  fs::create_directories(root_);
  const fs::path manifest = root_ / "manifest.json";
  if (!fs::exists(manifest)) return;
  json j;
  try {
    j = json::parse(read_file(manifest));
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, manifest.string() + ": " + e.what());
  }
  for (auto& [name, entry] : j.at("languages").items()) {
    auto lang = parse_language(name);
    if (!lang) fail(ErrorCode::kParse, "manifest names unknown language " + name);
    const int idx = index_of(*lang);
    for (const auto& v : entry.at("history")) {
      history_[idx].push_back({v.at("version").get<int>(), v.at("path").get<std::string>(),
                               v.at("kind").get<std::string>(), v.at("created_ms").get<int64_t>(),
                               v.at("train_records").get<size_t>()});
    }
    const int current = entry.at("current").get<int>();
    for (const auto& v : history_[idx]) {
      if (v.version == current) current_[idx] = load_bundle(root_ / v.path, *lang, current, lexicon_);
    }
  }
}

std::shared_ptr<const ServingModel> ModelRegistry::current(Language language) const {
  std::lock_guard lock(mu_);
  return current_[index_of(language)];
}

int ModelRegistry::current_version(Language language) const {
  auto m = current(language);
  return m ? m->version() : 0;
}

std::vector<VersionInfo> ModelRegistry::history(Language language) const {
  std::lock_guard lock(mu_);
  return history_[index_of(language)];
}

void ModelRegistry::write_manifest() const {
  json langs = json::object();
  for (Language l : kAllLanguages) {
    const int idx = index_of(l);
    if (history_[idx].empty()) continue;
    json hist = json::array();
    for (const auto& v : history_[idx]) {
      hist.push_back({{"version", v.version},
                      {"path", v.path},
                      {"kind", v.kind},
                      {"created_ms", v.created_ms},
                      {"train_records", v.train_records}});
    }
    langs[std::string(language_name(l))] = {{"current", history_[idx].back().version},
                                            {"history", hist}};
  }
  write_file_atomically(root_ / "manifest.json", json{{"languages", langs}}.dump(2) + "\n");
}

int ModelRegistry::publish(Language language, const ModelArtifacts& artifacts) {
  std::lock_guard publish_lock(publish_mu_);
  const int idx = index_of(language);
  int version;
  {
    std::lock_guard lock(mu_);
    version = history_[idx].empty() ? 1 : history_[idx].back().version + 1;
  }
  const std::string lang(language_name(language));
  const std::string rel = lang + "/v" + std::to_string(version);
  const fs::path dir = root_ / rel;
  const fs::path staging = root_ / lang / (".v" + std::to_string(version) + ".staging");
  fs::remove_all(staging);
  if (fs::exists(dir)) fs::remove_all(dir);  // leftover of an unpublished attempt
  save_bundle(artifacts, staging);
  fs::rename(staging, dir);
  auto model = load_bundle(dir, language, version, lexicon_);

  std::lock_guard lock(mu_);
  history_[idx].push_back({version, rel, artifacts.kind, now_ms(), artifacts.train_records});
  try {
    write_manifest();
  } catch (...) {
    history_[idx].pop_back();
    throw;
  }
  current_[idx] = std::move(model);
  return version;
}

// ---------------------------------------------------------------------------
// Training recipes

ModelArtifacts train_linear(const std::vector<LabeledText>& data, Language language,
                            const LexiconSet& lexicon, const LinearRecipe& recipe) {
  if (data.empty()) fail(ErrorCode::kInvalidArgument, "no training data");
  std::vector<features::Document> docs;
  docs.reserve(data.size());
  for (const auto& [text, label] : data) docs.push_back(model_tokens(text, language, lexicon));
  auto vocab = features::Vocabulary::fit(docs, recipe.vocab);
  features::Featurizer featurizer(vocab, recipe.use_aux);
  linear::Dataset ds;
  ds.dim = featurizer.dimension();
  for (size_t i = 0; i < docs.size(); ++i) {
    ds.x.push_back(linear::flatten(featurizer(docs[i], lexicon), vocab.size()));
    ds.y.push_back(data[i].second);
  }
  linear::Hyper hyper = recipe.hyper;
  hyper.max_iter = recipe.max_iter > 0 ? recipe.max_iter : linear::default_max_iter(language);
  auto result = linear::train(ds, hyper);
  ModelArtifacts a;
  a.kind = "linear";
  a.linear = LinearArtifacts{std::move(vocab), recipe.use_aux, std::move(result.model)};
  a.train_records = data.size();
  return a;
}

ModelArtifacts train_neural(const std::vector<LabeledText>& data, Language language,
                            const LexiconSet& lexicon, const NeuralRecipe& recipe) {
  if (data.empty()) fail(ErrorCode::kInvalidArgument, "no training data");
  std::vector<std::vector<std::string>> docs;
  for (const auto& [text, label] : data) docs.push_back(model_tokens(text, language, lexicon));
  auto index = neural::TokenIndex::build(docs, recipe.max_tokens);
  neural::NetConfig config = recipe.net;
  config.vocab_size = index.size();
  std::vector<neural::Sample> samples;
  for (size_t i = 0; i < docs.size(); ++i) {
    samples.push_back({index.encode(docs[i], config.seq_len), data[i].second});
  }
  auto hyper = recipe.hyper ? *recipe.hyper : neural::default_hyper(language);
  auto result = neural::train(config, hyper, samples);
  ModelArtifacts a;
  a.kind = "neural";
  a.neural = NeuralArtifacts{std::move(index), std::move(result.net)};
  a.train_records = data.size();
  return a;
}

// ---------------------------------------------------------------------------
// Hub

void RetrainPolicy::validate() const {
  if (!(review_threshold > 1.0 / 3.0 && review_threshold <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "review threshold must be in (1/3, 1]");
  }
  if (min_pool < 1) fail(ErrorCode::kInvalidArgument, "minimum pool must be at least 1");
  if (!(max_class_share > 0.0 && max_class_share <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "max class share must be in (0, 1]");
  }
}

Hub::Hub(std::shared_ptr<FeedbackStore> store, std::shared_ptr<ModelRegistry> registry,
         std::shared_ptr<const LexiconSet> lexicon, corpus::Corpus base, HubConfig config)
    : store_(std::move(store)),
      registry_(std::move(registry)),
      lexicon_(std::move(lexicon)),
      base_(std::move(base)),
      config_(std::move(config)) {
  config_.policy.validate();
  if (config_.model_kind != "linear" && config_.model_kind != "neural") {
    fail(ErrorCode::kInvalidArgument, "model kind must be linear or neural");
  }
}

std::vector<LabeledText> Hub::base_for(Language language) const {
  std::vector<LabeledText> out;
  for (const auto& r : base_) {
    if (r.language == language) out.emplace_back(r.text, r.label);
  }
  return out;
}

ModelArtifacts Hub::train(const std::vector<LabeledText>& data, Language language) const {
  if (config_.model_kind == "neural") return train_neural(data, language, *lexicon_, config_.neural);
  return train_linear(data, language, *lexicon_, config_.linear);
}

RetrainOutcome Hub::retrain(Language language) {
  const auto start = std::chrono::steady_clock::now();
  std::unique_lock lock(retrain_mu_[index_of(language)], std::try_to_lock);
  if (!lock.owns_lock()) {
    fail(ErrorCode::kUnavailable,
         "a retrain for " + std::string(language_name(language)) + " is already running");
  }
  const auto pool = store_->training_pool(language);
  const auto& policy = config_.policy;
  if (pool.size() < policy.min_pool) {
    fail(ErrorCode::kFailedPrecondition,
         "resolved pool for " + std::string(language_name(language)) + " has " +
             std::to_string(pool.size()) + " records; at least " +
             std::to_string(policy.min_pool) + " are required");
  }
  std::array<size_t, kNumClasses> counts{};
  for (const auto& r : pool) ++counts[index_of(r.training_label())];
  for (int c = 0; c < kNumClasses; ++c) {
    const double share = static_cast<double>(counts[c]) / static_cast<double>(pool.size());
    if (share > policy.max_class_share) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "class bias guard: '%s' is %.1f%% of the resolved pool (limit %.1f%%)",
                    std::string(label_name(kAllLabels[c])).c_str(), 100 * share,
                    100 * policy.max_class_share);
      fail(ErrorCode::kFailedPrecondition, buf);
    }
  }
  auto data = base_for(language);
  for (const auto& r : pool) data.emplace_back(r.text, r.training_label());
  auto artifacts = train(data, language);
  RetrainOutcome out;
  out.language = language;
  out.version = registry_->publish(language, artifacts);
  out.pool_size = pool.size();
  out.train_size = data.size();
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

int Hub::bootstrap(Language language) {
  std::lock_guard lock(retrain_mu_[index_of(language)]);
  if (auto m = registry_->current(language)) return m->version();
  auto data = base_for(language);
  if (data.empty()) return 0;
  return registry_->publish(language, train(data, language));
}

}  // namespace hsr::hub
