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

#ifndef HSR_HUB_H_
#define HSR_HUB_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hsr/common.h"
#include "hsr/corpus.h"
#include "hsr/features.h"
#include "hsr/lexicon.h"
#include "hsr/linear.h"
#include "hsr/neural.h"
#include "hsr/textnorm.h"

namespace hsr::hub {

using Probs = std::array<double, kNumClasses>;

int64_t now_ms();

// ---------------------------------------------------------------------------
// Feedback store

enum class VerdictKind { kUnreviewed, kConfirmed, kRelabeled };

struct Verdict {
  VerdictKind kind = VerdictKind::kUnreviewed;
  Label label = Label::kNeither;  // meaningful for kRelabeled only

  static Verdict confirmed() { return {VerdictKind::kConfirmed, Label::kNeither}; }
  static Verdict relabeled(Label l) { return {VerdictKind::kRelabeled, l}; }
  bool operator==(const Verdict&) const = default;
};

std::string_view verdict_name(VerdictKind kind);

struct FeedbackRecord {
  int64_t id = 0;
  std::string text;
  Language language = Language::kEn;
  Label predicted = Label::kNeither;
  Probs probs{};
  double confidence = 0.0;
  bool queued = false;
  int model_version = 0;
  int64_t timestamp_ms = 0;
  Verdict verdict;
  int64_t resolved_ms = 0;

  // Confirmed records train on the predicted label, relabeled ones on the
  // verdict label.
  Label training_label() const {
    return verdict.kind == VerdictKind::kRelabeled ? verdict.label : predicted;
  }
  bool operator==(const FeedbackRecord&) const = default;
};

// Append-only JSON-lines log. Each scored comment is one "record" line;
// verdicts are appended as "verdict" amendment lines. Appends are
// serialized through one writer and flushed (and fsync'ed when durable)
// before returning.
class FeedbackStore {
 public:
  FeedbackStore(std::filesystem::path path, double review_threshold, bool durable = true);
  ~FeedbackStore();
  FeedbackStore(const FeedbackStore&) = delete;
  FeedbackStore& operator=(const FeedbackStore&) = delete;

  int64_t record(std::string_view text, Language language, const Probs& probs, int model_version);
  std::optional<FeedbackRecord> get(int64_t id) const;
  // Unreviewed records flagged for review, oldest first.
  std::vector<FeedbackRecord> review_queue(std::optional<Language> language, size_t limit) const;
  FeedbackRecord resolve(int64_t id, const Verdict& verdict);
  // Resolved records of one language, oldest first.
  std::vector<FeedbackRecord> training_pool(Language language) const;
  std::vector<FeedbackRecord> all() const;
  size_t size() const;
  double review_threshold() const { return threshold_; }
  const std::filesystem::path& path() const { return path_; }

  // Rewrites the log with verdicts folded into their records.
  void compact();

 private:
  void load();
  void append_line(const std::string& line);
  void open_for_append();

  std::filesystem::path path_;
  double threshold_;
  bool durable_;
  mutable std::mutex mu_;
  int fd_ = -1;
  std::vector<FeedbackRecord> records_;
  std::map<int64_t, size_t> index_;
  int64_t next_id_ = 1;
};

// ---------------------------------------------------------------------------
// Models

// Token stream shared by training and serving.
std::vector<std::string> model_tokens(std::string_view text, Language language,
                                      const LexiconSet& lexicon,
                                      const textnorm::NormConfig& norm = {});

class ServingModel {
 public:
  virtual ~ServingModel() = default;
  virtual Probs score(std::string_view text) const = 0;
  virtual std::string kind() const = 0;
  Language language() const { return language_; }
  int version() const { return version_; }

 protected:
  ServingModel(Language language, int version) : language_(language), version_(version) {}

 private:
  Language language_;
  int version_;
};

struct LinearArtifacts {
  features::Vocabulary vocab;
  bool use_aux = true;
  linear::LogRegModel model;
};

struct NeuralArtifacts {
  neural::TokenIndex tokens;
  neural::Net net;
};

struct ModelArtifacts {
  std::string kind;  // "linear" or "neural"
  std::optional<LinearArtifacts> linear;
  std::optional<NeuralArtifacts> neural;
  size_t train_records = 0;
};

// Bundle directory layout: meta.json plus vocab.tsv/model.txt (linear) or
// tokens.txt/net.txt (neural).
void save_bundle(const ModelArtifacts& artifacts, const std::filesystem::path& dir);
std::shared_ptr<const ServingModel> load_bundle(const std::filesystem::path& dir, Language language,
                                                int version,
                                                std::shared_ptr<const LexiconSet> lexicon);

struct VersionInfo {
  int version = 0;
  std::string path;  // relative to the registry root
  std::string kind;
  int64_t created_ms = 0;
  size_t train_records = 0;
};

// Per-language model versions on disk plus the in-memory serving snapshot.
// manifest.json maps each language to its current version and history.
class ModelRegistry {
 public:
  ModelRegistry(std::filesystem::path root, std::shared_ptr<const LexiconSet> lexicon);

  // nullptr when no model has been published for the language.
  std::shared_ptr<const ServingModel> current(Language language) const;
  int current_version(Language language) const;
  std::vector<VersionInfo> history(Language language) const;

  // Writes the bundle as the next version, updates the manifest atomically
  // and swaps the serving snapshot. Returns the new version.
  int publish(Language language, const ModelArtifacts& artifacts);

  const std::filesystem::path& root() const { return root_; }

 private:
  void write_manifest() const;

  std::filesystem::path root_;
  std::shared_ptr<const LexiconSet> lexicon_;
  mutable std::mutex mu_;
  std::mutex publish_mu_;
  std::array<std::shared_ptr<const ServingModel>, kNumLanguages> current_{};
  std::array<std::vector<VersionInfo>, kNumLanguages> history_{};
};

// ---------------------------------------------------------------------------
// Training recipes

using LabeledText = std::pair<std::string, Label>;

struct LinearRecipe {
  features::VocabParams vocab;
  linear::Hyper hyper;
  bool use_aux = true;
  // 0 picks the per-language default.
  int max_iter = 0;
};

struct NeuralRecipe {
  neural::NetConfig net;
  std::optional<neural::TrainHyper> hyper;  // per-language default when unset
  size_t max_tokens = 4096;
};

ModelArtifacts train_linear(const std::vector<LabeledText>& data, Language language,
                            const LexiconSet& lexicon, const LinearRecipe& recipe);
ModelArtifacts train_neural(const std::vector<LabeledText>& data, Language language,
                            const LexiconSet& lexicon, const NeuralRecipe& recipe);

// ---------------------------------------------------------------------------
// Retrain loop

struct RetrainPolicy {
  double review_threshold = 0.60;
  size_t min_pool = 50;
  double max_class_share = 0.90;

  void validate() const;
};

struct HubConfig {
  RetrainPolicy policy;
  std::string model_kind = "linear";
  LinearRecipe linear;
  NeuralRecipe neural;
};

struct RetrainOutcome {
  Language language = Language::kEn;
  int version = 0;
  size_t pool_size = 0;
  size_t train_size = 0;
  double seconds = 0.0;
};

class Hub {
 public:
  Hub(std::shared_ptr<FeedbackStore> store, std::shared_ptr<ModelRegistry> registry,
      std::shared_ptr<const LexiconSet> lexicon, corpus::Corpus base, HubConfig config);

  // Trains on the base corpus together with the resolved pool and publishes
  // the result. Only one retrain per language runs at a time.
  RetrainOutcome retrain(Language language);

  // Publishes a first model from the base corpus alone when the language has
  // none yet. Returns the serving version (0 if there is no base data).
  int bootstrap(Language language);

  FeedbackStore& store() { return *store_; }
  ModelRegistry& registry() { return *registry_; }
  const LexiconSet& lexicon() const { return *lexicon_; }
  const HubConfig& config() const { return config_; }

 private:
  ModelArtifacts train(const std::vector<LabeledText>& data, Language language) const;
  std::vector<LabeledText> base_for(Language language) const;

  std::shared_ptr<FeedbackStore> store_;
  std::shared_ptr<ModelRegistry> registry_;
  std::shared_ptr<const LexiconSet> lexicon_;
  corpus::Corpus base_;
  HubConfig config_;
  std::array<std::mutex, kNumLanguages> retrain_mu_;
};

}  // namespace hsr::hub

#endif  // HSR_HUB_H_
