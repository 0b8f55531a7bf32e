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

#include <atomic>
#include <fstream>
#include <set>
#include <thread>

#include "doctest.h"
#include "hsr/hub.h"
#include "hsr/tooling.h"
#include "test_util.h"

using namespace hsr;
using hsr::hub::FeedbackStore;
using hsr::hub::Verdict;
using hsr::testing::shared_lexicons;
using hsr::testing::TempDir;

namespace {

hub::Probs probs(double hate, double abusive) { return {hate, abusive, 1.0 - hate - abusive}; }

corpus::Corpus base_corpus() {
  tooling::SynthSpec spec;
  spec.counts = {240, 0, 0};
  spec.mixture = {0.3, 0.3, 0.4};
  spec.seed = 11;
  return tooling::generate_synthetic(spec, *shared_lexicons());
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kInternal;
}

size_t line_count(const std::filesystem::path& p) {
  std::ifstream in(p);
  size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

struct Fixture {
  TempDir dir;
  std::shared_ptr<FeedbackStore> store =
      std::make_shared<FeedbackStore>(dir / "feedback.jsonl", 0.60, false);
  std::shared_ptr<hub::ModelRegistry> registry =
      std::make_shared<hub::ModelRegistry>(dir / "models", shared_lexicons());
  hub::Hub hub{store, registry, shared_lexicons(), base_corpus(), hub::HubConfig{}};
};

}  // namespace

TEST_CASE("low-confidence scores are queued for review") {
  TempDir dir;
  FeedbackStore store(dir / "fb.jsonl", 0.60);
  auto a = store.record("maybe rude", Language::kEn, probs(0.30, 0.25), 1);  // max 0.45
  auto b = store.record("clearly fine", Language::kEn, probs(0.05, 0.05), 1);  // max 0.90
  auto c = store.record("borderline", Language::kEn, probs(0.60, 0.20), 1);  // max 0.60
  auto d = store.record("कुछ भी", Language::kHi, probs(0.50, 0.30), 1);
  CHECK(store.get(a)->queued);
  CHECK_FALSE(store.get(b)->queued);
  CHECK_FALSE(store.get(c)->queued);
  CHECK(store.get(d)->queued);
  CHECK(store.get(a)->predicted == Label::kNeither);
  CHECK(store.get(c)->predicted == Label::kHate);

  auto q = store.review_queue(std::nullopt, 100);
  REQUIRE(q.size() == 2);
  CHECK(q[0].id == a);
  CHECK(q[1].id == d);
  CHECK(store.review_queue(Language::kHi, 100).size() == 1);
  CHECK(store.review_queue(std::nullopt, 1).size() == 1);
  store.resolve(a, Verdict::confirmed());
  CHECK(store.review_queue(Language::kEn, 100).empty());
}

TEST_CASE("queue soundness over random confidences") {
  TempDir dir;
  FeedbackStore store(dir / "fb.jsonl", 0.60, false);
  Rng rng(4);
  for (int i = 0; i < 300; ++i) {
    double x = rng.uniform(), y = rng.uniform(), z = rng.uniform();
    double s = x + y + z;
    store.record("t" + std::to_string(i), Language::kEn, {x / s, y / s, z / s}, 1);
  }
  size_t queued = 0;
  for (const auto& r : store.all()) {
    CHECK(r.queued == (r.confidence < 0.60));
    CHECK(r.confidence == std::max({r.probs[0], r.probs[1], r.probs[2]}));
    queued += r.queued;
  }
  CHECK(store.review_queue(std::nullopt, 1000).size() == queued);
}

TEST_CASE("records survive a restart identically") {
  TempDir dir;
  std::vector<hub::FeedbackRecord> before;
  {
    FeedbackStore store(dir / "fb.jsonl", 0.60);
    store.record("first \"quoted\"\tline\nbreak", Language::kEn, probs(0.1 / 3, 0.2), 3);
    auto id = store.record("दूसरा", Language::kHi, probs(0.45, 0.35), 3);
    store.record("teesra yaar", Language::kHiCodemix, probs(0.2, 0.7), 2);
    store.resolve(id, Verdict::relabeled(Label::kAbusive));
    before = store.all();
  }
  FeedbackStore reopened(dir / "fb.jsonl", 0.60);
  CHECK(reopened.all() == before);
  CHECK(reopened.record("next", Language::kEn, probs(0.1, 0.1), 3) == 4);
}

TEST_CASE("a torn final line is dropped on open") {
  TempDir dir;
  {
    FeedbackStore store(dir / "fb.jsonl", 0.60);
    store.record("kept", Language::kEn, probs(0.1, 0.1), 1);
  }
  {
    std::ofstream out(dir / "fb.jsonl", std::ios::app);
    out << "{\"type\":\"record\",\"id\":2,\"te";
  }
  FeedbackStore store(dir / "fb.jsonl", 0.60);
  CHECK(store.size() == 1);
  CHECK(store.record("after", Language::kEn, probs(0.1, 0.1), 1) == 2);
  FeedbackStore again(dir / "fb.jsonl", 0.60);
  CHECK(again.size() == 2);
  CHECK(again.get(2)->text == "after");
}

TEST_CASE("corrupt interior lines are rejected") {
  TempDir dir;
  {
    std::ofstream out(dir / "fb.jsonl");
    out << "not json\n{\"type\":\"record\"}\n";
  }
  CHECK(code_of([&] { FeedbackStore s(dir / "fb.jsonl", 0.60); }) == ErrorCode::kParse);
}

TEST_CASE("resolve semantics and errors") {
  TempDir dir;
  FeedbackStore store(dir / "fb.jsonl", 0.60);
  auto a = store.record("a", Language::kEn, probs(0.5, 0.3), 1);
  auto b = store.record("b", Language::kEn, probs(0.2, 0.5), 1);
  CHECK(store.training_pool(Language::kEn).empty());

  auto r = store.resolve(a, Verdict::relabeled(Label::kHate));
  CHECK(r.training_label() == Label::kHate);
  CHECK(store.training_pool(Language::kEn).size() == 1);
  auto c = store.resolve(b, Verdict::confirmed());
  CHECK(c.training_label() == Label::kAbusive);
  CHECK(store.training_pool(Language::kEn).size() == 2);
  CHECK(store.training_pool(Language::kHi).empty());

  CHECK(code_of([&] { store.resolve(a, Verdict::confirmed()); }) == ErrorCode::kFailedPrecondition);
  CHECK(code_of([&] { store.resolve(99, Verdict::confirmed()); }) == ErrorCode::kNotFound);
  CHECK(code_of([&] { store.resolve(b, Verdict{}); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([&] { store.record("x", Language::kEn, {0.5, 0.5, 0.5}, 1); }) ==
        ErrorCode::kInvalidArgument);
  CHECK(code_of([&] { FeedbackStore s(dir / "other.jsonl", 0.2); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("compaction folds verdicts into records") {
  TempDir dir;
  std::vector<hub::FeedbackRecord> before;
  {
    FeedbackStore store(dir / "fb.jsonl", 0.60);
    for (int i = 0; i < 10; ++i) store.record("r" + std::to_string(i), Language::kEn, probs(0.4, 0.3), 1);
    for (int i = 1; i <= 10; i += 2) store.resolve(i, Verdict::relabeled(Label::kNeither));
    CHECK(line_count(dir / "fb.jsonl") == 15);
    store.compact();
    CHECK(line_count(dir / "fb.jsonl") == 10);
    store.resolve(2, Verdict::confirmed());
    before = store.all();
  }
  FeedbackStore reopened(dir / "fb.jsonl", 0.60);
  CHECK(reopened.all() == before);
  CHECK(line_count(dir / "fb.jsonl") == 11);
}

TEST_CASE("registry publishes versions and reloads them") {
  TempDir dir;
  auto lex = shared_lexicons();
  auto base = base_corpus();
  std::vector<hub::LabeledText> data;
  for (const auto& r : base) data.emplace_back(r.text, r.label);
  const std::string probe = "those vermin do not belong here";
  hub::Probs p1, p2;
  {
    hub::ModelRegistry reg(dir / "models", lex);
    CHECK(reg.current(Language::kEn) == nullptr);
    CHECK(reg.current_version(Language::kEn) == 0);
    CHECK(reg.publish(Language::kEn, hub::train_linear(data, Language::kEn, *lex, {})) == 1);
    p1 = reg.current(Language::kEn)->score(probe);
    data.resize(data.size() / 2);
    CHECK(reg.publish(Language::kEn, hub::train_linear(data, Language::kEn, *lex, {})) == 2);
    p2 = reg.current(Language::kEn)->score(probe);
    CHECK(reg.history(Language::kEn).size() == 2);
    CHECK(reg.current(Language::kEn)->kind() == "linear");
  }
  CHECK(std::filesystem::exists(dir / "models/en/v1/meta.json"));
  CHECK(std::filesystem::exists(dir / "models/en/v2/model.txt"));
  hub::ModelRegistry reopened(dir / "models", lex);
  CHECK(reopened.current_version(Language::kEn) == 2);
  CHECK(reopened.current(Language::kEn)->score(probe) == p2);
  CHECK(reopened.current(Language::kHi) == nullptr);
  auto h = reopened.history(Language::kEn);
  REQUIRE(h.size() == 2);
  CHECK(h[0].version == 1);
  CHECK(h[0].train_records == base.size());
  CHECK(h[1].train_records == base.size() / 2);
  CHECK(p1 != p2);
  double s = p2[0] + p2[1] + p2[2];
  CHECK(std::abs(s - 1.0) < 1e-9);
}

TEST_CASE("neural bundles round-trip through the registry") {
  TempDir dir;
  auto lex = shared_lexicons();
  std::vector<hub::LabeledText> data;
  for (const auto& r : base_corpus()) data.emplace_back(r.text, r.label);
  data.resize(60);
  hub::NeuralRecipe recipe;
  recipe.net.embed_dim = 8;
  recipe.net.seq_len = 16;
  recipe.net.feature_maps = 4;
  neural::TrainHyper hyper;
  hyper.epochs = 2;
  hyper.hidden = 4;
  recipe.hyper = hyper;
  const std::string probe = "what a moron honestly";
  hub::Probs p;
  {
    hub::ModelRegistry reg(dir / "models", lex);
    reg.publish(Language::kEn, hub::train_neural(data, Language::kEn, *lex, recipe));
    CHECK(reg.current(Language::kEn)->kind() == "neural");
    p = reg.current(Language::kEn)->score(probe);
  }
  hub::ModelRegistry reopened(dir / "models", lex);
  CHECK(reopened.current(Language::kEn)->score(probe) == p);
  CHECK(std::abs(p[0] + p[1] + p[2] - 1.0) < 1e-9);
}

TEST_CASE("bootstrap publishes once per language") {
  Fixture f;
  CHECK(f.hub.bootstrap(Language::kEn) == 1);
  CHECK(f.hub.bootstrap(Language::kEn) == 1);
  CHECK(f.hub.bootstrap(Language::kHi) == 0);  // no HI base data
  CHECK(f.registry->current(Language::kHi) == nullptr);
}

TEST_CASE("retrain refuses a pool below the minimum") {
  Fixture f;
  f.hub.bootstrap(Language::kEn);
  for (int i = 0; i < 49; ++i) {
    auto id = f.store->record("sentence " + std::to_string(i), Language::kEn, probs(0.3, 0.3), 1);
    f.store->resolve(id, Verdict::relabeled(kAllLabels[i % 3]));
  }
  CHECK(code_of([&] { f.hub.retrain(Language::kEn); }) == ErrorCode::kFailedPrecondition);
  CHECK(f.registry->current_version(Language::kEn) == 1);
  auto id = f.store->record("one more", Language::kEn, probs(0.3, 0.3), 1);
  f.store->resolve(id, Verdict::relabeled(Label::kNeither));
  CHECK(f.hub.retrain(Language::kEn).version == 2);
}

TEST_CASE("retrain refuses a pool dominated by one class") {
  Fixture f;
  f.hub.bootstrap(Language::kEn);
  for (int i = 0; i < 60; ++i) {
    auto id = f.store->record("s" + std::to_string(i), Language::kEn, probs(0.3, 0.3), 1);
    f.store->resolve(id, Verdict::relabeled(i < 55 ? Label::kHate : Label::kNeither));
  }
  try {
    f.hub.retrain(Language::kEn);
    FAIL("expected the bias guard");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kFailedPrecondition);
    CHECK(std::string(e.what()).find("hate") != std::string::npos);
  }
  CHECK(f.registry->current_version(Language::kEn) == 1);
}

TEST_CASE("relabeled feedback flips the retrained prediction") {
  Fixture f;
  const auto base = base_corpus();
  REQUIRE(f.hub.bootstrap(Language::kEn) == 1);
  const std::string sentence = "the morning train ran on time";
  auto before = f.registry->current(Language::kEn);
  REQUIRE(linear::argmax_severity(before->score(sentence)) == Label::kNeither);

  std::vector<hub::LabeledText> oracle_data;
  for (const auto& r : base) oracle_data.emplace_back(r.text, r.label);
  for (int i = 0; i < 100; ++i) {
    auto id = f.store->record(sentence, Language::kEn, before->score(sentence), 1);
    f.store->resolve(id, Verdict::relabeled(Label::kHate));
  }
  // Confirmed neither-class traffic keeps the pool under the bias guard.
  size_t padded = 0;
  for (const auto& r : base) {
    if (r.label != Label::kNeither || padded == 20) continue;
    auto p = before->score(r.text);
    if (linear::argmax_severity(p) != Label::kNeither) continue;
    f.store->resolve(f.store->record(r.text, Language::kEn, p, 1), Verdict::confirmed());
    ++padded;
  }
  REQUIRE(padded == 20);
  for (const auto& r : f.store->training_pool(Language::kEn)) {
    oracle_data.emplace_back(r.text, r.training_label());
  }

  auto outcome = f.hub.retrain(Language::kEn);
  CHECK(outcome.version == 2);
  CHECK(outcome.pool_size == 120);
  CHECK(outcome.train_size == base.size() + 120);
  auto after = f.registry->current(Language::kEn);
  CHECK(after->version() == 2);
  CHECK(linear::argmax_severity(after->score(sentence)) == Label::kHate);

  // Independent run of the trainer on the same union.
  auto oracle = hub::train_linear(oracle_data, Language::kEn, *shared_lexicons(), {});
  const auto& lex = *shared_lexicons();
  features::Featurizer fz(oracle.linear->vocab, true);
  auto row = linear::flatten(fz(hub::model_tokens(sentence, Language::kEn, lex), lex),
                             oracle.linear->vocab.size());
  CHECK(oracle.linear->model.predict(row) == Label::kHate);
  auto op = oracle.linear->model.predict_proba(row);
  auto sp = after->score(sentence);
  for (int c = 0; c < 3; ++c) CHECK(op[c] == doctest::Approx(sp[c]).epsilon(1e-12));
}

TEST_CASE("scoring stays available and versioned across retrains") {
  Fixture f;
  f.hub.bootstrap(Language::kEn);
  const auto base = base_corpus();
  for (size_t i = 0; i < 60; ++i) {
    auto id = f.store->record(base[i].text, Language::kEn, probs(0.3, 0.3), 1);
    f.store->resolve(id, Verdict::relabeled(base[i].label));
  }
  std::atomic<bool> stop{false};
  std::atomic<size_t> failures{0}, calls{0};
  std::vector<std::vector<int>> seen(4);
  std::vector<std::thread> scorers;
  for (int t = 0; t < 4; ++t) {
    scorers.emplace_back([&, t] {
      size_t i = t;
      while (!stop) {
        try {
          auto m = f.registry->current(Language::kEn);
          auto p = m->score(base[i++ % base.size()].text);
          if (std::abs(p[0] + p[1] + p[2] - 1.0) > 1e-9) ++failures;
          seen[t].push_back(m->version());
          ++calls;
        } catch (...) {
          ++failures;
        }
      }
    });
  }
  std::vector<int> published;
  for (int k = 0; k < 3; ++k) published.push_back(f.hub.retrain(Language::kEn).version);
  while (calls < 200) std::this_thread::yield();
  stop = true;
  for (auto& t : scorers) t.join();

  CHECK(failures == 0);
  CHECK(published == std::vector<int>{2, 3, 4});
  std::set<int> valid{1, 2, 3, 4};
  for (const auto& s : seen) {
    CHECK(std::is_sorted(s.begin(), s.end()));
    for (int v : s) CHECK(valid.count(v));
  }
  auto h = f.registry->history(Language::kEn);
  for (size_t i = 1; i < h.size(); ++i) CHECK(h[i].version > h[i - 1].version);
  CHECK(std::filesystem::exists(f.registry->root() / "en/v1/model.txt"));
}

TEST_CASE("concurrent retrains of one language never share a version") {
  Fixture f;
  f.hub.bootstrap(Language::kEn);
  const auto base = base_corpus();
  for (size_t i = 0; i < 60; ++i) {
    auto id = f.store->record(base[i].text, Language::kEn, probs(0.3, 0.3), 1);
    f.store->resolve(id, Verdict::relabeled(base[i].label));
  }
  std::vector<int> versions(4, 0);
  std::vector<std::thread> threads;
  std::atomic<size_t> busy{0};
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      try {
        versions[t] = f.hub.retrain(Language::kEn).version;
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kUnavailable) ++busy;
      }
    });
  }
  for (auto& t : threads) t.join();
  std::set<int> distinct;
  size_t ok = 0;
  for (int v : versions) {
    if (v == 0) continue;
    ++ok;
    distinct.insert(v);
  }
  CHECK(ok + busy == 4);
  CHECK(distinct.size() == ok);
  CHECK(f.registry->current_version(Language::kEn) == static_cast<int>(1 + ok));
}
