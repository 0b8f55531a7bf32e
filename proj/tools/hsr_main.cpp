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

// hsr command-line entry point.

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "hsr/corpus.h"
#include "hsr/features.h"
#include "hsr/hub.h"
#include "hsr/langid.h"
#include "hsr/linear.h"
#include "hsr/neural.h"
#include "hsr/service.h"
#include "hsr/textnorm.h"
#include "hsr/tooling.h"
#include "httplib.h"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace hsr;

namespace {

std::shared_ptr<const LexiconSet> load_lexicons(const std::string& dir) {
  return std::make_shared<const LexiconSet>(
      LexiconSet::load(dir.empty() ? LexiconSet::default_dir() : fs::path(dir)));
}

Language language_arg(const std::string& name) {
  auto l = parse_language(name);
  if (!l) fail(ErrorCode::kInvalidArgument, "unknown language '" + name + "' (en, hi, hi_codemix)");
  return *l;
}

std::vector<hub::LabeledText> texts_of(const corpus::Corpus& c, Language lang) {
  std::vector<hub::LabeledText> out;
  for (const auto& r : c) {
    if (r.language == lang) out.emplace_back(r.text, r.label);
  }
  if (out.empty()) {
    fail(ErrorCode::kInvalidArgument,
         "corpus has no " + std::string(language_name(lang)) + " records");
  }
  return out;
}

linear::Metrics score_texts(const hub::ServingModel& model, const std::vector<hub::LabeledText>& data) {
  std::vector<Label> gold, pred;
  for (const auto& [text, label] : data) {
    gold.push_back(label);
    pred.push_back(linear::argmax_severity(model.score(text)));
  }
  return linear::metrics_from_predictions(gold, pred);
}

std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    if (!trim(line).empty()) out.push_back(line);
  }
  return out;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(parse_double(trim(item)));
  return out;
}

service::HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hsr: multilingual hate-speech recognition toolkit"};
  app.require_subcommand(1);
  std::string lexicon_dir;
  app.add_option("--lexicons", lexicon_dir, "Lexicon directory (default: bundled lexicons)");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Harmonize source datasets into the unified TSV format");
  std::string sources, ingest_out;
  bool dedup = false, show_stats = false;
  ingest->add_option("--sources", sources, "Source list (INI)")->required();
  ingest->add_option("--out", ingest_out, "Output corpus TSV")->required();
  ingest->add_flag("--dedup", dedup, "Drop later exact-duplicate texts");
  ingest->add_flag("--stats", show_stats, "Print per-language statistics");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  size_t n_en = 0, n_hi = 0, n_cm = 0;
  std::string mixture = "0.3333333333333333,0.3333333333333333,0.3333333333333334", synth_out;
  uint64_t synth_seed = 1;
  synth->add_option("--en", n_en, "EN record count");
  synth->add_option("--hi", n_hi, "HI record count");
  synth->add_option("--codemix", n_cm, "Code-mixed HI record count");
  synth->add_option("--mix", mixture, "Class mixture hate,abusive,neither (sums to 1)");
  synth->add_option("--seed", synth_seed, "Random seed");
  synth->add_option("--out", synth_out, "Output corpus TSV")->required();

  // normalize
  auto* normalize = app.add_subcommand("normalize", "Normalize and tokenize text (stdin lines or --text)");
  std::string norm_text, norm_lang = "auto";
  normalize->add_option("--text", norm_text, "Text to normalize; reads stdin lines when absent");
  normalize->add_option("--lang", norm_lang, "en, hi, hi_codemix or auto");

  // segment
  auto* segment = app.add_subcommand("segment", "Split hashtags into words");
  std::vector<std::string> tags;
  segment->add_option("hashtags", tags, "Hashtags, with or without '#'")->required();

  // train
  auto* train = app.add_subcommand("train", "Train a model bundle for one language");
  std::string train_corpus, train_out, train_lang = "en", train_kind = "linear";
  double test_fraction = 0.2, lambda = 1e-4, lr = 0.1;
  int max_iter = 0, epochs = 0;
  uint64_t train_seed = 0;
  bool train_json = false, no_aux = false;
  train->add_option("--corpus", train_corpus, "Unified corpus TSV")->required();
  train->add_option("--out", train_out, "Output bundle directory")->required();
  train->add_option("--lang", train_lang, "en, hi or hi_codemix");
  train->add_option("--model", train_kind, "linear or neural")->check(CLI::IsMember({"linear", "neural"}));
  train->add_option("--test-fraction", test_fraction, "Held-out fraction for the report (0 disables)");
  train->add_option("--lambda", lambda, "L2 strength (linear)");
  train->add_option("--lr", lr, "Learning rate (linear)");
  train->add_option("--max-iter", max_iter, "Epoch budget (linear; 0 = per-language default)");
  train->add_option("--epochs", epochs, "Epochs (neural; 0 = per-language default)");
  train->add_option("--seed", train_seed, "Split seed");
  train->add_flag("--no-aux", no_aux, "Disable the profanity/marker features (linear)");
  train->add_flag("--json", train_json, "Print the report as JSON");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a bundle on a corpus");
  std::string eval_bundle, eval_corpus, eval_lang = "en";
  bool eval_json = false;
  eval->add_option("--bundle", eval_bundle, "Bundle directory")->required();
  eval->add_option("--corpus", eval_corpus, "Unified corpus TSV")->required();
  eval->add_option("--lang", eval_lang, "Language of the bundle");
  eval->add_flag("--json", eval_json, "Print the report as JSON");

  // ablate
  auto* ablate = app.add_subcommand("ablate", "Layer ablation of the CNN-BiLSTM");
  std::string ablate_corpus, ablate_lang = "hi_codemix";
  size_t planted = 0, seq_len = 32;
  int ablate_epochs = 0;
  bool ablate_json = false;
  ablate->add_option("--corpus", ablate_corpus, "Unified corpus TSV (split 80/20)");
  ablate->add_option("--planted", planted, "Use a planted-signal set of this size instead");
  ablate->add_option("--lang", ablate_lang, "Language and hyperparameter row");
  ablate->add_option("--seq-len", seq_len, "Sequence length");
  ablate->add_option("--epochs", ablate_epochs, "Epochs (0 = per-language default)");
  ablate->add_flag("--json", ablate_json, "Print the report as JSON");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the REST API");
  std::string config_path, listen;
  serve->add_option("--config", config_path, "JSON config file (default: $HSR_CONFIG)");
  serve->add_option("--listen", listen, "host:port (overrides config and $HSR_LISTEN)");

  // bench
  auto* bench = app.add_subcommand("bench", "Latency benchmark of single-comment scoring");
  std::string bench_bundle, bench_corpus, bench_lang = "en", bench_url;
  tooling::BenchConfig bench_config;
  bool bench_json = false;
  bench->add_option("--bundle", bench_bundle, "Bundle directory (in-process scoring)");
  bench->add_option("--url", bench_url, "Service base URL, e.g. http://127.0.0.1:8080");
  bench->add_option("--corpus", bench_corpus, "Unified corpus TSV supplying request texts")->required();
  bench->add_option("--lang", bench_lang, "Language of the bundle");
  bench->add_option("--requests", bench_config.requests, "Number of requests");
  bench->add_option("--concurrency", bench_config.concurrency, "Concurrent workers");
  bench->add_option("--seed", bench_config.seed, "Request-set seed");
  bench->add_flag("--json", bench_json, "Print the report as JSON");

  // compact
  auto* compact = app.add_subcommand("compact", "Rewrite a feedback log with verdicts folded in");
  std::string log_path;
  double threshold = 0.60;
  compact->add_option("--log", log_path, "Feedback log (JSONL)")->required();
  compact->add_option("--threshold", threshold, "Review threshold of the log");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      auto corpus = corpus::collate(corpus::load_source_config(sources), dedup);
      corpus::validate(corpus);
      corpus::write_tsv(corpus, ingest_out);
      std::cout << "wrote " << corpus.size() << " records to " << ingest_out << "\n";
      if (show_stats) {
        auto lex = load_lexicons(lexicon_dir);
        auto stats = corpus::compute_stats(corpus, [&](std::string_view t, Language l) {
          return hub::model_tokens(t, l, *lex);
        });
        for (Language l : kAllLanguages) {
          const auto& s = stats.of(l);
          if (s.records == 0) continue;
          std::printf("%-11s records %zu  hate %.3f  abuse %.3f  vocab %zu  max_len %zu\n",
                      std::string(language_name(l)).c_str(), s.records, s.hate_fraction,
                      s.abuse_fraction, s.vocab_size, s.max_seq_len);
        }
      }
    } else if (*synth) {
      tooling::SynthSpec spec;
      spec.counts = {n_en, n_hi, n_cm};
      auto mix = parse_list(mixture);
      if (mix.size() != 3) fail(ErrorCode::kInvalidArgument, "--mix needs three comma-separated values");
      spec.mixture = {mix[0], mix[1], mix[2]};
      spec.seed = synth_seed;
      auto corpus = tooling::generate_synthetic(spec, *load_lexicons(lexicon_dir));
      corpus::validate(corpus);
      corpus::write_tsv(corpus, synth_out);
      std::cout << "wrote " << corpus.size() << " records to " << synth_out << "\n";
    } else if (*normalize) {
      auto lex = load_lexicons(lexicon_dir);
      std::vector<std::string> lines;
      if (!norm_text.empty()) {
        lines.push_back(norm_text);
      } else {
        lines = read_lines(std::cin);
      }
      for (const auto& line : lines) {
        Language l = norm_lang == "auto" ? langid::detect(line, *lex).language : language_arg(norm_lang);
        auto toks = hub::model_tokens(line, l, *lex);
        std::cout << language_name(l) << "\t";
        for (size_t i = 0; i < toks.size(); ++i) std::cout << (i ? " " : "") << toks[i];
        std::cout << "\n";
      }
    } else if (*segment) {
      auto lex = load_lexicons(lexicon_dir);
      for (const auto& t : tags) {
        const std::string tag = t.rfind('#', 0) == 0 ? t : "#" + t;
        auto words = textnorm::segment_hashtag(tag, *lex);
        std::cout << tag << "\t";
        for (size_t i = 0; i < words.size(); ++i) std::cout << (i ? " " : "") << words[i];
        std::cout << "\n";
      }
    } else if (*train) {
      auto lex = load_lexicons(lexicon_dir);
      const Language lang = language_arg(train_lang);
      auto all = corpus::read_tsv(train_corpus);
      corpus::Corpus train_part = all, test_part;
      if (test_fraction > 0) {
        if (test_fraction >= 1) fail(ErrorCode::kInvalidArgument, "--test-fraction must be below 1");
        corpus::SplitSpec split;
        split.train_fraction = 1.0 - test_fraction;
        split.seed = train_seed;
        std::tie(train_part, test_part) = corpus::split(all, split);
      }
      auto data = texts_of(train_part, lang);
      hub::ModelArtifacts artifacts;
      if (train_kind == "linear") {
        hub::LinearRecipe recipe;
        recipe.hyper.lambda = lambda;
        recipe.hyper.learning_rate = lr;
        recipe.max_iter = max_iter;
        recipe.use_aux = !no_aux;
        artifacts = hub::train_linear(data, lang, *lex, recipe);
      } else {
        hub::NeuralRecipe recipe;
        auto hyper = neural::default_hyper(lang);
        if (epochs > 0) hyper.epochs = epochs;
        recipe.hyper = hyper;
        artifacts = hub::train_neural(data, lang, *lex, recipe);
      }
      hub::save_bundle(artifacts, train_out);
      auto model = hub::load_bundle(train_out, lang, 0, lex);
      std::vector<linear::ReportRow> rows{{"train", score_texts(*model, data)}};
      bool has_test = false;
      for (const auto& r : test_part) has_test |= r.language == lang;
      if (has_test) rows.push_back({"test", score_texts(*model, texts_of(test_part, lang))});
      std::cout << (train_json ? linear::report_json(rows) : linear::format_report(rows));
      std::cerr << "saved " << train_kind << " bundle to " << train_out << "\n";
    } else if (*eval) {
      auto lex = load_lexicons(lexicon_dir);
      const Language lang = language_arg(eval_lang);
      auto model = hub::load_bundle(eval_bundle, lang, 0, lex);
      std::vector<linear::ReportRow> rows{
          {std::string(language_name(lang)), score_texts(*model, texts_of(corpus::read_tsv(eval_corpus), lang))}};
      std::cout << (eval_json ? linear::report_json(rows) : linear::format_report(rows));
    } else if (*ablate) {
      const Language lang = language_arg(ablate_lang);
      auto hyper = neural::default_hyper(lang);
      if (ablate_epochs > 0) hyper.epochs = ablate_epochs;
      neural::NetConfig full;
      full.seq_len = seq_len;
      std::vector<neural::Sample> train_set, test_set;
      if (planted > 0) {
        full.vocab_size = 64;
        train_set = neural::planted_signal_set(planted, seq_len, full.vocab_size, 42);
        test_set = neural::planted_signal_set(planted, seq_len, full.vocab_size, 43);
      } else {
        if (ablate_corpus.empty()) fail(ErrorCode::kInvalidArgument, "ablate needs --corpus or --planted");
        auto lex = load_lexicons(lexicon_dir);
        auto [tr, te] = corpus::split(corpus::read_tsv(ablate_corpus), {});
        std::vector<std::vector<std::string>> docs;
        auto tr_data = texts_of(tr, lang), te_data = texts_of(te, lang);
        for (const auto& [text, label] : tr_data) docs.push_back(hub::model_tokens(text, lang, *lex));
        auto index = neural::TokenIndex::build(docs, 4096);
        full.vocab_size = index.size();
        for (size_t i = 0; i < docs.size(); ++i) {
          train_set.push_back({index.encode(docs[i], seq_len), tr_data[i].second});
        }
        for (const auto& [text, label] : te_data) {
          test_set.push_back({index.encode(hub::model_tokens(text, lang, *lex), seq_len), label});
        }
      }
      std::vector<neural::AblationConfig> configs{{"Full (C1, C2, C3, bl0, bl1)", full}};
      for (auto& c : neural::standard_ablation(full)) configs.push_back(c);
      auto rows = neural::ablate(configs, hyper, train_set, test_set);
      std::cout << (ablate_json ? neural::ablation_json(rows) : neural::format_ablation(rows));
    } else if (*serve) {
      if (config_path.empty()) {
        if (const char* env = std::getenv("HSR_CONFIG"); env && *env) config_path = env;
      }
      service::ServiceConfig config =
          config_path.empty() ? service::ServiceConfig{} : service::ServiceConfig::load(config_path);
      config.apply_env();
      if (!lexicon_dir.empty()) config.lexicon_dir = lexicon_dir;
      if (!listen.empty()) std::tie(config.host, config.port) = service::parse_listen(listen);
      std::cerr << "loading models from " << config.models_path() << "\n";
      auto svc = service::build_service(config);
      service::HttpServer server(*svc, config.threads);
      const int port = server.bind(config.host, config.port);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "listening on http://" << config.host << ":" << port << "\n";
      server.run();
      g_server = nullptr;
    } else if (*bench) {
      std::vector<std::string> texts;
      for (const auto& r : corpus::read_tsv(bench_corpus)) texts.push_back(r.text);
      tooling::BenchReport report;
      if (!bench_url.empty()) {
        if (!bench_bundle.empty()) fail(ErrorCode::kInvalidArgument, "use either --bundle or --url");
        thread_local std::unique_ptr<httplib::Client> client;
        auto op = [&](const std::string& text) {
          if (!client) client = std::make_unique<httplib::Client>(bench_url);
          auto res = client->Post("/api/v1/score?record=false", nlohmann::json{{"text", text}}.dump(),
                                  "application/json");
          if (!res || res->status != 200) fail(ErrorCode::kUnavailable, "request failed");
        };
        report = tooling::run_benchmark(texts, op, bench_config);
      } else {
        if (bench_bundle.empty()) fail(ErrorCode::kInvalidArgument, "bench needs --bundle or --url");
        auto model = hub::load_bundle(bench_bundle, language_arg(bench_lang), 0, load_lexicons(lexicon_dir));
        report = tooling::run_benchmark(
            texts, [&](const std::string& text) { model->score(text); }, bench_config);
      }
      std::cout << (bench_json ? report.json() + "\n" : report.text());
    } else if (*compact) {
      hub::FeedbackStore store(log_path, threshold);
      store.compact();
      std::cout << "compacted " << store.size() << " records in " << log_path << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error (" << error_code_name(e.code()) << "): " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
