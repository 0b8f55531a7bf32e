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
#include <stdexcept>

#include "hsr/service.h"
#include "httplib.h"
#include "json.hpp"

namespace hsr::service {

using nlohmann::json;

namespace {

json probs_json(const hub::Probs& p) {
  json j = json::object();
  for (Label l : kAllLabels) j[std::string(label_name(l))] = p[index_of(l)];
  return j;
}

json score_json(const ScoreResult& r) {
  return {{"label", label_name(r.label)},
          {"probabilities", probs_json(r.probs)},
          {"language", language_name(r.language)},
          {"language_detected", r.language_detected},
          {"model_version", r.model_version},
          {"latency_ms", r.latency_ms},
          {"feedback_id", r.feedback_id ? json(*r.feedback_id) : json(nullptr)},
          {"queued", r.queued}};
}

json record_json(const hub::FeedbackRecord& r) {
  json j = {{"id", r.id},
            {"text", r.text},
            {"language", language_name(r.language)},
            {"predicted", label_name(r.predicted)},
            {"probabilities", probs_json(r.probs)},
            {"confidence", r.confidence},
            {"queued", r.queued},
            {"model_version", r.model_version},
            {"timestamp_ms", r.timestamp_ms},
            {"verdict", hub::verdict_name(r.verdict.kind)}};
  if (r.verdict.kind != hub::VerdictKind::kUnreviewed) {
    j["training_label"] = label_name(r.training_label());
    j["resolved_ms"] = r.resolved_ms;
  }
  return j;
}

int status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kParse:
      return 400;
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kAlreadyExists:
    case ErrorCode::kFailedPrecondition:
      return 409;
    case ErrorCode::kUnavailable:
      return 503;
    case ErrorCode::kIo:
    case ErrorCode::kInternal:
      return 500;
  }
  return 500;
}

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& msg) {
  send(res, status, {{"error", {{"code", code}, {"message", msg}}}});
}

json parse_body(const httplib::Request& req) {
  json j;
  try {
    j = json::parse(req.body);
  } catch (const json::exception&) {
    fail(ErrorCode::kInvalidArgument, "request body must be JSON");
  }
  if (!j.is_object()) fail(ErrorCode::kInvalidArgument, "request body must be a JSON object");
  return j;
}

std::string string_field(const json& j, const char* key) {
  if (!j.contains(key)) fail(ErrorCode::kInvalidArgument, std::string("missing field '") + key + "'");
  if (!j.at(key).is_string()) fail(ErrorCode::kInvalidArgument, std::string("'") + key + "' must be a string");
  return j.at(key).get<std::string>();
}

std::optional<Language> language_field(std::string_view value) {
  if (value.empty()) return std::nullopt;
  auto l = parse_language(value);
  if (!l) fail(ErrorCode::kInvalidArgument, "unknown language '" + std::string(value) + "'");
  return l;
}

std::optional<Language> optional_language(const json& j) {
  if (!j.contains("language") || j.at("language").is_null()) return std::nullopt;
  return language_field(string_field(j, "language"));
}

bool record_flag(const httplib::Request& req) {
  if (!req.has_param("record")) return true;
  const auto v = req.get_param_value("record");
  if (v == "false" || v == "0") return false;
  if (v == "true" || v == "1") return true;
  fail(ErrorCode::kInvalidArgument, "record must be true or false");
}

// Wraps a handler with the error envelope.
template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_error(res, status_of(e.code()), error_code_name(e.code()), e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  };
}

}  // namespace

struct HttpServer::Impl {
  Service& service;
  httplib::Server server;
};

HttpServer::HttpServer(Service& service, size_t threads) : impl_(new Impl{service, {}}) {
  if (threads == 0) fail(ErrorCode::kInvalidArgument, "threads must be at least 1");
  auto& srv = impl_->server;
  Service& svc = service;
  srv.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  srv.set_payload_max_length(16 << 20);

  srv.set_post_routing_handler([](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
  });
  srv.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
  srv.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (res.status == 404 && res.body.empty()) {
      send_error(res, 404, "not_found", "no route for " + req.method + " " + req.path);
    }
  });

  auto healthz = guarded([](const httplib::Request&, httplib::Response& res) {
    send(res, 200, {{"status", "ok"}});
  });
  srv.Get("/healthz", healthz);
  srv.Get("/api/v1/healthz", healthz);

  srv.Post("/api/v1/score", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
             const json body = parse_body(req);
             auto r = svc.score(string_field(body, "text"), optional_language(body), record_flag(req));
             send(res, 200, score_json(r));
           }));

  srv.Post("/api/v1/page/score", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
             const json body = parse_body(req);
             if (!body.contains("comments") || !body.at("comments").is_array()) {
               fail(ErrorCode::kInvalidArgument, "'comments' must be an array of strings");
             }
             std::vector<std::string> comments;
             for (const auto& c : body.at("comments")) {
               if (!c.is_string()) fail(ErrorCode::kInvalidArgument, "'comments' must be an array of strings");
               comments.push_back(c.get<std::string>());
             }
             auto page = svc.score_page(comments, record_flag(req));
             json counts = json::object(), pct = json::object(), results = json::array();
             for (Label l : kAllLabels) {
               counts[std::string(label_name(l))] = page.counts[index_of(l)];
               pct[std::string(label_name(l))] = page.percentages[index_of(l)];
             }
             for (const auto& r : page.results) results.push_back(score_json(r));
             send(res, 200, {{"total", page.total}, {"counts", counts}, {"percentages", pct},
                             {"results", results}});
           }));

  srv.Post("/api/v1/check", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
             const json body = parse_body(req);
             auto c = svc.check(string_field(body, "text"), optional_language(body), record_flag(req));
             json j = score_json(c.score);
             j["allow"] = c.allow;
             if (!c.allow) {
               j["notice"] = "This comment was classified as " +
                             std::string(label_name(c.score.label)) + " and cannot be posted.";
             }
             send(res, 200, j);
           }));

  srv.Post(R"(/api/v1/feedback/(\d+)/resolve)",
           guarded([&svc](const httplib::Request& req, httplib::Response& res) {
             const int64_t id = parse_int(req.matches[1].str());
             const json body = parse_body(req);
             const std::string verdict = string_field(body, "verdict");
             hub::Verdict v;
             if (verdict == "confirmed") {
               v = hub::Verdict::confirmed();
             } else if (verdict == "relabeled") {
               auto label = parse_label(string_field(body, "label"));
               if (!label) fail(ErrorCode::kInvalidArgument, "unknown label");
               v = hub::Verdict::relabeled(*label);
             } else {
               fail(ErrorCode::kInvalidArgument, "verdict must be 'confirmed' or 'relabeled'");
             }
             send(res, 200, record_json(svc.resolve(id, v)));
           }));

  srv.Get("/api/v1/review", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
            std::optional<Language> lang;
            if (req.has_param("language")) lang = language_field(req.get_param_value("language"));
            size_t limit = 50;
            if (req.has_param("limit")) {
              long long v = 0;
              try {
                v = parse_int(req.get_param_value("limit"));
              } catch (const Error&) {
                fail(ErrorCode::kInvalidArgument, "limit must be an integer");
              }
              if (v < 1) fail(ErrorCode::kInvalidArgument, "limit must be in [1, 1000]");
              limit = static_cast<size_t>(v);
            }
            json items = json::array();
            for (const auto& r : svc.review(lang, limit)) items.push_back(record_json(r));
            send(res, 200, {{"items", items}, {"threshold", svc.hub().store().review_threshold()}});
          }));

  srv.Post("/api/v1/retrain", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
             const json body = parse_body(req);
             auto lang = language_field(string_field(body, "language"));
             if (!lang) fail(ErrorCode::kInvalidArgument, "language is required");
             auto out = svc.retrain(*lang);
             send(res, 200, {{"language", language_name(out.language)},
                             {"version", out.version},
                             {"pool_size", out.pool_size},
                             {"train_size", out.train_size},
                             {"seconds", out.seconds}});
           }));

  srv.Get("/api/v1/models", guarded([&svc](const httplib::Request&, httplib::Response& res) {
            json models = json::array();
            auto& reg = svc.hub().registry();
            for (Language l : kAllLanguages) {
              auto current = reg.current(l);
              json history = json::array();
              for (const auto& v : reg.history(l)) {
                history.push_back({{"version", v.version},
                                   {"kind", v.kind},
                                   {"created_ms", v.created_ms},
                                   {"train_records", v.train_records}});
              }
              models.push_back({{"language", language_name(l)},
                                {"version", current ? json(current->version()) : json(nullptr)},
                                {"kind", current ? json(current->kind()) : json(nullptr)},
                                {"history", history}});
            }
            send(res, 200, {{"models", models}});
          }));
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  auto& srv = impl_->server;
  if (port == 0) {
    int p = srv.bind_to_any_port(host);
    if (p <= 0) fail(ErrorCode::kIo, "cannot bind " + host);
    return p;
  }
  if (!srv.bind_to_port(host, port)) {
    fail(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpServer::run() {
  if (!impl_->server.listen_after_bind()) fail(ErrorCode::kIo, "server stopped with an error");
}

void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace hsr::service
