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

#include "hsr/linear.h"

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "test_util.h"

namespace hsr::linear {
namespace {

SparseRow dense_row(const std::vector<double>& v) {
  SparseRow r;
  for (size_t j = 0; j < v.size(); ++j) {
    if (v[j] != 0.0) r.push_back({static_cast<uint32_t>(j), v[j]});
  }
  return r;
}

// Three clusters around centers 120 degrees apart. Every point is kept only
// if it is nearer its own center than any other by a margin, which makes
// the nearest-center rule (a linear classifier) perfect on the set.
Dataset separable_set(uint64_t seed, int n = 300) {
  Rng rng(seed);
  const double pi = std::acos(-1.0);
  Dataset d;
  d.dim = 2;
  std::array<std::array<double, 2>, 3> centers;
  for (int c = 0; c < 3; ++c) centers[c] = {3 * std::cos(2 * pi * c / 3), 3 * std::sin(2 * pi * c / 3)};
  while (static_cast<int>(d.size()) < n) {
    const int c = static_cast<int>(d.size()) % 3;
    double x = centers[c][0] + rng.uniform(-1.5, 1.5);
    double y = centers[c][1] + rng.uniform(-1.5, 1.5);
    auto dist = [&](int k) { return std::hypot(x - centers[k][0], y - centers[k][1]); };
    bool ok = true;
    for (int k = 0; k < 3; ++k) {
      if (k != c && dist(k) < dist(c) + 0.2) ok = false;
    }
    if (!ok) continue;
    d.x.push_back(dense_row({x, y}));
    d.y.push_back(kAllLabels[c]);
  }
  return d;
}

double accuracy(const LogRegModel& m, const Dataset& d) { return evaluate(m, d).accuracy; }

TEST_CASE("softmax head values") {
  LogRegModel m(4);
  auto p = m.predict_proba({});
  for (double v : p) CHECK(v == doctest::Approx(1.0 / 3));
  m.bias() = {1, 0, 0};
  p = m.predict_proba({{2, 5.0}});
  const double e = std::exp(1.0);
  CHECK(p[0] == doctest::Approx(e / (e + 2)).epsilon(1e-12));
  CHECK(p[0] == doctest::Approx(0.5761).epsilon(1e-4));
  CHECK(p[1] == doctest::Approx(0.2119).epsilon(1e-3));
  CHECK(p[2] == doctest::Approx(0.2119).epsilon(1e-3));
  CHECK_THROWS_AS(m.predict_proba({{4, 1.0}}), Error);
}

TEST_CASE("ties go to the more severe class") {
  CHECK(argmax_severity({1.0 / 3, 1.0 / 3, 1.0 / 3}) == Label::kHate);
  CHECK(argmax_severity({0.2, 0.4, 0.4}) == Label::kAbusive);
  CHECK(argmax_severity({0.1, 0.2, 0.7}) == Label::kNeither);
  LogRegModel m(1);
  CHECK(m.predict({}) == Label::kHate);
}

TEST_CASE("zero iterations leave a uniform model") {
  auto d = separable_set(1, 30);
  Hyper h;
  h.max_iter = 0;
  auto r = train(d, h);
  CHECK(r.report.epochs == 0);
  CHECK(r.model.weight_norm() == 0.0);
  for (double v : r.model.predict_proba(d.x[0])) CHECK(v == doctest::Approx(1.0 / 3));
}

TEST_CASE("analytic gradient matches central differences") {
  Rng rng(77);
  const double h = 1e-5;
  double worst = 0;
  for (int inst = 0; inst < 20; ++inst) {
    const size_t dim = 2 + rng.below(6);
    Dataset d;
    d.dim = dim;
    const size_t n = 1 + rng.below(8);
    std::vector<size_t> rows;
    for (size_t i = 0; i < n; ++i) {
      std::vector<double> v(dim);
      for (auto& x : v) x = rng.uniform() < 0.3 ? 0.0 : rng.uniform(-2, 2);
      d.x.push_back(dense_row(v));
      d.y.push_back(kAllLabels[rng.below(3)]);
      rows.push_back(i);
    }
    LogRegModel m(dim);
    for (auto& w : m.weights()) w = rng.uniform(-1, 1);
    for (auto& b : m.bias()) b = rng.uniform(-1, 1);
    const double lambda = rng.uniform(0, 2);
    std::array<double, 3> cw = {rng.uniform(0.5, 2), rng.uniform(0.5, 2), rng.uniform(0.5, 2)};
    auto g = gradient(m, d, rows, lambda, cw);
    auto rel = [](double a, double b) {
      const double scale = std::max(std::abs(a), std::abs(b));
      return scale < 1e-10 ? 0.0 : std::abs(a - b) / scale;
    };
    for (size_t j = 0; j < m.weights().size(); ++j) {
      const double saved = m.weights()[j];
      m.weights()[j] = saved + h;
      const double up = loss(m, d, rows, lambda, cw);
      m.weights()[j] = saved - h;
      const double down = loss(m, d, rows, lambda, cw);
      m.weights()[j] = saved;
      worst = std::max(worst, rel(g.dw[j], (up - down) / (2 * h)));
    }
    for (int c = 0; c < 3; ++c) {
      const double saved = m.bias()[c];
      m.bias()[c] = saved + h;
      const double up = loss(m, d, rows, lambda, cw);
      m.bias()[c] = saved - h;
      const double down = loss(m, d, rows, lambda, cw);
      m.bias()[c] = saved;
      worst = std::max(worst, rel(g.db[c], (up - down) / (2 * h)));
    }
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("gradient properties") {
  Dataset d;
  d.dim = 2;
  d.x = {dense_row({1.0, 0.0}), dense_row({0.0, 1.0})};
  d.y = {Label::kHate, Label::kAbusive};
  LogRegModel m(2);
  m.w(0, 0) = 60;  // class 0 probability is 1 to machine precision on row 0
  auto g = gradient(m, d, {0}, 0.0, {1, 1, 1});
  for (double v : g.dw) CHECK(std::abs(v) < 1e-20);
  for (double v : g.db) CHECK(std::abs(v) < 1e-20);

  LogRegModel r(2);
  r.w(1, 1) = 0.3;
  auto g1 = gradient(r, d, {0, 1}, 0.0, {1, 1, 1});
  auto g2 = gradient(r, d, {0, 1}, 0.0, {2, 1, 1});
  // Row 0 is the only hate row and only touches feature 0.
  for (int c = 0; c < 3; ++c) {
    CHECK(g2.dw[c * 2 + 0] == doctest::Approx(2 * g1.dw[c * 2 + 0]));
    CHECK(g2.dw[c * 2 + 1] == doctest::Approx(g1.dw[c * 2 + 1]));
  }
}

TEST_CASE("one full-batch epoch equals one gradient step") {
  auto d = separable_set(4, 30);
  Hyper h;
  h.max_iter = 1;
  h.batch_size = 1000;
  h.lambda = 0.5;
  h.learning_rate = 0.3;
  auto r = train(d, h);
  LogRegModel m(d.dim);
  std::vector<size_t> all(d.size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = i;
  auto g = gradient(m, d, all, h.lambda, h.class_weights);
  for (size_t j = 0; j < g.dw.size(); ++j) {
    CHECK(r.model.weights()[j] == doctest::Approx(-h.learning_rate * g.dw[j]).epsilon(1e-12));
  }
  for (int c = 0; c < 3; ++c) {
    CHECK(r.model.bias()[c] == doctest::Approx(-h.learning_rate * g.db[c]).epsilon(1e-12));
  }
}

TEST_CASE("separable set is learned and the loss descends") {
  auto d = separable_set(42);
  auto r = train(d, Hyper{});
  CHECK(accuracy(r.model, d) >= 0.99);
  CHECK(r.report.epochs <= 5000);
  for (size_t e = 3; e < r.report.loss.size(); ++e) {
    CHECK(r.report.loss[e] <= r.report.loss[e - 1] + 1e-9);
  }
  for (double l : r.report.loss) CHECK(std::isfinite(l));
}

TEST_CASE("training is deterministic for a seed") {
  auto d = separable_set(9, 90);
  Hyper h;
  h.max_iter = 50;
  h.batch_size = 16;
  h.seed = 5;
  auto a = train(d, h);
  auto b = train(d, h);
  CHECK(a.model.weights() == b.model.weights());
  CHECK(a.model.bias() == b.model.bias());
}

TEST_CASE("stronger L2 gives a smaller weight norm") {
  auto d = separable_set(3);
  double prev = std::numeric_limits<double>::infinity();
  for (double lambda : {0.1, 1.0, 10.0}) {
    Hyper h;
    h.lambda = lambda;
    h.learning_rate = 0.05;
    h.seed = 1;
    const double norm = train(d, h).model.weight_norm();
    CHECK(norm <= prev);
    prev = norm;
  }
}

TEST_CASE("argmax invariance under feature and weight rescaling") {
  Rng rng(6);
  LogRegModel m(3), scaled(3);
  for (size_t j = 0; j < m.weights().size(); ++j) {
    m.weights()[j] = rng.uniform(-1, 1);
    scaled.weights()[j] = m.weights()[j] / 4.0;
  }
  m.bias() = scaled.bias() = {0.1, -0.2, 0.05};
  for (int i = 0; i < 100; ++i) {
    std::vector<double> v = {rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
    std::vector<double> v4 = {4 * v[0], 4 * v[1], 4 * v[2]};
    CHECK(m.predict(dense_row(v)) == scaled.predict(dense_row(v4)));
    auto p = m.predict_proba(dense_row(v));
    CHECK(std::abs(p[0] + p[1] + p[2] - 1.0) <= 1e-9);
  }
}

TEST_CASE("errors") {
  Dataset empty;
  CHECK_THROWS_AS(train(empty, Hyper{}), Error);
  Dataset bad;
  bad.dim = 2;
  bad.x = {{{5, 1.0}}};
  bad.y = {Label::kHate};
  CHECK_THROWS_AS(train(bad, Hyper{}), Error);
  auto d = separable_set(2, 30);
  Hyper h;
  h.learning_rate = 1e300;
  CHECK_THROWS_WITH_AS(train(d, h), doctest::Contains("learning rate"), Error);
}

TEST_CASE("metrics from a hand-counted confusion matrix") {
  auto m = metrics_from_confusion({{{2, 0, 0}, {1, 1, 0}, {0, 0, 1}}});
  CHECK(m.accuracy == doctest::Approx(0.8));
  CHECK(m.precision[0] == doctest::Approx(2.0 / 3));
  CHECK(m.recall[1] == doctest::Approx(0.5));
  CHECK(m.support == std::array<size_t, 3>{2, 2, 1});
  CHECK(m.f1[2] == 1.0);

  auto perfect = metrics_from_predictions({Label::kHate, Label::kAbusive, Label::kNeither},
                                          {Label::kHate, Label::kAbusive, Label::kNeither});
  CHECK(perfect.accuracy == 1.0);
  for (double f : perfect.f1) CHECK(f == 1.0);
  CHECK(perfect.macro_f1 == 1.0);

  auto missing = metrics_from_predictions({Label::kHate, Label::kNeither},
                                          {Label::kHate, Label::kNeither});
  CHECK(missing.excluded[1]);
  CHECK(missing.f1[1] == 0.0);
  CHECK(missing.macro_f1 == 1.0);

  CHECK_THROWS_AS(metrics_from_predictions({}, {}), Error);
}

TEST_CASE("metrics invariants on random predictions") {
  Rng rng(12);
  for (int t = 0; t < 100; ++t) {
    std::vector<Label> g, p;
    for (size_t i = 1 + rng.below(40); i > 0; --i) {
      g.push_back(kAllLabels[rng.below(3)]);
      p.push_back(kAllLabels[rng.below(3)]);
    }
    auto m = metrics_from_predictions(g, p);
    size_t trace = 0;
    for (int k = 0; k < 3; ++k) {
      size_t row = 0;
      for (size_t v : m.confusion[k]) row += v;
      CHECK(row == m.support[k]);
      trace += m.confusion[k][k];
      for (double s : {m.precision[k], m.recall[k], m.f1[k]}) {
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
      }
    }
    CHECK(m.accuracy == static_cast<double>(trace) / static_cast<double>(g.size()));
  }
}

TEST_CASE("report layout") {
  auto en = metrics_from_confusion({{{2, 0, 0}, {1, 1, 0}, {0, 0, 1}}});
  auto hi = metrics_from_predictions({Label::kHate, Label::kNeither}, {Label::kHate, Label::kNeither});
  std::vector<ReportRow> rows = {{"EN", en}, {"HI", hi}};
  auto text = format_report(rows);
  CHECK(text.find("f1-Neither") != std::string::npos);
  CHECK(text.find("| HI ") != std::string::npos);
  CHECK(text.find("| -  ") != std::string::npos);
  CHECK(text.find("0.800") != std::string::npos);
  auto j = nlohmann::json::parse(report_json(rows));
  REQUIRE(j.size() == 2);
  CHECK(j[1]["f1_abuse"].is_null());
  CHECK(j[0]["accuracy"].get<double>() == doctest::Approx(0.8));
  CHECK(j[0]["confusion"][1][0] == 1);
}

TEST_CASE("model text format round-trips exactly") {
  auto d = separable_set(8, 60);
  Hyper h;
  h.max_iter = 20;
  h.lambda = 0.123456789;
  h.weighting = ClassWeighting::kInverseFrequency;
  auto m = train(d, h).model;
  std::stringstream buf;
  m.save(buf);
  auto back = LogRegModel::load(buf);
  CHECK(back == m);
  CHECK(back.hyper().lambda == h.lambda);
  CHECK(back.hyper().weighting == ClassWeighting::kInverseFrequency);
  std::stringstream bad("hsr-logreg 2\n");
  CHECK_THROWS_AS(LogRegModel::load(bad), Error);
}

TEST_CASE("inverse-frequency class weights") {
  Hyper h;
  h.weighting = ClassWeighting::kInverseFrequency;
  auto w = effective_class_weights(h, {Label::kHate, Label::kNeither, Label::kNeither, Label::kNeither});
  CHECK(w[0] == doctest::Approx(2.0));
  CHECK(w[1] == 0.0);
  CHECK(w[2] == doctest::Approx(4.0 / 6));
  CHECK(effective_class_weights(Hyper{}, {Label::kHate}) == std::array<double, 3>{1, 1, 1});
}

TEST_CASE("grid search and flatten") {
  auto d = separable_set(10, 60);
  Hyper base;
  base.max_iter = 30;
  auto g = grid_search(d, base, {1e-4, 1.0}, {0.1}, 3);
  CHECK(g.points.size() == 2);
  CHECK(g.best.lambda == 1e-4);
  CHECK_THROWS_AS(grid_search(d, base, {}, {0.1}), Error);

  features::FeatureVector fv{{{0, 0.6}, {3, 0.8}}, {2.0, 0.0, 1.0}};
  auto row = flatten(fv, 5);
  REQUIRE(row.size() == 4);
  CHECK(row[2] == features::SparseEntry{5, 2.0});
  CHECK(row[3] == features::SparseEntry{7, 1.0});
}

}  // namespace
}  // namespace hsr::linear
