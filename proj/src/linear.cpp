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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace hsr::linear {

namespace {

constexpr std::string_view kModelMagic = "hsr-logreg";

void check_dim(const SparseRow& x, size_t dim) {
  if (!x.empty() && x.back().index >= dim) {
    fail(ErrorCode::kInvalidArgument, "feature index " + std::to_string(x.back().index) +
                                          " out of range for dimension " + std::to_string(dim));
  }
}

Probs softmax(const std::array<double, kNumClasses>& z) {
  const double m = *std::max_element(z.begin(), z.end());
  Probs p;
  double s = 0;
  for (int c = 0; c < kNumClasses; ++c) s += (p[c] = std::exp(z[c] - m));
  for (auto& v : p) v /= s;
  return p;
}

// -log softmax(z)[y], computed without forming the probabilities.
double cross_entropy(const std::array<double, kNumClasses>& z, int y) {
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0;
  for (double v : z) s += std::exp(v - m);
  return m + std::log(s) - z[y];
}

}  // namespace

SparseRow flatten(const features::FeatureVector& fv, size_t vocab_size) {
  SparseRow row = fv.sparse;
  for (size_t k = 0; k < fv.aux.size(); ++k) {
    if (fv.aux[k] != 0.0) row.push_back({static_cast<uint32_t>(vocab_size + k), fv.aux[k]});
  }
  return row;
}

int default_max_iter(Language lang) { return lang == Language::kEn ? 5000 : 3000; }

Label argmax_severity(const Probs& p) {
  int best = 0;
  for (int c = 1; c < kNumClasses; ++c) {
    if (p[c] > p[best]) best = c;
  }
  return kAllLabels[best];
}

std::array<double, kNumClasses> LogRegModel::logits(const SparseRow& x) const {
  check_dim(x, dim_);
  std::array<double, kNumClasses> z = b_;
  for (const auto& e : x) {
    for (int c = 0; c < kNumClasses; ++c) z[c] += w_[c * dim_ + e.index] * e.weight;
  }
  return z;
}

Probs LogRegModel::predict_proba(const SparseRow& x) const { return softmax(logits(x)); }

double LogRegModel::weight_norm() const {
  double s = 0;
  for (double v : w_) s += v * v;
  return std::sqrt(s);
}

void LogRegModel::save(std::ostream& out) const {
  const auto& h = hyper_;
  out << kModelMagic << " 1\n";
  out << "classes hate abusive neither\n";
  out << "dim " << dim_ << "\n";
  out << "lambda " << format_double(h.lambda) << "\n";
  out << "class_weights";
  for (double v : h.class_weights) out << ' ' << format_double(v);
  out << "\nweighting " << (h.weighting == ClassWeighting::kEqual ? "equal" : "inverse_frequency")
      << "\n";
  out << "max_iter " << h.max_iter << "\n";
  out << "learning_rate " << format_double(h.learning_rate) << "\n";
  out << "batch_size " << h.batch_size << "\n";
  out << "seed " << h.seed << "\n";
  out << "tol " << format_double(h.tol) << "\n";
  out << "patience " << h.patience << "\n";
  out << "bias";
  for (double v : b_) out << ' ' << format_double(v);
  out << "\n";
  for (int c = 0; c < kNumClasses; ++c) {
    out << "w " << label_name(kAllLabels[c]);
    for (size_t j = 0; j < dim_; ++j) out << ' ' << format_double(w_[c * dim_ + j]);
    out << "\n";
  }
}

void LogRegModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  save(out);
  if (!out) fail(ErrorCode::kIo, "write failed: " + path.string());
}

LogRegModel LogRegModel::load(std::istream& in, const std::string& name) {
  std::string line;
  int line_no = 0;
  auto next = [&](std::string_view key) {
    if (!std::getline(in, line)) fail(ErrorCode::kParse, name + ": truncated model file");
    ++line_no;
    std::istringstream ls(line);
    std::string k;
    ls >> k;
    if (k != key) {
      fail(ErrorCode::kParse,
           name + ":" + std::to_string(line_no) + ": expected '" + std::string(key) + "'");
    }
    std::vector<std::string> vals;
    for (std::string v; ls >> v;) vals.push_back(v);
    return vals;
  };
  auto one = [&](std::string_view key) {
    auto v = next(key);
    if (v.size() != 1) fail(ErrorCode::kParse, name + ": bad value for " + std::string(key));
    return v[0];
  };

  if (one(kModelMagic) != "1") fail(ErrorCode::kParse, name + ": unsupported model version");
  if (next("classes") != std::vector<std::string>{"hate", "abusive", "neither"}) {
    fail(ErrorCode::kParse, name + ": unexpected class order");
  }
  LogRegModel m(static_cast<size_t>(parse_int(one("dim"))));
  auto& h = m.hyper_;
  h.lambda = parse_double(one("lambda"));
  auto cw = next("class_weights");
  if (cw.size() != kNumClasses) fail(ErrorCode::kParse, name + ": bad class_weights");
  for (int c = 0; c < kNumClasses; ++c) h.class_weights[c] = parse_double(cw[c]);
  auto weighting = one("weighting");
  if (weighting == "equal") {
    h.weighting = ClassWeighting::kEqual;
  } else if (weighting == "inverse_frequency") {
    h.weighting = ClassWeighting::kInverseFrequency;
  } else {
    fail(ErrorCode::kParse, name + ": unknown weighting '" + weighting + "'");
  }
  h.max_iter = static_cast<int>(parse_int(one("max_iter")));
  h.learning_rate = parse_double(one("learning_rate"));
  h.batch_size = static_cast<size_t>(parse_int(one("batch_size")));
  h.seed = static_cast<uint64_t>(std::stoull(one("seed")));
  h.tol = parse_double(one("tol"));
  h.patience = static_cast<int>(parse_int(one("patience")));
  auto b = next("bias");
  if (b.size() != kNumClasses) fail(ErrorCode::kParse, name + ": bad bias");
  for (int c = 0; c < kNumClasses; ++c) m.b_[c] = parse_double(b[c]);
  for (int c = 0; c < kNumClasses; ++c) {
    auto row = next("w");
    if (row.size() != m.dim_ + 1 || row[0] != label_name(kAllLabels[c])) {
      fail(ErrorCode::kParse, name + ":" + std::to_string(line_no) + ": bad weight row");
    }
    for (size_t j = 0; j < m.dim_; ++j) m.w_[c * m.dim_ + j] = parse_double(row[j + 1]);
  }
  return m;
}

LogRegModel LogRegModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kNotFound, "model not found: " + path.string());
  return load(in, path.string());
}

double loss(const LogRegModel& model, const Dataset& data, const std::vector<size_t>& rows,
            double lambda, const std::array<double, kNumClasses>& class_weights) {
  if (rows.empty()) fail(ErrorCode::kInvalidArgument, "loss over an empty batch");
  double data_term = 0;
  for (size_t i : rows) {
    const int y = index_of(data.y[i]);
    data_term += class_weights[y] * cross_entropy(model.logits(data.x[i]), y);
  }
  const double norm = model.weight_norm();
  return data_term / static_cast<double>(rows.size()) + 0.5 * lambda * norm * norm;
}

double loss(const LogRegModel& model, const Dataset& data, double lambda,
            const std::array<double, kNumClasses>& class_weights) {
  std::vector<size_t> rows(data.size());
  for (size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return loss(model, data, rows, lambda, class_weights);
}

Gradient gradient(const LogRegModel& model, const Dataset& data, const std::vector<size_t>& rows,
                  double lambda, const std::array<double, kNumClasses>& class_weights) {
  if (rows.empty()) fail(ErrorCode::kInvalidArgument, "gradient over an empty batch");
  const size_t d = model.dim();
  Gradient g;
  g.dw.assign(kNumClasses * d, 0.0);
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  for (size_t i : rows) {
    const int y = index_of(data.y[i]);
    Probs p = model.predict_proba(data.x[i]);
    for (int c = 0; c < kNumClasses; ++c) {
      const double r = class_weights[y] * (p[c] - (c == y ? 1.0 : 0.0)) * inv_n;
      g.db[c] += r;
      for (const auto& e : data.x[i]) g.dw[c * d + e.index] += r * e.weight;
    }
  }
  for (size_t j = 0; j < g.dw.size(); ++j) g.dw[j] += lambda * model.weights()[j];
  return g;
}

std::array<double, kNumClasses> effective_class_weights(const Hyper& hyper,
                                                        const std::vector<Label>& y) {
  if (hyper.weighting == ClassWeighting::kEqual) return hyper.class_weights;
  std::array<size_t, kNumClasses> counts{};
  for (Label l : y) ++counts[index_of(l)];
  int present = 0;
  for (size_t c : counts) present += c > 0;
  std::array<double, kNumClasses> w{};
  for (int c = 0; c < kNumClasses; ++c) {
    w[c] = counts[c] == 0 ? 0.0
                          : static_cast<double>(y.size()) /
                                (static_cast<double>(present) * static_cast<double>(counts[c]));
  }
  return w;
}

TrainResult train(const Dataset& data, const Hyper& hyper) {
  const auto start = std::chrono::steady_clock::now();
  if (data.x.empty() || data.x.size() != data.y.size()) {
    fail(ErrorCode::kInvalidArgument, "training set must be non-empty with one label per row");
  }
  if (hyper.batch_size == 0 || hyper.max_iter < 0 || hyper.lambda < 0) {
    fail(ErrorCode::kInvalidArgument, "invalid hyperparameters");
  }
  for (const auto& x : data.x) {
    check_dim(x, data.dim);
    for (size_t k = 1; k < x.size(); ++k) {
      if (x[k - 1].index >= x[k].index) {
        fail(ErrorCode::kInvalidArgument, "feature indices must be strictly increasing");
      }
    }
  }

  TrainResult out{LogRegModel(data.dim), {}};
  LogRegModel& m = out.model;
  m.hyper() = hyper;
  const auto cw = effective_class_weights(hyper, data.y);
  const size_t n = data.size();
  const size_t d = data.dim;
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(hyper.seed);

  double prev = loss(m, data, order, hyper.lambda, cw);
  int stall = 0;
  auto& w = m.weights();
  for (int epoch = 1; epoch <= hyper.max_iter; ++epoch) {
    rng.shuffle(order);
    for (size_t s = 0; s < n; s += hyper.batch_size) {
      const size_t e = std::min(n, s + hyper.batch_size);
      const double step = hyper.learning_rate / static_cast<double>(e - s);
      // Residuals use the weights from before this batch's update.
      std::vector<std::array<double, kNumClasses>> resid(e - s);
      for (size_t k = s; k < e; ++k) {
        const size_t i = order[k];
        const int y = index_of(data.y[i]);
        Probs p = m.predict_proba(data.x[i]);
        for (int c = 0; c < kNumClasses; ++c) {
          resid[k - s][c] = cw[y] * (p[c] - (c == y ? 1.0 : 0.0));
        }
      }
      if (hyper.lambda > 0) {
        const double decay = 1.0 - hyper.learning_rate * hyper.lambda;
        for (double& v : w) v *= decay;
      }
      for (size_t k = s; k < e; ++k) {
        const auto& r = resid[k - s];
        for (int c = 0; c < kNumClasses; ++c) {
          m.bias()[c] -= step * r[c];
          if (r[c] == 0.0) continue;
          for (const auto& f : data.x[order[k]]) w[c * d + f.index] -= step * r[c] * f.weight;
        }
      }
    }
    const double cur = loss(m, data, order, hyper.lambda, cw);
    if (!std::isfinite(cur)) {
      fail(ErrorCode::kInvalidArgument,
           "non-finite loss at epoch " + std::to_string(epoch) + "; learning rate too high");
    }
    out.report.loss.push_back(cur);
    out.report.epochs = epoch;
    stall = std::abs(cur - prev) < hyper.tol ? stall + 1 : 0;
    prev = cur;
    if (stall >= hyper.patience) {
      out.report.converged = true;
      break;
    }
  }
  out.report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

Metrics metrics_from_confusion(const std::array<std::array<size_t, kNumClasses>, kNumClasses>& c) {
  Metrics m;
  m.confusion = c;
  size_t trace = 0;
  for (int a = 0; a < kNumClasses; ++a) {
    trace += c[a][a];
    for (int p = 0; p < kNumClasses; ++p) m.total += c[a][p];
  }
  double f1_sum = 0;
  int counted = 0;
  for (int k = 0; k < kNumClasses; ++k) {
    size_t predicted = 0;
    for (int a = 0; a < kNumClasses; ++a) predicted += c[a][k];
    size_t actual = 0;
    for (int p = 0; p < kNumClasses; ++p) actual += c[k][p];
    m.support[k] = actual;
    const double tp = static_cast<double>(c[k][k]);
    m.precision[k] = predicted ? tp / static_cast<double>(predicted) : 0.0;
    m.recall[k] = actual ? tp / static_cast<double>(actual) : 0.0;
    const double pr = m.precision[k] + m.recall[k];
    m.f1[k] = pr > 0 ? 2 * m.precision[k] * m.recall[k] / pr : 0.0;
    m.excluded[k] = predicted == 0 && actual == 0;
    if (!m.excluded[k]) {
      f1_sum += m.f1[k];
      ++counted;
    }
  }
  m.macro_f1 = counted ? f1_sum / counted : 0.0;
  m.accuracy = m.total ? static_cast<double>(trace) / static_cast<double>(m.total) : 0.0;
  return m;
}

Metrics metrics_from_predictions(const std::vector<Label>& gold, const std::vector<Label>& pred) {
  if (gold.size() != pred.size()) fail(ErrorCode::kInvalidArgument, "label count mismatch");
  if (gold.empty()) fail(ErrorCode::kInvalidArgument, "cannot evaluate an empty test set");
  std::array<std::array<size_t, kNumClasses>, kNumClasses> c{};
  for (size_t i = 0; i < gold.size(); ++i) ++c[index_of(gold[i])][index_of(pred[i])];
  return metrics_from_confusion(c);
}

Metrics evaluate(const LogRegModel& model, const Dataset& data) {
  std::vector<Label> pred;
  pred.reserve(data.size());
  for (const auto& x : data.x) pred.push_back(model.predict(x));
  return metrics_from_predictions(data.y, pred);
}

std::string format_report(const std::vector<ReportRow>& rows) {
  auto cell = [](const Metrics& m, Label l) {
    const int k = index_of(l);
    if (m.excluded[k]) return std::string("-");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", m.f1[k]);
    return std::string(buf);
  };
  size_t width = 12;
  for (const auto& r : rows) width = std::max(width, r.dataset.size());
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "| %-*s | %-10s | %-7s | %-8s | %-5s |\n",
                static_cast<int>(width), "Dataset Type", "f1-Neither", "f1-Hate", "f1-Abuse", "Acc");
  out += buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "| %-*s | %-10s | %-7s | %-8s | %.3f |\n",
                  static_cast<int>(width), r.dataset.c_str(),
                  cell(r.metrics, Label::kNeither).c_str(), cell(r.metrics, Label::kHate).c_str(),
                  cell(r.metrics, Label::kAbusive).c_str(), r.metrics.accuracy);
    out += buf;
  }
  return out;
}

std::string report_json(const std::vector<ReportRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    auto f1 = [&](Label l) -> nlohmann::json {
      if (m.excluded[index_of(l)]) return nullptr;
      return m.f1[index_of(l)];
    };
    nlohmann::json conf = nlohmann::json::array();
    for (const auto& row : m.confusion) conf.push_back(row);
    arr.push_back({{"dataset", r.dataset},
                   {"f1_neither", f1(Label::kNeither)},
                   {"f1_hate", f1(Label::kHate)},
                   {"f1_abuse", f1(Label::kAbusive)},
                   {"accuracy", m.accuracy},
                   {"macro_f1", m.macro_f1},
                   {"support", m.support},
                   {"confusion", conf}});
  }
  return arr.dump(2);
}

GridResult grid_search(const Dataset& data, const Hyper& base, const std::vector<double>& lambdas,
                       const std::vector<double>& learning_rates, int folds) {
  if (folds < 2) fail(ErrorCode::kInvalidArgument, "grid search needs at least 2 folds");
  if (data.size() < static_cast<size_t>(folds)) {
    fail(ErrorCode::kInvalidArgument, "fewer rows than folds");
  }
  if (lambdas.empty() || learning_rates.empty()) {
    fail(ErrorCode::kInvalidArgument, "empty grid");
  }
  std::vector<int> fold_of(data.size());
  {
    Rng rng(base.seed);
    std::array<std::vector<size_t>, kNumClasses> by_label;
    for (size_t i = 0; i < data.size(); ++i) by_label[index_of(data.y[i])].push_back(i);
    int next = 0;
    for (auto& idx : by_label) {
      rng.shuffle(idx);
      for (size_t i : idx) fold_of[i] = next++ % folds;
    }
  }
  GridResult result;
  double best = -1.0;
  for (double lambda : lambdas) {
    for (double lr : learning_rates) {
      Hyper h = base;
      h.lambda = lambda;
      h.learning_rate = lr;
      double sum = 0;
      for (int f = 0; f < folds; ++f) {
        Dataset tr{{}, {}, data.dim}, te{{}, {}, data.dim};
        for (size_t i = 0; i < data.size(); ++i) {
          Dataset& dst = fold_of[i] == f ? te : tr;
          dst.x.push_back(data.x[i]);
          dst.y.push_back(data.y[i]);
        }
        sum += evaluate(train(tr, h).model, te).macro_f1;
      }
      GridPoint p{lambda, lr, sum / folds};
      result.points.push_back(p);
      if (p.mean_macro_f1 > best) {
        best = p.mean_macro_f1;
        result.best = h;
      }
    }
  }
  return result;
}

}  // namespace hsr::linear
