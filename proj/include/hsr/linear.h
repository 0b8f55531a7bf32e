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

#ifndef HSR_LINEAR_H_
#define HSR_LINEAR_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "hsr/common.h"
#include "hsr/features.h"

namespace hsr::linear {

// A flattened feature row: TF-IDF entries followed by auxiliary entries at
// indices vocab_size + k. Indices must be strictly increasing.
using SparseRow = std::vector<features::SparseEntry>;

SparseRow flatten(const features::FeatureVector& fv, size_t vocab_size);

struct Dataset {
  std::vector<SparseRow> x;
  std::vector<Label> y;
  size_t dim = 0;

  size_t size() const { return x.size(); }
};

enum class ClassWeighting { kEqual, kInverseFrequency };

struct Hyper {
  double lambda = 1e-4;
  std::array<double, kNumClasses> class_weights{1.0, 1.0, 1.0};
  ClassWeighting weighting = ClassWeighting::kEqual;
  int max_iter = 5000;
  double learning_rate = 0.1;
  size_t batch_size = 256;
  uint64_t seed = 0;
  double tol = 1e-6;
  int patience = 5;
};

// Per-language iteration caps.
int default_max_iter(Language lang);

using Probs = std::array<double, kNumClasses>;

// Argmax with ties resolved towards the more severe class.
Label argmax_severity(const Probs& p);

class LogRegModel {
 public:
  LogRegModel() = default;
  explicit LogRegModel(size_t dim) : dim_(dim), w_(kNumClasses * dim, 0.0) {}

  size_t dim() const { return dim_; }
  double& w(size_t c, size_t j) { return w_[c * dim_ + j]; }
  double w(size_t c, size_t j) const { return w_[c * dim_ + j]; }
  std::vector<double>& weights() { return w_; }
  const std::vector<double>& weights() const { return w_; }
  std::array<double, kNumClasses>& bias() { return b_; }
  const std::array<double, kNumClasses>& bias() const { return b_; }
  Hyper& hyper() { return hyper_; }
  const Hyper& hyper() const { return hyper_; }

  std::array<double, kNumClasses> logits(const SparseRow& x) const;
  Probs predict_proba(const SparseRow& x) const;
  Label predict(const SparseRow& x) const { return argmax_severity(predict_proba(x)); }

  // Frobenius norm of W (bias excluded).
  double weight_norm() const;

  // Header, hyperparameters, bias, then one row of D weights per class,
  // all at 17 significant digits.
  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static LogRegModel load(std::istream& in, const std::string& name = "<stream>");
  static LogRegModel load(const std::filesystem::path& path);

  bool operator==(const LogRegModel& o) const {
    return dim_ == o.dim_ && w_ == o.w_ && b_ == o.b_;
  }

 private:
  size_t dim_ = 0;
  std::vector<double> w_;
  std::array<double, kNumClasses> b_{};
  Hyper hyper_;
};

struct TrainReport {
  std::vector<double> loss;
  bool converged = false;
  int epochs = 0;
  double seconds = 0.0;
};

struct Gradient {
  std::vector<double> dw;
  std::array<double, kNumClasses> db{};
};

// Objective over the listed rows:
//   (1/n) * sum_i w_{y_i} * CE(softmax(W x_i + b), y_i) + (lambda/2) * ||W||^2
double loss(const LogRegModel& model, const Dataset& data, const std::vector<size_t>& rows,
            double lambda, const std::array<double, kNumClasses>& class_weights);
double loss(const LogRegModel& model, const Dataset& data, double lambda,
            const std::array<double, kNumClasses>& class_weights);

Gradient gradient(const LogRegModel& model, const Dataset& data, const std::vector<size_t>& rows,
                  double lambda, const std::array<double, kNumClasses>& class_weights);

// Resolves hyper.weighting against the label distribution.
std::array<double, kNumClasses> effective_class_weights(const Hyper& hyper,
                                                        const std::vector<Label>& y);

struct TrainResult {
  LogRegModel model;
  TrainReport report;
};

TrainResult train(const Dataset& data, const Hyper& hyper);

struct Metrics {
  // confusion[actual][predicted]
  std::array<std::array<size_t, kNumClasses>, kNumClasses> confusion{};
  std::array<double, kNumClasses> precision{};
  std::array<double, kNumClasses> recall{};
  std::array<double, kNumClasses> f1{};
  std::array<size_t, kNumClasses> support{};
  // Class absent from both the gold labels and the predictions.
  std::array<bool, kNumClasses> excluded{};
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  size_t total = 0;
};

// Macro-F1 averages the non-excluded classes.
Metrics metrics_from_confusion(const std::array<std::array<size_t, kNumClasses>, kNumClasses>& c);
Metrics metrics_from_predictions(const std::vector<Label>& gold, const std::vector<Label>& pred);
Metrics evaluate(const LogRegModel& model, const Dataset& data);

struct ReportRow {
  std::string dataset;
  Metrics metrics;
};

// Per-class F1 and accuracy in the order Neither, Hate, Abuse, Acc.
// Excluded classes print as "-".
std::string format_report(const std::vector<ReportRow>& rows);
std::string report_json(const std::vector<ReportRow>& rows);

struct GridPoint {
  double lambda = 0.0;
  double learning_rate = 0.0;
  double mean_macro_f1 = 0.0;
};

struct GridResult {
  Hyper best;
  std::vector<GridPoint> points;
};

// k-fold cross-validated search over lambda x learning rate; folds are
// stratified by label and fixed by base.seed. Ties keep the earlier point.
GridResult grid_search(const Dataset& data, const Hyper& base, const std::vector<double>& lambdas,
                       const std::vector<double>& learning_rates, int folds = 5);

}  // namespace hsr::linear

#endif  // HSR_LINEAR_H_
