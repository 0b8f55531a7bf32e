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

#ifndef HSR_NEURAL_H_
#define HSR_NEURAL_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "hsr/common.h"
#include "hsr/linear.h"

namespace hsr::neural {

// Parameter storage: row-major values with a gradient buffer of equal size.
struct Tensor {
  std::string name;
  std::vector<size_t> shape;
  std::vector<double> value;
  std::vector<double> grad;

  Tensor() = default;
  Tensor(std::string n, std::vector<size_t> s);
  size_t size() const { return value.size(); }
  void zero_grad();
};

enum class Activation { kSoftmax, kSigmoid };

inline constexpr std::array<int, 3> kKernelSizes = {3, 4, 5};

struct NetConfig {
  size_t vocab_size = 4096;
  size_t embed_dim = 32;
  size_t seq_len = 128;
  std::array<bool, 3> conv{true, true, true};  // C1, C2, C3
  size_t feature_maps = 64;
  bool batchnorm = true;
  std::array<bool, 2> lstm{true, true};  // bl0, bl1 (stacked)
  size_t hidden = 64;
  Activation activation = Activation::kSoftmax;
  double dropout = 0.2;
  uint64_t seed = 42;

  void validate() const;
  size_t active_convs() const;
  size_t active_lstms() const;
  // Width of the m0 concatenation of the max-pooled conv branches.
  size_t concat_width() const { return active_convs() * feature_maps; }
  size_t lstm_width() const { return active_lstms() ? 2 * hidden : 0; }
  // Width of the m1 merge feeding the output layer.
  size_t merge_width() const;
  // Closed-form trainable parameter count.
  size_t parameter_count() const;

  bool operator==(const NetConfig&) const = default;
};

enum class Optimizer { kSgd, kAdam };

struct TrainHyper {
  int epochs = 22;
  size_t batch_size = 30;
  Optimizer optimizer = Optimizer::kSgd;
  double learning_rate = 0.001;
  double dropout = 0.2;
  size_t hidden = 64;
  uint64_t seed = 42;

  void validate() const;
};

// Per-language defaults (en, hi, hi_codemix).
TrainHyper default_hyper(Language lang);

// Global max over `positions` rows of a [positions][width] block; ties keep
// the earliest position.
void global_max_pool(const std::vector<double>& values, size_t positions, size_t width,
                     std::vector<double>& pooled, std::vector<size_t>& argmax);

struct Sample {
  std::vector<int32_t> ids;  // exactly seq_len ids, trailing pad id 0
  Label label = Label::kNeither;
};

class Net {
 public:
  Net() = default;
  explicit Net(const NetConfig& config);

  const NetConfig& config() const { return config_; }
  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;
  Tensor* find(const std::string& name);
  size_t parameter_count() const;

  // Batch forward pass returning per-sample class scores (probabilities
  // after the final activation). Training mode uses batch statistics for
  // batchnorm and applies dropout with masks drawn from rng.
  std::vector<std::array<double, kNumClasses>> forward(
      const std::vector<std::vector<int32_t>>& batch, bool training, Rng* rng = nullptr);

  // Loss of the last forward pass, averaged over the batch (softmax
  // cross-entropy, or binary cross-entropy summed over classes).
  double loss(const std::vector<Label>& labels) const;

  // Accumulates parameter gradients of loss(labels) * scale for the last
  // forward pass.
  void backward(const std::vector<Label>& labels, double scale = 1.0);
  void zero_grad();

  // Intermediate activations of the last forward pass, sample s.
  const std::vector<double>& pooled(size_t s, size_t branch) const;
  const std::vector<double>& bn_output(size_t s, size_t branch) const;
  const std::vector<double>& lstm_output(size_t s) const;
  const std::vector<double>& merged(size_t s) const;

  Label predict(const std::vector<int32_t>& ids);
  std::array<double, kNumClasses> predict_proba(const std::vector<int32_t>& ids);

  // Text checkpoint: config header, then each parameter block and the
  // batchnorm running statistics in declaration order.
  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static Net load(std::istream& in, const std::string& name = "<stream>");
  static Net load(const std::filesystem::path& path);

 private:
  struct BranchCache {
    std::vector<double> z;       // conv output [positions][F]
    std::vector<double> xhat;    // normalized [positions][F]
    std::vector<double> y;       // after batchnorm affine
    std::vector<double> pooled;  // [F]
    std::vector<size_t> argmax;  // [F]
  };
  struct LstmDirCache {
    std::vector<double> gates;  // [L][4H] post-activation i, f, g, o
    std::vector<double> c;      // [L][H]
    std::vector<double> h;      // [L][H]
  };
  struct LstmLayerCache {
    std::vector<double> input;  // [L][I]
    size_t in_dim = 0;
    LstmDirCache fwd, bwd;
    std::vector<double> out;  // [L][2H]
  };
  struct SampleCache {
    std::vector<int32_t> ids;
    size_t length = 0;
    std::vector<double> x;  // embedded [T][E]
    std::array<BranchCache, 3> branches;
    std::vector<double> m0, fc0;
    std::vector<LstmLayerCache> lstm;
    std::vector<double> lstm_out, fc1;
    std::vector<double> m1, mask, dropped;
    std::array<double, kNumClasses> logits{}, probs{};
  };
  struct BnStats {
    std::vector<double> mean, var;  // batch statistics used in the last pass
  };

  void init_parameters();
  void conv_forward(size_t b, SampleCache& s) const;
  void lstm_dir_forward(const Tensor& wx, const Tensor& wh, const Tensor& bias,
                        const std::vector<double>& input, size_t in_dim, size_t length,
                        bool reverse, LstmDirCache& cache) const;
  void lstm_dir_backward(Tensor& wx, Tensor& wh, Tensor& bias, const std::vector<double>& input,
                         size_t in_dim, size_t length, bool reverse, const LstmDirCache& cache,
                         const std::vector<double>& dh_seq, std::vector<double>& dinput) const;
  Tensor& param(const std::string& name);
  const Tensor& param(const std::string& name) const;

  NetConfig config_;
  std::vector<Tensor> params_;
  std::array<std::vector<double>, 3> running_mean_, running_var_;
  std::vector<SampleCache> cache_;
  std::array<BnStats, 3> bn_;
  bool last_training_ = false;
};

struct EpochStats {
  double loss = 0.0;
  double train_accuracy = 0.0;
};

struct NeuralTrainReport {
  std::vector<EpochStats> epochs;
  int epochs_run = 0;
  double seconds = 0.0;
  bool reached_target = false;
};

struct TrainOptions {
  // Stop once training accuracy (evaluation mode) reaches this value.
  // Values above 1 disable early stopping.
  double stop_at_accuracy = 2.0;
};

// Hyper dropout and hidden size override the corresponding NetConfig
// fields; the network seed is hyper.seed.
struct NeuralTrainResult {
  Net net;
  NeuralTrainReport report;
};
NeuralTrainResult train(NetConfig config, const TrainHyper& hyper,
                        const std::vector<Sample>& data, const TrainOptions& options = {});

linear::Metrics evaluate(Net& net, const std::vector<Sample>& data);

// Maps token surfaces onto ids: 0 is padding, 1 is out-of-vocabulary.
class TokenIndex {
 public:
  static constexpr int32_t kPad = 0;
  static constexpr int32_t kUnk = 1;

  TokenIndex() = default;
  // Most frequent tokens first (ties lexicographic), capped at max_size ids.
  static TokenIndex build(const std::vector<std::vector<std::string>>& docs, size_t max_size);
  size_t size() const { return tokens_.size() + 2; }
  std::vector<int32_t> encode(const std::vector<std::string>& tokens, size_t seq_len) const;

  void save(std::ostream& out) const;
  static TokenIndex load(std::istream& in, const std::string& name = "<stream>");

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int32_t> ids_;
};

// Toy set whose labels are carried by class-specific trigger tokens planted
// among random filler tokens. Ids 2..4 are the triggers; filler uses the
// rest of the vocabulary.
std::vector<Sample> planted_signal_set(size_t n, size_t seq_len, size_t vocab_size, uint64_t seed);

struct AblationRow {
  std::string layers;
  std::string model = "CNN-LSTM";
  NetConfig config;
  linear::Metrics metrics;
};

struct AblationConfig {
  std::string layers;
  NetConfig config;
};

// The layer-by-layer rows: "Without C1 and C2 and C3", "C1 only",
// "C1 and C2", "Without bl0 and bl1", "bl0 only".
std::vector<AblationConfig> standard_ablation(const NetConfig& full);

// Trains every config with the same hyper/seed on train and scores it on test.
std::vector<AblationRow> ablate(const std::vector<AblationConfig>& configs, const TrainHyper& hyper,
                                const std::vector<Sample>& train, const std::vector<Sample>& test,
                                const TrainOptions& options = {});

std::string format_ablation(const std::vector<AblationRow>& rows);
std::string ablation_json(const std::vector<AblationRow>& rows);

}  // namespace hsr::neural

#endif  // HSR_NEURAL_H_
