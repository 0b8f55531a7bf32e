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

#include "hsr/neural.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace hsr::neural {

namespace {

constexpr double kBnEps = 1e-8;
constexpr double kBnMomentum = 0.1;
constexpr std::string_view kNetMagic = "hsr-net";

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

void fill_uniform(Tensor& t, Rng& rng, double limit) {
  for (double& v : t.value) v = rng.uniform(-limit, limit);
}

// y += W x for W [rows][cols].
void matvec_add(const double* w, const double* x, size_t rows, size_t cols, double* y) {
  for (size_t r = 0; r < rows; ++r) {
    const double* wr = w + r * cols;
    double s = 0;
    for (size_t c = 0; c < cols; ++c) s += wr[c] * x[c];
    y[r] += s;
  }
}

// x_grad += W^T dy and W_grad += dy x^T.
void matvec_backward(const double* w, const double* x, const double* dy, size_t rows, size_t cols,
                     double* dw, double* dx) {
  for (size_t r = 0; r < rows; ++r) {
    const double g = dy[r];
    if (g == 0.0) continue;
    const double* wr = w + r * cols;
    double* dwr = dw + r * cols;
    for (size_t c = 0; c < cols; ++c) {
      dwr[c] += g * x[c];
      if (dx) dx[c] += g * wr[c];
    }
  }
}

std::string conv_name(size_t b) { return "conv" + std::to_string(b); }
std::string bn_name(size_t b) { return "bn" + std::to_string(b); }
std::string lstm_name(size_t layer, bool reverse) {
  return "bl" + std::to_string(layer) + (reverse ? ".bwd" : ".fwd");
}

std::string bits(const bool* v, size_t n) {
  std::string s;
  for (size_t i = 0; i < n; ++i) {
    if (i) s += ',';
    s += v[i] ? '1' : '0';
  }
  return s;
}

}  // namespace

Tensor::Tensor(std::string n, std::vector<size_t> s) : name(std::move(n)), shape(std::move(s)) {
  size_t count = 1;
  for (size_t d : shape) count *= d;
  value.assign(count, 0.0);
  grad.assign(count, 0.0);
}

void Tensor::zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }

void NetConfig::validate() const {
  if (vocab_size < 2) fail(ErrorCode::kInvalidArgument, "vocab_size must be at least 2");
  if (embed_dim == 0 || feature_maps == 0 || hidden == 0) {
    fail(ErrorCode::kInvalidArgument, "layer widths must be positive");
  }
  if (active_convs() == 0 && active_lstms() == 0) {
    fail(ErrorCode::kInvalidArgument, "at least one conv branch or BiLSTM must be enabled");
  }
  for (size_t b = 0; b < 3; ++b) {
    if (conv[b] && seq_len < static_cast<size_t>(kKernelSizes[b])) {
      fail(ErrorCode::kInvalidArgument, "seq_len shorter than an active kernel");
    }
  }
  if (seq_len == 0) fail(ErrorCode::kInvalidArgument, "seq_len must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail(ErrorCode::kInvalidArgument, "dropout must be in [0,1)");
}

size_t NetConfig::active_convs() const { return std::count(conv.begin(), conv.end(), true); }
size_t NetConfig::active_lstms() const { return std::count(lstm.begin(), lstm.end(), true); }

size_t NetConfig::merge_width() const {
  return (active_convs() ? hidden : 0) + (active_lstms() ? hidden : 0);
}

size_t NetConfig::parameter_count() const {
  size_t n = vocab_size * embed_dim;
  for (size_t b = 0; b < 3; ++b) {
    if (!conv[b]) continue;
    n += feature_maps * kKernelSizes[b] * embed_dim + feature_maps;
    if (batchnorm) n += 2 * feature_maps;
  }
  size_t in = embed_dim;
  for (size_t l = 0; l < 2; ++l) {
    if (!lstm[l]) continue;
    n += 2 * (4 * hidden * in + 4 * hidden * hidden + 4 * hidden);
    in = 2 * hidden;
  }
  if (active_convs()) n += concat_width() * hidden + hidden;
  if (active_lstms()) n += 2 * hidden * hidden + hidden;
  n += merge_width() * kNumClasses + kNumClasses;
  return n;
}

void TrainHyper::validate() const {
  if (epochs < 0) fail(ErrorCode::kInvalidArgument, "epochs must be non-negative");
  if (batch_size == 0 || hidden == 0) fail(ErrorCode::kInvalidArgument, "batch and hidden must be positive");
  if (!(learning_rate > 0)) fail(ErrorCode::kInvalidArgument, "learning rate must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail(ErrorCode::kInvalidArgument, "dropout must be in [0,1)");
}

void global_max_pool(const std::vector<double>& values, size_t positions, size_t width,
                     std::vector<double>& pooled, std::vector<size_t>& argmax) {
  if (positions == 0 || values.size() != positions * width) {
    fail(ErrorCode::kInvalidArgument, "max-pool input shape mismatch");
  }
  pooled.assign(values.begin(), values.begin() + width);
  argmax.assign(width, 0);
  for (size_t t = 1; t < positions; ++t) {
    for (size_t f = 0; f < width; ++f) {
      if (values[t * width + f] > pooled[f]) {
        pooled[f] = values[t * width + f];
        argmax[f] = t;
      }
    }
  }
}

TrainHyper default_hyper(Language lang) {
  TrainHyper h;
  switch (lang) {
    case Language::kEn:
      h = {22, 30, Optimizer::kSgd, 0.001, 0.2, 64, 42};
      break;
    case Language::kHi:
      h = {20, 30, Optimizer::kSgd, 0.001, 0.1, 32, 42};
      break;
    case Language::kHiCodemix:
      h = {22, 30, Optimizer::kAdam, 0.01, 0.2, 64, 42};
      break;
  }
  return h;
}

Net::Net(const NetConfig& config) : config_(config) {
  config_.validate();
  const size_t E = config_.embed_dim, F = config_.feature_maps, H = config_.hidden;
  params_.emplace_back("embedding", std::vector<size_t>{config_.vocab_size, E});
  for (size_t b = 0; b < 3; ++b) {
    if (!config_.conv[b]) continue;
    const size_t k = kKernelSizes[b];
    params_.emplace_back(conv_name(b) + ".w", std::vector<size_t>{F, k, E});
    params_.emplace_back(conv_name(b) + ".b", std::vector<size_t>{F});
    if (config_.batchnorm) {
      params_.emplace_back(bn_name(b) + ".gamma", std::vector<size_t>{F});
      params_.emplace_back(bn_name(b) + ".beta", std::vector<size_t>{F});
      running_mean_[b].assign(F, 0.0);
      running_var_[b].assign(F, 1.0);
    }
  }
  size_t in = E;
  for (size_t l = 0; l < 2; ++l) {
    if (!config_.lstm[l]) continue;
    for (bool rev : {false, true}) {
      params_.emplace_back(lstm_name(l, rev) + ".wx", std::vector<size_t>{4 * H, in});
      params_.emplace_back(lstm_name(l, rev) + ".wh", std::vector<size_t>{4 * H, H});
      params_.emplace_back(lstm_name(l, rev) + ".b", std::vector<size_t>{4 * H});
    }
    in = 2 * H;
  }
  if (config_.active_convs()) {
    params_.emplace_back("fc0.w", std::vector<size_t>{H, config_.concat_width()});
    params_.emplace_back("fc0.b", std::vector<size_t>{H});
  }
  if (config_.active_lstms()) {
    params_.emplace_back("fc1.w", std::vector<size_t>{H, 2 * H});
    params_.emplace_back("fc1.b", std::vector<size_t>{H});
  }
  params_.emplace_back("fc2.w", std::vector<size_t>{kNumClasses, config_.merge_width()});
  params_.emplace_back("fc2.b", std::vector<size_t>{kNumClasses});
  init_parameters();
}

void Net::init_parameters() {
  Rng rng(config_.seed);
  const size_t E = config_.embed_dim, H = config_.hidden;
  for (auto& t : params_) {
    const std::string& n = t.name;
    if (n == "embedding") {
      fill_uniform(t, rng, std::sqrt(3.0));
      std::fill(t.value.begin(), t.value.begin() + E, 0.0);
    } else if (n.rfind("conv", 0) == 0 && n.ends_with(".w")) {
      const double fan_in = static_cast<double>(t.shape[1] * E);
      fill_uniform(t, rng, std::sqrt(6.0 / (fan_in + static_cast<double>(t.shape[0]))));
    } else if (n.ends_with(".gamma")) {
      std::fill(t.value.begin(), t.value.end(), 1.0);
    } else if (n.rfind("bl", 0) == 0) {
      if (n.ends_with(".b")) {
        // Forget-gate block gets bias 1.
        std::fill(t.value.begin() + H, t.value.begin() + 2 * H, 1.0);
      } else {
        fill_uniform(t, rng, 1.0 / std::sqrt(static_cast<double>(H)));
      }
    } else if (n.rfind("fc", 0) == 0 && n.ends_with(".w")) {
      fill_uniform(t, rng, std::sqrt(6.0 / static_cast<double>(t.shape[0] + t.shape[1])));
    }
  }
}

std::vector<Tensor*> Net::parameters() {
  std::vector<Tensor*> out;
  for (auto& t : params_) out.push_back(&t);
  return out;
}

std::vector<const Tensor*> Net::parameters() const {
  std::vector<const Tensor*> out;
  for (const auto& t : params_) out.push_back(&t);
  return out;
}

Tensor* Net::find(const std::string& name) {
  for (auto& t : params_) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

Tensor& Net::param(const std::string& name) {
  Tensor* t = find(name);
  if (!t) fail(ErrorCode::kInternal, "missing parameter " + name);
  return *t;
}

const Tensor& Net::param(const std::string& name) const {
  return const_cast<Net*>(this)->param(name);
}

size_t Net::parameter_count() const {
  size_t n = 0;
  for (const auto& t : params_) n += t.size();
  return n;
}

void Net::zero_grad() {
  for (auto& t : params_) t.zero_grad();
}

void Net::conv_forward(size_t b, SampleCache& s) const {
  const size_t E = config_.embed_dim, F = config_.feature_maps, T = config_.seq_len;
  const size_t k = kKernelSizes[b];
  const size_t P = T - k + 1;
  const Tensor& w = param(conv_name(b) + ".w");
  const Tensor& bias = param(conv_name(b) + ".b");
  auto& z = s.branches[b].z;
  z.assign(P * F, 0.0);
  for (size_t t = 0; t < P; ++t) {
    const double* x = s.x.data() + t * E;
    for (size_t f = 0; f < F; ++f) {
      const double* wf = w.value.data() + f * k * E;
      double acc = bias.value[f];
      for (size_t j = 0; j < k * E; ++j) acc += wf[j] * x[j];
      z[t * F + f] = acc;
    }
  }
}

void Net::lstm_dir_forward(const Tensor& wx, const Tensor& wh, const Tensor& bias,
                           const std::vector<double>& input, size_t in_dim, size_t length,
                           bool reverse, LstmDirCache& cache) const {
  const size_t H = config_.hidden;
  cache.gates.assign(length * 4 * H, 0.0);
  cache.c.assign(length * H, 0.0);
  cache.h.assign(length * H, 0.0);
  std::vector<double> a(4 * H);
  const std::vector<double> zeros(H, 0.0);
  for (size_t step = 0; step < length; ++step) {
    const size_t t = reverse ? length - 1 - step : step;
    const double* h_prev = step == 0 ? zeros.data() : cache.h.data() + (reverse ? t + 1 : t - 1) * H;
    const double* c_prev = step == 0 ? zeros.data() : cache.c.data() + (reverse ? t + 1 : t - 1) * H;
    std::copy(bias.value.begin(), bias.value.end(), a.begin());
    matvec_add(wx.value.data(), input.data() + t * in_dim, 4 * H, in_dim, a.data());
    matvec_add(wh.value.data(), h_prev, 4 * H, H, a.data());
    double* g = cache.gates.data() + t * 4 * H;
    for (size_t j = 0; j < H; ++j) {
      g[j] = sigmoid(a[j]);
      g[H + j] = sigmoid(a[H + j]);
      g[2 * H + j] = std::tanh(a[2 * H + j]);
      g[3 * H + j] = sigmoid(a[3 * H + j]);
      const double c = g[H + j] * c_prev[j] + g[j] * g[2 * H + j];
      cache.c[t * H + j] = c;
      cache.h[t * H + j] = g[3 * H + j] * std::tanh(c);
    }
  }
}

void Net::lstm_dir_backward(Tensor& wx, Tensor& wh, Tensor& bias, const std::vector<double>& input,
                            size_t in_dim, size_t length, bool reverse, const LstmDirCache& cache,
                            const std::vector<double>& dh_seq, std::vector<double>& dinput) const {
  const size_t H = config_.hidden;
  std::vector<double> dh_next(H, 0.0), dc_next(H, 0.0), da(4 * H), dh_prev(H);
  const std::vector<double> zeros(H, 0.0);
  for (size_t step = length; step-- > 0;) {
    const size_t t = reverse ? length - 1 - step : step;
    const double* h_prev = step == 0 ? zeros.data() : cache.h.data() + (reverse ? t + 1 : t - 1) * H;
    const double* c_prev = step == 0 ? zeros.data() : cache.c.data() + (reverse ? t + 1 : t - 1) * H;
    const double* g = cache.gates.data() + t * 4 * H;
    for (size_t j = 0; j < H; ++j) {
      const double dh = dh_seq[t * H + j] + dh_next[j];
      const double i = g[j], f = g[H + j], gg = g[2 * H + j], o = g[3 * H + j];
      const double tc = std::tanh(cache.c[t * H + j]);
      const double dc = dh * o * (1 - tc * tc) + dc_next[j];
      da[j] = dc * gg * i * (1 - i);
      da[H + j] = dc * c_prev[j] * f * (1 - f);
      da[2 * H + j] = dc * i * (1 - gg * gg);
      da[3 * H + j] = dh * tc * o * (1 - o);
      dc_next[j] = dc * f;
    }
    for (size_t r = 0; r < 4 * H; ++r) bias.grad[r] += da[r];
    matvec_backward(wx.value.data(), input.data() + t * in_dim, da.data(), 4 * H, in_dim,
                    wx.grad.data(), dinput.data() + t * in_dim);
    std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
    matvec_backward(wh.value.data(), h_prev, da.data(), 4 * H, H, wh.grad.data(), dh_prev.data());
    dh_next.swap(dh_prev);
  }
}

std::vector<std::array<double, kNumClasses>> Net::forward(
    const std::vector<std::vector<int32_t>>& batch, bool training, Rng* rng) {
  const size_t E = config_.embed_dim, F = config_.feature_maps, T = config_.seq_len;
  const size_t H = config_.hidden, V = config_.vocab_size;
  const size_t B = batch.size();
  if (B == 0) fail(ErrorCode::kInvalidArgument, "empty batch");
  cache_.assign(B, SampleCache{});
  last_training_ = training;
  const Tensor& emb = param("embedding");

  for (size_t s = 0; s < B; ++s) {
    auto& c = cache_[s];
    c.ids = batch[s];
    if (c.ids.size() != T) {
      fail(ErrorCode::kInvalidArgument, "sequence length " + std::to_string(c.ids.size()) +
                                            " does not match seq_len " + std::to_string(T));
    }
    c.x.assign(T * E, 0.0);
    for (size_t t = 0; t < T; ++t) {
      const int32_t id = c.ids[t];
      if (id < 0 || static_cast<size_t>(id) >= V) {
        fail(ErrorCode::kInvalidArgument, "token id " + std::to_string(id) + " out of range");
      }
      if (id != 0) c.length = t + 1;
      std::copy_n(emb.value.begin() + id * E, E, c.x.begin() + t * E);
    }
    for (size_t b = 0; b < 3; ++b) {
      if (config_.conv[b]) conv_forward(b, c);
    }
  }

  // Batchnorm over every (sample, position) pair, then global max-pool.
  for (size_t b = 0; b < 3; ++b) {
    if (!config_.conv[b]) continue;
    const size_t P = T - kKernelSizes[b] + 1;
    auto& st = bn_[b];
    if (config_.batchnorm) {
      st.mean.assign(F, 0.0);
      st.var.assign(F, 0.0);
      if (training) {
        const double n = static_cast<double>(B * P);
        for (const auto& c : cache_) {
          for (size_t i = 0; i < P * F; ++i) st.mean[i % F] += c.branches[b].z[i];
        }
        for (auto& m : st.mean) m /= n;
        for (const auto& c : cache_) {
          for (size_t i = 0; i < P * F; ++i) {
            const double d = c.branches[b].z[i] - st.mean[i % F];
            st.var[i % F] += d * d;
          }
        }
        for (auto& v : st.var) v /= n;
        for (size_t f = 0; f < F; ++f) {
          running_mean_[b][f] = (1 - kBnMomentum) * running_mean_[b][f] + kBnMomentum * st.mean[f];
          running_var_[b][f] = (1 - kBnMomentum) * running_var_[b][f] + kBnMomentum * st.var[f];
        }
      } else {
        st.mean = running_mean_[b];
        st.var = running_var_[b];
      }
    }
    const Tensor* gamma = config_.batchnorm ? &param(bn_name(b) + ".gamma") : nullptr;
    const Tensor* beta = config_.batchnorm ? &param(bn_name(b) + ".beta") : nullptr;
    for (auto& c : cache_) {
      auto& br = c.branches[b];
      if (config_.batchnorm) {
        br.xhat.resize(P * F);
        br.y.resize(P * F);
        for (size_t i = 0; i < P * F; ++i) {
          const size_t f = i % F;
          br.xhat[i] = (br.z[i] - st.mean[f]) / std::sqrt(st.var[f] + kBnEps);
          br.y[i] = gamma->value[f] * br.xhat[i] + beta->value[f];
        }
      } else {
        br.y = br.z;
      }
      global_max_pool(br.y, P, F, br.pooled, br.argmax);
    }
  }

  std::vector<std::array<double, kNumClasses>> out(B);
  for (size_t s = 0; s < B; ++s) {
    auto& c = cache_[s];
    if (config_.active_convs()) {
      for (size_t b = 0; b < 3; ++b) {
        if (config_.conv[b]) c.m0.insert(c.m0.end(), c.branches[b].pooled.begin(), c.branches[b].pooled.end());
      }
      c.fc0 = param("fc0.b").value;
      matvec_add(param("fc0.w").value.data(), c.m0.data(), H, c.m0.size(), c.fc0.data());
      for (auto& v : c.fc0) v = std::tanh(v);
    }
    if (config_.active_lstms()) {
      const std::vector<double>* input = &c.x;
      size_t in_dim = E;
      for (size_t l = 0; l < 2; ++l) {
        if (!config_.lstm[l]) continue;
        LstmLayerCache layer;
        layer.in_dim = in_dim;
        layer.input.assign(input->begin(), input->begin() + c.length * in_dim);
        for (bool rev : {false, true}) {
          const std::string n = lstm_name(l, rev);
          lstm_dir_forward(param(n + ".wx"), param(n + ".wh"), param(n + ".b"), layer.input, in_dim,
                           c.length, rev, rev ? layer.bwd : layer.fwd);
        }
        layer.out.assign(c.length * 2 * H, 0.0);
        for (size_t t = 0; t < c.length; ++t) {
          std::copy_n(layer.fwd.h.begin() + t * H, H, layer.out.begin() + t * 2 * H);
          std::copy_n(layer.bwd.h.begin() + t * H, H, layer.out.begin() + t * 2 * H + H);
        }
        c.lstm.push_back(std::move(layer));
        input = &c.lstm.back().out;
        in_dim = 2 * H;
      }
      c.lstm_out.assign(2 * H, 0.0);
      if (c.length > 0) {
        const auto& top = c.lstm.back();
        std::copy_n(top.fwd.h.begin() + (c.length - 1) * H, H, c.lstm_out.begin());
        std::copy_n(top.bwd.h.begin(), H, c.lstm_out.begin() + H);
      }
      c.fc1 = param("fc1.b").value;
      matvec_add(param("fc1.w").value.data(), c.lstm_out.data(), H, 2 * H, c.fc1.data());
      for (auto& v : c.fc1) v = std::tanh(v);
    }
    c.m1 = c.fc0;
    c.m1.insert(c.m1.end(), c.fc1.begin(), c.fc1.end());
    c.mask.assign(c.m1.size(), 1.0);
    if (training && config_.dropout > 0) {
      if (!rng) fail(ErrorCode::kInvalidArgument, "dropout in training mode needs an rng");
      const double keep = 1.0 - config_.dropout;
      for (auto& m : c.mask) m = rng->uniform() < keep ? 1.0 / keep : 0.0;
    }
    c.dropped.resize(c.m1.size());
    for (size_t j = 0; j < c.m1.size(); ++j) c.dropped[j] = c.m1[j] * c.mask[j];
    const Tensor& w2 = param("fc2.w");
    const Tensor& b2 = param("fc2.b");
    for (int k = 0; k < kNumClasses; ++k) {
      double z = b2.value[k];
      for (size_t j = 0; j < c.dropped.size(); ++j) z += w2.value[k * c.dropped.size() + j] * c.dropped[j];
      c.logits[k] = z;
    }
    if (config_.activation == Activation::kSoftmax) {
      const double m = *std::max_element(c.logits.begin(), c.logits.end());
      double sum = 0;
      for (int k = 0; k < kNumClasses; ++k) sum += (c.probs[k] = std::exp(c.logits[k] - m));
      for (auto& p : c.probs) p /= sum;
    } else {
      for (int k = 0; k < kNumClasses; ++k) c.probs[k] = sigmoid(c.logits[k]);
    }
    out[s] = c.probs;
  }
  return out;
}

double Net::loss(const std::vector<Label>& labels) const {
  if (labels.size() != cache_.size()) fail(ErrorCode::kInvalidArgument, "label count mismatch");
  double total = 0;
  for (size_t s = 0; s < cache_.size(); ++s) {
    const auto& z = cache_[s].logits;
    const int y = index_of(labels[s]);
    if (config_.activation == Activation::kSoftmax) {
      const double m = *std::max_element(z.begin(), z.end());
      double sum = 0;
      for (double v : z) sum += std::exp(v - m);
      total += m + std::log(sum) - z[y];
    } else {
      for (int k = 0; k < kNumClasses; ++k) total += softplus(z[k]) - (k == y ? z[k] : 0.0);
    }
  }
  return total / static_cast<double>(cache_.size());
}

void Net::backward(const std::vector<Label>& labels, double scale) {
  const size_t B = cache_.size();
  if (labels.size() != B || B == 0) fail(ErrorCode::kInvalidArgument, "label count mismatch");
  const size_t E = config_.embed_dim, F = config_.feature_maps, T = config_.seq_len;
  const size_t H = config_.hidden;
  Tensor& emb = param("embedding");
  std::vector<std::array<std::vector<double>, 3>> dy(B);  // d loss / d bn output

  for (size_t s = 0; s < B; ++s) {
    auto& c = cache_[s];
    const int y = index_of(labels[s]);
    // Softmax + cross-entropy and sigmoid + binary cross-entropy share this form.
    std::array<double, kNumClasses> dz;
    for (int k = 0; k < kNumClasses; ++k) {
      dz[k] = scale * (c.probs[k] - (k == y ? 1.0 : 0.0)) / static_cast<double>(B);
    }
    Tensor& w2 = param("fc2.w");
    Tensor& b2 = param("fc2.b");
    std::vector<double> dm1(c.m1.size(), 0.0);
    for (int k = 0; k < kNumClasses; ++k) b2.grad[k] += dz[k];
    matvec_backward(w2.value.data(), c.dropped.data(), dz.data(), kNumClasses, c.dropped.size(),
                    w2.grad.data(), dm1.data());
    for (size_t j = 0; j < dm1.size(); ++j) dm1[j] *= c.mask[j];

    size_t offset = 0;
    if (config_.active_convs()) {
      std::vector<double> da(H), dm0(c.m0.size(), 0.0);
      for (size_t j = 0; j < H; ++j) da[j] = dm1[j] * (1 - c.fc0[j] * c.fc0[j]);
      Tensor& w0 = param("fc0.w");
      Tensor& b0 = param("fc0.b");
      for (size_t j = 0; j < H; ++j) b0.grad[j] += da[j];
      matvec_backward(w0.value.data(), c.m0.data(), da.data(), H, c.m0.size(), w0.grad.data(), dm0.data());
      size_t pos = 0;
      for (size_t b = 0; b < 3; ++b) {
        if (!config_.conv[b]) continue;
        const size_t P = T - kKernelSizes[b] + 1;
        dy[s][b].assign(P * F, 0.0);
        for (size_t f = 0; f < F; ++f) dy[s][b][c.branches[b].argmax[f] * F + f] = dm0[pos + f];
        pos += F;
      }
      offset = H;
    }
    if (config_.active_lstms()) {
      std::vector<double> da(H), dlstm(2 * H, 0.0);
      for (size_t j = 0; j < H; ++j) da[j] = dm1[offset + j] * (1 - c.fc1[j] * c.fc1[j]);
      Tensor& w1 = param("fc1.w");
      Tensor& b1 = param("fc1.b");
      for (size_t j = 0; j < H; ++j) b1.grad[j] += da[j];
      matvec_backward(w1.value.data(), c.lstm_out.data(), da.data(), H, 2 * H, w1.grad.data(), dlstm.data());
      if (c.length > 0) {
        // Gradient w.r.t. the top layer's output sequence.
        std::vector<double> dout(c.length * 2 * H, 0.0);
        std::copy_n(dlstm.begin(), H, dout.begin() + (c.length - 1) * 2 * H);
        std::copy_n(dlstm.begin() + H, H, dout.begin() + H);
        size_t li = c.lstm.size();
        for (size_t l = 2; l-- > 0;) {
          if (!config_.lstm[l]) continue;
          const auto& layer = c.lstm[--li];
          std::vector<double> dinput(c.length * layer.in_dim, 0.0);
          for (bool rev : {false, true}) {
            std::vector<double> dh(c.length * H);
            for (size_t t = 0; t < c.length; ++t) {
              std::copy_n(dout.begin() + t * 2 * H + (rev ? H : 0), H, dh.begin() + t * H);
            }
            const std::string n = lstm_name(l, rev);
            lstm_dir_backward(param(n + ".wx"), param(n + ".wh"), param(n + ".b"), layer.input,
                              layer.in_dim, c.length, rev, rev ? layer.bwd : layer.fwd, dh, dinput);
          }
          dout.swap(dinput);
        }
        // dout now holds the gradient w.r.t. the embedded sequence.
        for (size_t t = 0; t < c.length; ++t) {
          const int32_t id = c.ids[t];
          if (id == 0) continue;
          for (size_t e = 0; e < E; ++e) emb.grad[id * E + e] += dout[t * E + e];
        }
      }
    }
  }

  for (size_t b = 0; b < 3; ++b) {
    if (!config_.conv[b]) continue;
    const size_t k = kKernelSizes[b];
    const size_t P = T - k + 1;
    std::vector<std::vector<double>> dz(B);
    if (config_.batchnorm) {
      Tensor& gamma = param(bn_name(b) + ".gamma");
      Tensor& beta = param(bn_name(b) + ".beta");
      const auto& st = bn_[b];
      std::vector<double> sum_dxhat(F, 0.0), sum_dxhat_xhat(F, 0.0);
      for (size_t s = 0; s < B; ++s) {
        const auto& br = cache_[s].branches[b];
        for (size_t i = 0; i < P * F; ++i) {
          const size_t f = i % F;
          const double g = dy[s][b][i];
          beta.grad[f] += g;
          gamma.grad[f] += g * br.xhat[i];
          const double dxh = g * gamma.value[f];
          sum_dxhat[f] += dxh;
          sum_dxhat_xhat[f] += dxh * br.xhat[i];
        }
      }
      const double n = static_cast<double>(B * P);
      for (size_t s = 0; s < B; ++s) {
        const auto& br = cache_[s].branches[b];
        dz[s].resize(P * F);
        for (size_t i = 0; i < P * F; ++i) {
          const size_t f = i % F;
          const double inv_std = 1.0 / std::sqrt(st.var[f] + kBnEps);
          const double dxh = dy[s][b][i] * gamma.value[f];
          dz[s][i] = last_training_
                         ? inv_std * (dxh - sum_dxhat[f] / n - br.xhat[i] * sum_dxhat_xhat[f] / n)
                         : inv_std * dxh;
        }
      }
    } else {
      for (size_t s = 0; s < B; ++s) dz[s] = dy[s][b];
    }
    Tensor& w = param(conv_name(b) + ".w");
    Tensor& bias = param(conv_name(b) + ".b");
    for (size_t s = 0; s < B; ++s) {
      const auto& c = cache_[s];
      std::vector<double> dx(T * E, 0.0);
      for (size_t t = 0; t < P; ++t) {
        const double* x = c.x.data() + t * E;
        double* dxt = dx.data() + t * E;
        for (size_t f = 0; f < F; ++f) {
          const double g = dz[s][t * F + f];
          if (g == 0.0) continue;
          bias.grad[f] += g;
          double* dw = w.grad.data() + f * k * E;
          const double* wf = w.value.data() + f * k * E;
          for (size_t j = 0; j < k * E; ++j) {
            dw[j] += g * x[j];
            dxt[j] += g * wf[j];
          }
        }
      }
      for (size_t t = 0; t < T; ++t) {
        const int32_t id = c.ids[t];
        if (id == 0) continue;
        for (size_t e = 0; e < E; ++e) emb.grad[id * E + e] += dx[t * E + e];
      }
    }
  }
}

const std::vector<double>& Net::pooled(size_t s, size_t branch) const {
  return cache_.at(s).branches.at(branch).pooled;
}
const std::vector<double>& Net::bn_output(size_t s, size_t branch) const {
  return cache_.at(s).branches.at(branch).y;
}
const std::vector<double>& Net::lstm_output(size_t s) const { return cache_.at(s).lstm_out; }
const std::vector<double>& Net::merged(size_t s) const { return cache_.at(s).m1; }

std::array<double, kNumClasses> Net::predict_proba(const std::vector<int32_t>& ids) {
  return forward({ids}, false)[0];
}

Label Net::predict(const std::vector<int32_t>& ids) {
  return linear::argmax_severity(predict_proba(ids));
}

void Net::save(std::ostream& out) const {
  const auto& c = config_;
  out << kNetMagic << " 1\n";
  out << "config vocab_size=" << c.vocab_size << " embed_dim=" << c.embed_dim
      << " seq_len=" << c.seq_len << " conv=" << bits(c.conv.data(), 3)
      << " feature_maps=" << c.feature_maps << " batchnorm=" << (c.batchnorm ? 1 : 0)
      << " lstm=" << bits(c.lstm.data(), 2) << " hidden=" << c.hidden
      << " activation=" << (c.activation == Activation::kSoftmax ? "softmax" : "sigmoid")
      << " dropout=" << format_double(c.dropout) << " seed=" << c.seed << "\n";
  auto block = [&](const std::string& header, const std::vector<double>& v) {
    out << header << ' ' << v.size() << '\n';
    for (size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << format_double(v[i]);
    out << '\n';
  };
  for (const auto& t : params_) block("param " + t.name, t.value);
  for (size_t b = 0; b < 3; ++b) {
    if (!c.conv[b] || !c.batchnorm) continue;
    block("running_mean " + std::to_string(b), running_mean_[b]);
    block("running_var " + std::to_string(b), running_var_[b]);
  }
  out << "end\n";
}

void Net::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  save(out);
  if (!out) fail(ErrorCode::kIo, "write failed: " + path.string());
}

Net Net::load(std::istream& in, const std::string& name) {
  std::string line;
  auto bad = [&](const std::string& what) { fail(ErrorCode::kParse, name + ": " + what); };
  if (!std::getline(in, line) || line != std::string(kNetMagic) + " 1") bad("not a version-1 network");
  if (!std::getline(in, line) || line.rfind("config ", 0) != 0) bad("missing config line");
  std::map<std::string, std::string> kv;
  {
    std::istringstream ls(line.substr(7));
    for (std::string tok; ls >> tok;) {
      auto eq = tok.find('=');
      if (eq == std::string::npos) bad("bad config token '" + tok + "'");
      kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
  }
  auto get = [&](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) bad("config lacks " + key);
    return it->second;
  };
  auto flags = [&](const std::string& key, bool* dst, size_t n) {
    std::string v = get(key);
    if (v.size() != 2 * n - 1) bad("bad " + key);
    for (size_t i = 0; i < n; ++i) dst[i] = v[2 * i] == '1';
  };
  NetConfig c;
  c.vocab_size = static_cast<size_t>(parse_int(get("vocab_size")));
  c.embed_dim = static_cast<size_t>(parse_int(get("embed_dim")));
  c.seq_len = static_cast<size_t>(parse_int(get("seq_len")));
  flags("conv", c.conv.data(), 3);
  c.feature_maps = static_cast<size_t>(parse_int(get("feature_maps")));
  c.batchnorm = get("batchnorm") == "1";
  flags("lstm", c.lstm.data(), 2);
  c.hidden = static_cast<size_t>(parse_int(get("hidden")));
  const std::string act = get("activation");
  if (act != "softmax" && act != "sigmoid") bad("unknown activation " + act);
  c.activation = act == "softmax" ? Activation::kSoftmax : Activation::kSigmoid;
  c.dropout = parse_double(get("dropout"));
  c.seed = static_cast<uint64_t>(std::stoull(get("seed")));
  Net net(c);

  auto read_block = [&](const std::string& header, std::vector<double>& dst) {
    if (!std::getline(in, line)) bad("truncated at " + header);
    std::istringstream hs(line);
    std::string a, b;
    size_t count = 0;
    hs >> a >> b >> count;
    if (a + " " + b != header || count != dst.size()) bad("expected block '" + header + "'");
    if (!std::getline(in, line)) bad("truncated block " + header);
    std::istringstream vs(line);
    for (size_t i = 0; i < count; ++i) {
      std::string tok;
      if (!(vs >> tok)) bad("short block " + header);
      dst[i] = parse_double(tok);
    }
  };
  for (auto& t : net.params_) read_block("param " + t.name, t.value);
  for (size_t b = 0; b < 3; ++b) {
    if (!c.conv[b] || !c.batchnorm) continue;
    read_block("running_mean " + std::to_string(b), net.running_mean_[b]);
    read_block("running_var " + std::to_string(b), net.running_var_[b]);
  }
  if (!std::getline(in, line) || line != "end") bad("missing end marker");
  return net;
}

Net Net::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kNotFound, "network not found: " + path.string());
  return load(in, path.string());
}

namespace {

class OptimizerState {
 public:
  OptimizerState(const TrainHyper& h, std::vector<Tensor*> params)
      : hyper_(h), params_(std::move(params)) {
    if (h.optimizer == Optimizer::kAdam) {
      for (auto* p : params_) {
        m_.emplace_back(p->size(), 0.0);
        v_.emplace_back(p->size(), 0.0);
      }
    }
  }

  void step() {
    const double lr = hyper_.learning_rate;
    if (hyper_.optimizer == Optimizer::kSgd) {
      for (auto* p : params_) {
        for (size_t i = 0; i < p->size(); ++i) p->value[i] -= lr * p->grad[i];
      }
      return;
    }
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    ++t_;
    const double c1 = 1 - std::pow(b1, t_), c2 = 1 - std::pow(b2, t_);
    for (size_t k = 0; k < params_.size(); ++k) {
      auto* p = params_[k];
      for (size_t i = 0; i < p->size(); ++i) {
        const double g = p->grad[i];
        m_[k][i] = b1 * m_[k][i] + (1 - b1) * g;
        v_[k][i] = b2 * v_[k][i] + (1 - b2) * g * g;
        p->value[i] -= lr * (m_[k][i] / c1) / (std::sqrt(v_[k][i] / c2) + eps);
      }
    }
  }

 private:
  TrainHyper hyper_;
  std::vector<Tensor*> params_;
  std::vector<std::vector<double>> m_, v_;
  int t_ = 0;
};

double train_accuracy(Net& net, const std::vector<Sample>& data) {
  size_t correct = 0;
  for (size_t s = 0; s < data.size(); s += 64) {
    std::vector<std::vector<int32_t>> batch;
    for (size_t i = s; i < std::min(data.size(), s + 64); ++i) batch.push_back(data[i].ids);
    auto probs = net.forward(batch, false);
    for (size_t i = 0; i < probs.size(); ++i) {
      correct += linear::argmax_severity(probs[i]) == data[s + i].label;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace

NeuralTrainResult train(NetConfig config, const TrainHyper& hyper, const std::vector<Sample>& data,
                        const TrainOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  hyper.validate();
  if (data.empty()) fail(ErrorCode::kInvalidArgument, "empty training set");
  config.dropout = hyper.dropout;
  config.hidden = hyper.hidden;
  config.seed = hyper.seed;
  NeuralTrainResult out{Net(config), {}};
  Net& net = out.net;
  OptimizerState opt(hyper, net.parameters());
  Rng rng(hyper.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<size_t> order(data.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Tensor* emb = net.find("embedding");

  for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0;
    for (size_t s = 0; s < order.size(); s += hyper.batch_size) {
      std::vector<std::vector<int32_t>> batch;
      std::vector<Label> labels;
      for (size_t i = s; i < std::min(order.size(), s + hyper.batch_size); ++i) {
        batch.push_back(data[order[i]].ids);
        labels.push_back(data[order[i]].label);
      }
      net.forward(batch, true, &rng);
      const double l = net.loss(labels);
      if (!std::isfinite(l)) {
        fail(ErrorCode::kInvalidArgument, "non-finite loss at epoch " + std::to_string(epoch));
      }
      loss_sum += l * static_cast<double>(batch.size());
      net.zero_grad();
      net.backward(labels);
      opt.step();
      std::fill(emb->value.begin(), emb->value.begin() + config.embed_dim, 0.0);
    }
    EpochStats st{loss_sum / static_cast<double>(data.size()), train_accuracy(net, data)};
    out.report.epochs.push_back(st);
    out.report.epochs_run = epoch;
    if (st.train_accuracy >= options.stop_at_accuracy) {
      out.report.reached_target = true;
      break;
    }
  }
  out.report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

linear::Metrics evaluate(Net& net, const std::vector<Sample>& data) {
  std::vector<Label> gold, pred;
  for (const auto& s : data) {
    gold.push_back(s.label);
    pred.push_back(net.predict(s.ids));
  }
  return linear::metrics_from_predictions(gold, pred);
}

TokenIndex TokenIndex::build(const std::vector<std::vector<std::string>>& docs, size_t max_size) {
  if (max_size < 2) fail(ErrorCode::kInvalidArgument, "token index needs room for pad and unk");
  std::unordered_map<std::string, size_t> counts;
  for (const auto& d : docs) {
    for (const auto& t : d) ++counts[t];
  }
  std::vector<std::pair<std::string, size_t>> sorted(counts.begin(), counts.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (sorted.size() > max_size - 2) sorted.resize(max_size - 2);
  TokenIndex idx;
  for (auto& [tok, n] : sorted) {
    idx.ids_.emplace(tok, static_cast<int32_t>(idx.tokens_.size() + 2));
    idx.tokens_.push_back(tok);
  }
  return idx;
}

std::vector<int32_t> TokenIndex::encode(const std::vector<std::string>& tokens, size_t seq_len) const {
  std::vector<int32_t> ids(seq_len, kPad);
  for (size_t i = 0; i < std::min(seq_len, tokens.size()); ++i) {
    auto it = ids_.find(tokens[i]);
    ids[i] = it == ids_.end() ? kUnk : it->second;
  }
  return ids;
}

void TokenIndex::save(std::ostream& out) const {
  out << "hsr-tokens 1 " << tokens_.size() << '\n';
  for (const auto& t : tokens_) out << t << '\n';
}

TokenIndex TokenIndex::load(std::istream& in, const std::string& name) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("hsr-tokens 1 ", 0) != 0) {
    fail(ErrorCode::kParse, name + ": not a token index");
  }
  const auto n = static_cast<size_t>(parse_int(line.substr(13)));
  TokenIndex idx;
  for (size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) fail(ErrorCode::kParse, name + ": truncated token index");
    idx.ids_.emplace(line, static_cast<int32_t>(i + 2));
    idx.tokens_.push_back(line);
  }
  return idx;
}

std::vector<Sample> planted_signal_set(size_t n, size_t seq_len, size_t vocab_size, uint64_t seed) {
  if (vocab_size < 8) fail(ErrorCode::kInvalidArgument, "planted set needs vocab_size >= 8");
  if (seq_len < 4) fail(ErrorCode::kInvalidArgument, "planted set needs seq_len >= 4");
  Rng rng(seed);
  std::vector<Sample> out;
  for (size_t i = 0; i < n; ++i) {
    Sample s;
    s.label = kAllLabels[i % kNumClasses];
    const size_t len = seq_len / 2 + rng.below(seq_len - seq_len / 2 + 1);
    s.ids.assign(seq_len, TokenIndex::kPad);
    for (size_t t = 0; t < len; ++t) s.ids[t] = static_cast<int32_t>(5 + rng.below(vocab_size - 5));
    const auto trigger = static_cast<int32_t>(2 + index_of(s.label));
    s.ids[rng.below(len)] = trigger;
    s.ids[rng.below(len)] = trigger;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<AblationConfig> standard_ablation(const NetConfig& full) {
  auto with = [&](std::array<bool, 3> conv, std::array<bool, 2> lstm) {
    NetConfig c = full;
    c.conv = conv;
    c.lstm = lstm;
    return c;
  };
  return {
      {"Without C1 and C2 and C3", with({false, false, false}, {true, true})},
      {"C1 only", with({true, false, false}, {true, true})},
      {"C1 and C2", with({true, true, false}, {true, true})},
      {"Without bl0 and bl1", with({true, true, true}, {false, false})},
      {"bl0 only", with({true, true, true}, {true, false})},
  };
}

std::vector<AblationRow> ablate(const std::vector<AblationConfig>& configs, const TrainHyper& hyper,
                                const std::vector<Sample>& train_set,
                                const std::vector<Sample>& test_set, const TrainOptions& options) {
  if (configs.size() < 2) fail(ErrorCode::kInvalidArgument, "ablation needs at least two configs");
  std::vector<AblationRow> rows;
  for (const auto& c : configs) {
    auto result = train(c.config, hyper, train_set, options);
    AblationRow row;
    row.layers = c.layers;
    row.config = result.net.config();
    row.metrics = evaluate(result.net, test_set);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_ablation(const std::vector<AblationRow>& rows) {
  size_t width = 6;
  for (const auto& r : rows) width = std::max(width, r.layers.size());
  auto cell = [](const linear::Metrics& m, Label l) {
    if (m.excluded[index_of(l)]) return std::string("-");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", m.f1[index_of(l)]);
    return std::string(buf);
  };
  char buf[512];
  std::string out;
  std::snprintf(buf, sizeof buf, "| %-*s | %-8s | %-10s | %-7s | %-8s | %-4s |\n",
                static_cast<int>(width), "Layers", "Model", "f1-Neither", "f1-Hate", "f1-Abuse", "Acc");
  out += buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "| %-*s | %-8s | %-10s | %-7s | %-8s | %.2f |\n",
                  static_cast<int>(width), r.layers.c_str(), r.model.c_str(),
                  cell(r.metrics, Label::kNeither).c_str(), cell(r.metrics, Label::kHate).c_str(),
                  cell(r.metrics, Label::kAbusive).c_str(), r.metrics.accuracy);
    out += buf;
  }
  return out;
}

std::string ablation_json(const std::vector<AblationRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    auto f1 = [&](Label l) -> nlohmann::json {
      if (m.excluded[index_of(l)]) return nullptr;
      return m.f1[index_of(l)];
    };
    arr.push_back({{"layers", r.layers},
                   {"model", r.model},
                   {"f1_neither", f1(Label::kNeither)},
                   {"f1_hate", f1(Label::kHate)},
                   {"f1_abuse", f1(Label::kAbusive)},
                   {"accuracy", m.accuracy},
                   {"concat_width", r.config.concat_width()},
                   {"parameters", r.config.parameter_count()}});
  }
  return arr.dump(2);
}

}  // namespace hsr::neural
