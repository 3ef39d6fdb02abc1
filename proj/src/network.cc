// Copyright 2026 The fedmia Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fedmia/network.h"

#include <algorithm>
#include <cmath>
#include <Eigen/Core>

#include "fedmia/error.h"
#include "fedmia/loss.h"
#include "fedmia/rng.h"

namespace fedmia {
namespace {

using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatMap = Eigen::Map<RowMat>;
using ConstRowMatMap = Eigen::Map<const RowMat>;

// Upper bound on the im2col buffer, in doubles. Long series (the baseline
// attack sees inputs of ~10^5 values) are processed a few samples at a time.
constexpr size_t kColumnBudget = size_t{1} << 21;

Shape WithBatch(size_t batch, const Shape& sample) {
  Shape s;
  s.reserve(sample.size() + 1);
  s.push_back(batch);
  s.insert(s.end(), sample.begin(), sample.end());
  return s;
}

// ---------------------------------------------------------------- Dense

Tensor DenseForward(const Dense& d, const Tensor& x, const Tensor& w,
                    const Tensor& b) {
  const size_t batch = x.dim(0);
  Tensor y({batch, d.out});
  ConstRowMatMap xm(x.raw(), batch, d.in);
  ConstRowMatMap wm(w.raw(), d.out, d.in);
  RowMatMap ym(y.raw(), batch, d.out);
  ym.noalias() = xm * wm.transpose();
  ym.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(b.raw(), d.out);
  return y;
}

Tensor DenseBackward(const Dense& d, const Tensor& x, const Tensor& w,
                     const Tensor& g, Tensor& dw, Tensor& db, bool need_dx) {
  const size_t batch = x.dim(0);
  ConstRowMatMap xm(x.raw(), batch, d.in);
  ConstRowMatMap wm(w.raw(), d.out, d.in);
  ConstRowMatMap gm(g.raw(), batch, d.out);
  RowMatMap dwm(dw.raw(), d.out, d.in);
  dwm.noalias() += gm.transpose() * xm;
  Eigen::Map<Eigen::RowVectorXd>(db.raw(), d.out) += gm.colwise().sum();
  if (!need_dx) return {};
  Tensor dx(x.shape());
  RowMatMap dxm(dx.raw(), batch, d.in);
  dxm.noalias() = gm * wm;
  return dx;
}

// ---------------------------------------------------------------- Conv1D

struct ConvGeometry {
  size_t batch, in_ch, out_ch, kernel, length, out_length, pad_left;
  size_t chunk;  // samples per im2col block
};

ConvGeometry Geometry(const Conv1D& c, const Tensor& x) {
  ConvGeometry g{};
  g.batch = x.dim(0);
  g.in_ch = c.in_channels;
  g.out_ch = c.out_channels;
  g.kernel = c.kernel;
  g.length = x.dim(2);
  g.pad_left = c.padding == Padding::kSame ? (c.kernel - 1) / 2 : 0;
  const size_t padded =
      g.length + (c.padding == Padding::kSame ? c.kernel - 1 : 0);
  g.out_length = padded - c.kernel + 1;
  g.chunk = std::max<size_t>(
      1, kColumnBudget / std::max<size_t>(1, g.in_ch * g.kernel * g.out_length));
  return g;
}

// Fills col[(ci*K + k), bb*Lout + t] = x[b0+bb, ci, t + k - pad] (0 outside).
void Im2Col(const ConvGeometry& g, const double* x, size_t b0, size_t n,
            AlignedVector& col) {
  const size_t cols = n * g.out_length;
  col.assign(g.in_ch * g.kernel * cols, 0.0);
  for (size_t bb = 0; bb < n; ++bb) {
    for (size_t ci = 0; ci < g.in_ch; ++ci) {
      const double* src = x + ((b0 + bb) * g.in_ch + ci) * g.length;
      for (size_t k = 0; k < g.kernel; ++k) {
        double* dst = col.data() + (ci * g.kernel + k) * cols + bb * g.out_length;
        // Valid t satisfies 0 <= t + k - pad < length.
        const ptrdiff_t shift =
            static_cast<ptrdiff_t>(k) - static_cast<ptrdiff_t>(g.pad_left);
        const ptrdiff_t t_begin = std::max<ptrdiff_t>(0, -shift);
        const ptrdiff_t t_end = std::min<ptrdiff_t>(
            static_cast<ptrdiff_t>(g.out_length),
            static_cast<ptrdiff_t>(g.length) - shift);
        for (ptrdiff_t t = t_begin; t < t_end; ++t) dst[t] = src[t + shift];
      }
    }
  }
}

Tensor ConvForward(const Conv1D& c, const Tensor& x, const Tensor& w,
                   const Tensor& b) {
  const ConvGeometry g = Geometry(c, x);
  Tensor y({g.batch, g.out_ch, g.out_length});
  ConstRowMatMap wm(w.raw(), g.out_ch, g.in_ch * g.kernel);
  AlignedVector col;
  RowMat block;
  for (size_t b0 = 0; b0 < g.batch; b0 += g.chunk) {
    const size_t n = std::min(g.chunk, g.batch - b0);
    const size_t cols = n * g.out_length;
    Im2Col(g, x.raw(), b0, n, col);
    ConstRowMatMap colm(col.data(), g.in_ch * g.kernel, cols);
    block.noalias() = wm * colm;
    for (size_t bb = 0; bb < n; ++bb) {
      for (size_t co = 0; co < g.out_ch; ++co) {
        double* dst = y.raw() + ((b0 + bb) * g.out_ch + co) * g.out_length;
        const double* src = block.data() + co * cols + bb * g.out_length;
        for (size_t t = 0; t < g.out_length; ++t) dst[t] = src[t] + b[co];
      }
    }
  }
  return y;
}

Tensor ConvBackward(const Conv1D& c, const Tensor& x, const Tensor& w,
                    const Tensor& grad, Tensor& dw, Tensor& db, bool need_dx) {
  const ConvGeometry g = Geometry(c, x);
  ConstRowMatMap wm(w.raw(), g.out_ch, g.in_ch * g.kernel);
  RowMatMap dwm(dw.raw(), g.out_ch, g.in_ch * g.kernel);
  Eigen::Map<Eigen::VectorXd> dbv(db.raw(), g.out_ch);
  Tensor dx;
  if (need_dx) dx = Tensor(x.shape());
  AlignedVector col;
  RowMat dy;
  RowMat dcol;
  for (size_t b0 = 0; b0 < g.batch; b0 += g.chunk) {
    const size_t n = std::min(g.chunk, g.batch - b0);
    const size_t cols = n * g.out_length;
    Im2Col(g, x.raw(), b0, n, col);
    ConstRowMatMap colm(col.data(), g.in_ch * g.kernel, cols);
    dy.resize(g.out_ch, cols);
    for (size_t bb = 0; bb < n; ++bb) {
      for (size_t co = 0; co < g.out_ch; ++co) {
        const double* src =
            grad.raw() + ((b0 + bb) * g.out_ch + co) * g.out_length;
        double* dst = dy.data() + co * cols + bb * g.out_length;
        std::copy(src, src + g.out_length, dst);
      }
    }
    dwm.noalias() += dy * colm.transpose();
    dbv += dy.rowwise().sum();
    if (!need_dx) continue;
    dcol.noalias() = wm.transpose() * dy;
    for (size_t bb = 0; bb < n; ++bb) {
      for (size_t ci = 0; ci < g.in_ch; ++ci) {
        double* dst = dx.raw() + ((b0 + bb) * g.in_ch + ci) * g.length;
        for (size_t k = 0; k < g.kernel; ++k) {
          const double* src =
              dcol.data() + (ci * g.kernel + k) * cols + bb * g.out_length;
          const ptrdiff_t shift =
              static_cast<ptrdiff_t>(k) - static_cast<ptrdiff_t>(g.pad_left);
          const ptrdiff_t t_begin = std::max<ptrdiff_t>(0, -shift);
          const ptrdiff_t t_end = std::min<ptrdiff_t>(
              static_cast<ptrdiff_t>(g.out_length),
              static_cast<ptrdiff_t>(g.length) - shift);
          for (ptrdiff_t t = t_begin; t < t_end; ++t) dst[t + shift] += src[t];
        }
      }
    }
  }
  return dx;
}

// ---------------------------------------------------------------- BatchNorm

struct BnView {
  size_t batch, channels, length;
};

BnView ViewOf(const Tensor& x) {
  return {x.dim(0), x.dim(1), x.rank() == 3 ? x.dim(2) : 1};
}

// Per-channel helpers index x[b, c, t] as ((b * C) + c) * L + t.
Tensor BatchNormForward(const BatchNorm1D& bn, const Tensor& x,
                        const Tensor& gamma, const Tensor& beta,
                        const Tensor& running_mean, const Tensor& running_var,
                        bool training, Tensor* new_mean, Tensor* new_var,
                        std::vector<double>* xhat_out,
                        std::vector<double>* inv_std_out) {
  const BnView v = ViewOf(x);
  const double count = static_cast<double>(v.batch * v.length);
  Tensor y(x.shape());
  std::vector<double> xhat(x.size());
  std::vector<double> inv_std(v.channels);
  for (size_t c = 0; c < v.channels; ++c) {
    double mean = 0.0;
    double var = 0.0;
    if (training) {
      for (size_t b = 0; b < v.batch; ++b) {
        const double* p = x.raw() + (b * v.channels + c) * v.length;
        for (size_t t = 0; t < v.length; ++t) mean += p[t];
      }
      mean /= count;
      for (size_t b = 0; b < v.batch; ++b) {
        const double* p = x.raw() + (b * v.channels + c) * v.length;
        for (size_t t = 0; t < v.length; ++t) {
          const double d = p[t] - mean;
          var += d * d;
        }
      }
      var /= count;
      if (new_mean != nullptr) {
        const double unbiased = count > 1.0 ? var * count / (count - 1.0) : var;
        (*new_mean)[c] =
            (1.0 - bn.momentum) * running_mean[c] + bn.momentum * mean;
        (*new_var)[c] =
            (1.0 - bn.momentum) * running_var[c] + bn.momentum * unbiased;
      }
    } else {
      mean = running_mean[c];
      var = running_var[c];
    }
    const double is = 1.0 / std::sqrt(var + bn.eps);
    inv_std[c] = is;
    for (size_t b = 0; b < v.batch; ++b) {
      const size_t base = (b * v.channels + c) * v.length;
      for (size_t t = 0; t < v.length; ++t) {
        const double h = (x[base + t] - mean) * is;
        xhat[base + t] = h;
        y[base + t] = gamma[c] * h + beta[c];
      }
    }
  }
  if (xhat_out != nullptr) *xhat_out = std::move(xhat);
  if (inv_std_out != nullptr) *inv_std_out = std::move(inv_std);
  return y;
}

Tensor BatchNormBackward(const Tensor& x, const Tensor& gamma,
                         const std::vector<double>& xhat,
                         const std::vector<double>& inv_std,
                         const Tensor& grad, bool training, Tensor& dgamma,
                         Tensor& dbeta, bool need_dx) {
  const BnView v = ViewOf(x);
  const double count = static_cast<double>(v.batch * v.length);
  Tensor dx;
  if (need_dx) dx = Tensor(x.shape());
  for (size_t c = 0; c < v.channels; ++c) {
    double sum_g = 0.0;
    double sum_gx = 0.0;
    for (size_t b = 0; b < v.batch; ++b) {
      const size_t base = (b * v.channels + c) * v.length;
      for (size_t t = 0; t < v.length; ++t) {
        sum_g += grad[base + t];
        sum_gx += grad[base + t] * xhat[base + t];
      }
    }
    dgamma[c] += sum_gx;
    dbeta[c] += sum_g;
    if (!need_dx) continue;
    const double scale = gamma[c] * inv_std[c];
    for (size_t b = 0; b < v.batch; ++b) {
      const size_t base = (b * v.channels + c) * v.length;
      for (size_t t = 0; t < v.length; ++t) {
        if (training) {
          dx[base + t] = scale / count *
                         (count * grad[base + t] - sum_g -
                          xhat[base + t] * sum_gx);
        } else {
          dx[base + t] = scale * grad[base + t];
        }
      }
    }
  }
  return dx;
}

// ---------------------------------------------------------------- Softmax

Tensor SoftmaxForward(const Tensor& x) {
  Tensor y(x.shape());
  const size_t width = x.row_size();
  for (size_t r = 0; r < x.rows(); ++r) {
    auto in = x.row(r);
    auto out = y.row(r);
    const double peak = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (size_t i = 0; i < width; ++i) {
      out[i] = std::exp(in[i] - peak);
      total += out[i];
    }
    for (size_t i = 0; i < width; ++i) out[i] /= total;
  }
  return y;
}

Tensor SoftmaxBackward(const Tensor& s, const Tensor& grad) {
  Tensor dx(s.shape());
  for (size_t r = 0; r < s.rows(); ++r) {
    auto sr = s.row(r);
    auto gr = grad.row(r);
    auto out = dx.row(r);
    double dot = 0.0;
    for (size_t i = 0; i < sr.size(); ++i) dot += sr[i] * gr[i];
    for (size_t i = 0; i < sr.size(); ++i) out[i] = sr[i] * (gr[i] - dot);
  }
  return dx;
}

// ---------------------------------------------------------------- Pooling

Tensor AvgPoolForward(const Tensor& x, size_t window) {
  const size_t batch = x.dim(0), ch = x.dim(1), len = x.dim(2);
  const size_t out_len = len / window;
  Tensor y({batch, ch, out_len});
  const double inv = 1.0 / static_cast<double>(window);
  for (size_t bc = 0; bc < batch * ch; ++bc) {
    const double* src = x.raw() + bc * len;
    double* dst = y.raw() + bc * out_len;
    for (size_t j = 0; j < out_len; ++j) {
      double acc = 0.0;
      for (size_t u = 0; u < window; ++u) acc += src[j * window + u];
      dst[j] = acc * inv;
    }
  }
  return y;
}

Tensor AvgPoolBackward(const Tensor& x, size_t window, const Tensor& grad) {
  const size_t batch = x.dim(0), ch = x.dim(1), len = x.dim(2);
  const size_t out_len = len / window;
  Tensor dx(x.shape());
  const double inv = 1.0 / static_cast<double>(window);
  for (size_t bc = 0; bc < batch * ch; ++bc) {
    const double* src = grad.raw() + bc * out_len;
    double* dst = dx.raw() + bc * len;
    for (size_t j = 0; j < out_len; ++j) {
      for (size_t u = 0; u < window; ++u) dst[j * window + u] = src[j] * inv;
    }
  }
  return dx;
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

// ---------------------------------------------------------------- Network

Network::Network(NetworkSpec spec) : spec_(std::move(spec)) {
  output_shapes_ = spec_.LayerOutputShapes();
  for (const LayerSpec& layer : spec_.layers) {
    param_offset_.push_back(params_.size());
    state_offset_.push_back(state_.size());
    for (const Shape& s : LayerParamShapes(layer)) params_.emplace_back(s);
    for (const Shape& s : LayerStateShapes(layer)) state_.emplace_back(s);
    if (std::holds_alternative<BatchNorm1D>(layer)) {
      params_[param_offset_.back()].Fill(1.0);     // gamma
      state_[state_offset_.back() + 1].Fill(1.0);  // running variance
    }
  }
}

Network Network::Initialized(NetworkSpec spec, uint64_t seed) {
  Network net(std::move(spec));
  for (size_t i = 0; i < net.spec_.layers.size(); ++i) {
    const LayerSpec& layer = net.spec_.layers[i];
    double fan_in = 0.0;
    double fan_out = 0.0;
    if (const auto* d = std::get_if<Dense>(&layer)) {
      fan_in = static_cast<double>(d->in);
      fan_out = static_cast<double>(d->out);
    } else if (const auto* c = std::get_if<Conv1D>(&layer)) {
      fan_in = static_cast<double>(c->in_channels * c->kernel);
      fan_out = static_cast<double>(c->out_channels * c->kernel);
    } else {
      continue;
    }
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    Rng rng(DeriveSeed(seed, "init", i));
    for (double& w : net.params_[net.param_offset_[i]].data()) {
      w = rng.Uniform(-limit, limit);
    }
  }
  return net;
}

Network::Network(const Network& other)
    : spec_(other.spec_),
      mode_(other.mode_),
      params_(other.params_),
      state_(other.state_),
      param_offset_(other.param_offset_),
      state_offset_(other.state_offset_),
      output_shapes_(other.output_shapes_) {}

Network& Network::operator=(const Network& other) {
  if (this != &other) {
    spec_ = other.spec_;
    mode_ = other.mode_;
    params_ = other.params_;
    state_ = other.state_;
    param_offset_ = other.param_offset_;
    state_offset_ = other.state_offset_;
    output_shapes_ = other.output_shapes_;
    tape_.clear();
  }
  return *this;
}

std::vector<const Tensor*> Network::LayerValues(size_t layer) const {
  std::vector<const Tensor*> out;
  const LayerSpec& l = spec_.layers.at(layer);
  for (size_t i = 0; i < LayerParamShapes(l).size(); ++i) {
    out.push_back(&params_[param_offset_[layer] + i]);
  }
  for (size_t i = 0; i < LayerStateShapes(l).size(); ++i) {
    out.push_back(&state_[state_offset_[layer] + i]);
  }
  return out;
}

std::vector<Tensor*> Network::LayerValues(size_t layer) {
  std::vector<Tensor*> out;
  for (const Tensor* t : std::as_const(*this).LayerValues(layer)) {
    out.push_back(const_cast<Tensor*>(t));
  }
  return out;
}

size_t Network::StoredValueCount() const {
  size_t n = 0;
  for (const Tensor& t : params_) n += t.size();
  for (const Tensor& t : state_) n += t.size();
  return n;
}

ForwardResult Network::Forward(const Tensor& batch,
                               const std::set<size_t>& taps) {
  tape_.clear();
  std::vector<LayerCache> tape(spec_.layers.size());
  const bool training = mode_ == Mode::kTrain;
  ForwardResult result =
      Run(batch, taps, training, training ? &state_ : nullptr, &tape);
  tape_ = std::move(tape);
  tape_training_ = training;
  tape_scores_ = result.scores;
  return result;
}

ForwardResult Network::Evaluate(const Tensor& batch,
                                const std::set<size_t>& taps) const {
  return Run(batch, taps, /*training=*/false, nullptr, nullptr);
}

ForwardResult Network::Run(const Tensor& batch, const std::set<size_t>& taps,
                           bool training, std::vector<Tensor>* state_out,
                           std::vector<LayerCache>* tape) const {
  const Shape& in_shape = spec_.input_shape;
  bool shape_ok = batch.rank() == in_shape.size() + 1 && batch.dim(0) > 0;
  for (size_t i = 0; shape_ok && i < in_shape.size(); ++i) {
    shape_ok = batch.dim(i + 1) == in_shape[i];
  }
  Require(shape_ok, ErrorKind::kInputShape,
          "batch shape " + ShapeToString(batch.shape()) +
              " does not match [batch] + " + ShapeToString(in_shape));
  const std::vector<size_t> stage_ends = spec_.StageEnds();
  for (size_t tap : taps) {
    Require(tap >= 1 && tap <= stage_ends.size(), ErrorKind::kValidation,
            "tap " + std::to_string(tap) + " outside stages 1.." +
                std::to_string(stage_ends.size()));
  }
  const size_t n = batch.dim(0);

  ForwardResult result;
  Tensor x = batch;
  size_t stage = 0;
  for (size_t i = 0; i < spec_.layers.size(); ++i) {
    const LayerSpec& layer = spec_.layers[i];
    const Tensor* p = params_.data() + param_offset_[i];
    const size_t s0 = state_offset_[i];
    LayerCache* cache = tape != nullptr ? &(*tape)[i] : nullptr;
    Tensor y = std::visit(
        Overloaded{
            [&](const Dense& d) { return DenseForward(d, x, p[0], p[1]); },
            [&](const Conv1D& c) { return ConvForward(c, x, p[0], p[1]); },
            [&](const BatchNorm1D& bn) {
              Tensor* new_mean = nullptr;
              Tensor* new_var = nullptr;
              if (state_out != nullptr) {
                new_mean = &(*state_out)[s0];
                new_var = &(*state_out)[s0 + 1];
              }
              return BatchNormForward(
                  bn, x, p[0], p[1], state_[s0], state_[s0 + 1], training,
                  new_mean, new_var, cache ? &cache->aux : nullptr,
                  cache ? &cache->inv_std : nullptr);
            },
            [&](const ReLU&) {
              Tensor out = x;
              for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
              return out;
            },
            [&](const GlobalAvgPool1D&) {
              const size_t len = x.dim(2);
              Tensor out({n, x.dim(1)});
              for (size_t bc = 0; bc < out.size(); ++bc) {
                double acc = 0.0;
                for (size_t t = 0; t < len; ++t) acc += x[bc * len + t];
                out[bc] = acc / static_cast<double>(len);
              }
              return out;
            },
            [&](const AvgPool1D& pool) { return AvgPoolForward(x, pool.window); },
            [&](const Softmax&) { return SoftmaxForward(x); },
        },
        layer);
    Require(y.AllFinite(), ErrorKind::kNumeric,
            "non-finite output at layer " + std::to_string(i) + " (" +
                LayerName(layer) + ")");
    y = std::move(y).Reshaped(WithBatch(n, output_shapes_[i]));
    if (cache != nullptr) {
      cache->input = std::move(x);
      if (std::holds_alternative<Softmax>(layer)) cache->output = y;
    }
    x = std::move(y);
    if (stage < stage_ends.size() && stage_ends[stage] == i) {
      ++stage;
      if (taps.contains(stage)) result.taps.emplace(stage, x);
    }
  }
  result.scores = std::move(x);
  return result;
}

BackwardResult Network::BackwardCrossEntropy(std::span<const size_t> labels) {
  Require(has_tape(), ErrorKind::kState, "backward called without forward");
  const Tensor& probs = tape_scores_;
  Require(probs.rank() == 2, ErrorKind::kInputShape,
          "cross-entropy needs [batch, classes] scores");
  BackwardResult result;
  result.loss = CrossEntropyLoss(probs, labels);
  const size_t batch = probs.dim(0);
  const size_t classes = probs.dim(1);
  const double inv_batch = 1.0 / static_cast<double>(batch);
  const size_t last = spec_.layers.size() - 1;
  if (std::holds_alternative<Softmax>(spec_.layers[last])) {
    // d/dz of -log softmax(z)_y is p - e_y. The probability floor only
    // guards the reported loss value, the gradient stays exact.
    Tensor grad = probs;
    for (size_t b = 0; b < batch; ++b) {
      grad[b * classes + labels[b]] -= 1.0;
    }
    for (double& g : grad.data()) g *= inv_batch;
    if (last == 0) {
      result.gradients = Gradients{};
      return result;
    }
    result.gradients = BackwardFrom(last - 1, std::move(grad));
    return result;
  }
  Tensor grad(probs.shape());
  for (size_t b = 0; b < batch; ++b) {
    const double p = probs[b * classes + labels[b]];
    if (p > kProbabilityFloor) grad[b * classes + labels[b]] = -inv_batch / p;
  }
  result.gradients = BackwardFrom(last, std::move(grad));
  return result;
}

BackwardResult Network::BackwardMse(const Tensor& targets) {
  Require(has_tape(), ErrorKind::kState, "backward called without forward");
  BackwardResult result;
  result.loss = MseLoss(tape_scores_, targets);
  Tensor grad(tape_scores_.shape());
  const double scale = 2.0 / static_cast<double>(grad.size());
  for (size_t i = 0; i < grad.size(); ++i) {
    grad[i] = scale * (tape_scores_[i] - targets[i]);
  }
  result.gradients = BackwardFrom(spec_.layers.size() - 1, std::move(grad));
  return result;
}

Gradients Network::Backward(const Tensor& grad_scores) {
  Require(has_tape(), ErrorKind::kState, "backward called without forward");
  Require(grad_scores.shape() == tape_scores_.shape(), ErrorKind::kInputShape,
          "gradient shape " + ShapeToString(grad_scores.shape()) +
              " differs from scores " + ShapeToString(tape_scores_.shape()));
  return BackwardFrom(spec_.layers.size() - 1, grad_scores);
}

Gradients Network::BackwardFrom(size_t last_layer, Tensor grad) {
  Gradients grads;
  grads.reserve(params_.size());
  for (const Tensor& p : params_) grads.emplace_back(p.shape());

  for (size_t i = last_layer + 1; i-- > 0;) {
    const LayerSpec& layer = spec_.layers[i];
    const LayerCache& cache = tape_[i];
    const Tensor& x = cache.input;
    const size_t p0 = param_offset_[i];
    const bool need_dx = i > 0;
    // The upstream gradient arrives in the layer's output shape.
    grad = std::move(grad).Reshaped(WithBatch(x.dim(0), output_shapes_[i]));
    Tensor dx = std::visit(
        Overloaded{
            [&](const Dense& d) {
              Tensor flat = x.Reshaped({x.dim(0), d.in});
              Tensor out = DenseBackward(d, flat, params_[p0], grad,
                                         grads[p0], grads[p0 + 1], need_dx);
              return need_dx ? std::move(out).Reshaped(x.shape()) : out;
            },
            [&](const Conv1D& c) {
              return ConvBackward(c, x, params_[p0], grad, grads[p0],
                                  grads[p0 + 1], need_dx);
            },
            [&](const BatchNorm1D&) {
              return BatchNormBackward(x, params_[p0], cache.aux,
                                       cache.inv_std, grad, tape_training_,
                                       grads[p0], grads[p0 + 1], need_dx);
            },
            [&](const ReLU&) {
              Tensor out = grad;
              for (size_t j = 0; j < out.size(); ++j) {
                if (!(x[j] > 0.0)) out[j] = 0.0;
              }
              return out;
            },
            [&](const GlobalAvgPool1D&) {
              const size_t len = x.dim(2);
              Tensor out(x.shape());
              const double inv = 1.0 / static_cast<double>(len);
              for (size_t bc = 0; bc < grad.size(); ++bc) {
                for (size_t t = 0; t < len; ++t) out[bc * len + t] = grad[bc] * inv;
              }
              return out;
            },
            [&](const AvgPool1D& pool) {
              return AvgPoolBackward(x, pool.window, grad);
            },
            [&](const Softmax&) { return SoftmaxBackward(cache.output, grad); },
        },
        layer);
    if (!need_dx) break;
    grad = std::move(dx);
  }
  return grads;
}

}  // namespace fedmia
