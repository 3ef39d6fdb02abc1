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


#include "fedmia/trace_io.h"

#include <bit>
#include <fstream>
#include <iterator>
#include <limits>

#include "fedmia/error.h"

namespace fedmia {
namespace {

enum LayerTag : uint8_t {
  kTagDense = 1,
  kTagConv1D = 2,
  kTagBatchNorm1D = 3,
  kTagReLU = 4,
  kTagGlobalAvgPool1D = 5,
  kTagAvgPool1D = 6,
  kTagSoftmax = 7,
};

class Writer {
 public:
  void U8(uint8_t v) { bytes_.push_back(v); }
  void U16(uint16_t v) { Le(v, 2); }
  void U32(uint64_t v) {
    Require(v <= std::numeric_limits<uint32_t>::max(), ErrorKind::kFormat,
            "value " + std::to_string(v) + " does not fit in u32");
    Le(v, 4);
  }
  void F32(double v) { Le(std::bit_cast<uint32_t>(static_cast<float>(v)), 4); }
  void F64(double v) { Le(std::bit_cast<uint64_t>(v), 8); }
  void Raw(const char* s, size_t n) { bytes_.insert(bytes_.end(), s, s + n); }
  std::vector<uint8_t> Take() { return std::move(bytes_); }

 private:
  void Le(uint64_t v, int n) {
    for (int i = 0; i < n; ++i) bytes_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  std::vector<uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(const std::vector<uint8_t>& bytes) : bytes_(bytes) {}

  size_t offset() const { return pos_; }
  bool AtEnd() const { return pos_ == bytes_.size(); }
  uint8_t U8() { return static_cast<uint8_t>(Le(1)); }
  uint16_t U16() { return static_cast<uint16_t>(Le(2)); }
  uint32_t U32() { return static_cast<uint32_t>(Le(4)); }
  double F32() { return std::bit_cast<float>(static_cast<uint32_t>(Le(4))); }
  double F64() { return std::bit_cast<double>(Le(8)); }
  [[noreturn]] void Fail(size_t at, const std::string& what) const {
    fedmia::Fail(ErrorKind::kFormat,
                 "trace byte offset " + std::to_string(at) + ": " + what);
  }

 private:
  uint64_t Le(int n) {
    if (bytes_.size() - pos_ < static_cast<size_t>(n)) {
      Fail(pos_, "truncated (need " + std::to_string(n) + " bytes, " +
                     std::to_string(bytes_.size() - pos_) + " left)");
    }
    uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += n;
    return v;
  }
  const std::vector<uint8_t>& bytes_;
  size_t pos_ = 0;
};

void WriteLayer(Writer& w, const LayerSpec& layer) {
  std::visit(
      [&](const auto& l) {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, Dense>) {
          w.U8(kTagDense);
          w.U32(l.in);
          w.U32(l.out);
        } else if constexpr (std::is_same_v<T, Conv1D>) {
          w.U8(kTagConv1D);
          w.U32(l.in_channels);
          w.U32(l.out_channels);
          w.U32(l.kernel);
          w.U8(l.padding == Padding::kSame ? 0 : 1);
        } else if constexpr (std::is_same_v<T, BatchNorm1D>) {
          w.U8(kTagBatchNorm1D);
          w.U32(l.channels);
          w.F64(l.eps);
          w.F64(l.momentum);
        } else if constexpr (std::is_same_v<T, ReLU>) {
          w.U8(kTagReLU);
        } else if constexpr (std::is_same_v<T, GlobalAvgPool1D>) {
          w.U8(kTagGlobalAvgPool1D);
        } else if constexpr (std::is_same_v<T, AvgPool1D>) {
          w.U8(kTagAvgPool1D);
          w.U32(l.window);
        } else {
          static_assert(std::is_same_v<T, Softmax>);
          w.U8(kTagSoftmax);
        }
      },
      layer);
}

LayerSpec ReadLayer(Reader& r) {
  const size_t at = r.offset();
  switch (r.U8()) {
    case kTagDense: {
      Dense d;
      d.in = r.U32();
      d.out = r.U32();
      return d;
    }
    case kTagConv1D: {
      Conv1D c;
      c.in_channels = r.U32();
      c.out_channels = r.U32();
      c.kernel = r.U32();
      const size_t pad_at = r.offset();
      const uint8_t pad = r.U8();
      if (pad > 1) r.Fail(pad_at, "unknown padding code " + std::to_string(pad));
      c.padding = pad == 0 ? Padding::kSame : Padding::kValid;
      return c;
    }
    case kTagBatchNorm1D: {
      BatchNorm1D b;
      b.channels = r.U32();
      b.eps = r.F64();
      b.momentum = r.F64();
      return b;
    }
    case kTagReLU:
      return ReLU{};
    case kTagGlobalAvgPool1D:
      return GlobalAvgPool1D{};
    case kTagAvgPool1D: {
      AvgPool1D p;
      p.window = r.U32();
      return p;
    }
    case kTagSoftmax:
      return Softmax{};
    default:
      r.Fail(at, "unknown layer type");
  }
}

}  // namespace

std::vector<uint8_t> EncodeTrace(const CheckpointTrace& trace) {
  Writer w;
  w.Raw("FLTR", 4);
  w.U16(kTraceVersion);
  w.U32(trace.target_client);
  w.U32(trace.spec.input_shape.size());
  for (size_t d : trace.spec.input_shape) w.U32(d);
  w.U32(trace.spec.class_count);
  w.U32(trace.spec.layers.size());
  for (const LayerSpec& l : trace.spec.layers) WriteLayer(w, l);
  w.U32(trace.snapshots.size());
  for (const auto& [epoch, net] : trace.snapshots) w.U32(epoch);
  for (const auto& [epoch, net] : trace.snapshots) {
    Require(net->spec() == trace.spec, ErrorKind::kSpec,
            "snapshot " + std::to_string(epoch) + " has a different spec");
    for (size_t i = 0; i < trace.spec.layers.size(); ++i) {
      for (const Tensor* t : net->LayerValues(i)) {
        for (double v : t->data()) w.F32(v);
      }
    }
  }
  return w.Take();
}

CheckpointTrace DecodeTrace(const std::vector<uint8_t>& bytes) {
  Reader r(bytes);
  if (bytes.size() < 4 || std::string(bytes.begin(), bytes.begin() + 4) != "FLTR") {
    r.Fail(0, "bad magic (expected FLTR)");
  }
  for (int i = 0; i < 4; ++i) r.U8();
  const size_t version_at = r.offset();
  const uint16_t version = r.U16();
  if (version != kTraceVersion) {
    r.Fail(version_at, "unsupported version " + std::to_string(version));
  }
  CheckpointTrace trace;
  trace.target_client = r.U32();
  const size_t rank_at = r.offset();
  const uint32_t rank = r.U32();
  if (rank == 0 || rank > 8) r.Fail(rank_at, "bad input rank " + std::to_string(rank));
  for (uint32_t i = 0; i < rank; ++i) trace.spec.input_shape.push_back(r.U32());
  trace.spec.class_count = r.U32();
  const size_t layers_at = r.offset();
  const uint32_t n_layers = r.U32();
  if (n_layers == 0 || n_layers > bytes.size()) {
    r.Fail(layers_at, "bad layer count " + std::to_string(n_layers));
  }
  for (uint32_t i = 0; i < n_layers; ++i) trace.spec.layers.push_back(ReadLayer(r));
  try {
    trace.spec.Validate();
  } catch (const Error& e) {
    r.Fail(layers_at, std::string("invalid spec: ") + e.what());
  }
  const size_t epochs_at = r.offset();
  const uint32_t n_epochs = r.U32();
  if (n_epochs > bytes.size()) r.Fail(epochs_at, "bad epoch count");
  std::vector<size_t> epochs;
  for (uint32_t i = 0; i < n_epochs; ++i) {
    const size_t at = r.offset();
    epochs.push_back(r.U32());
    if (i > 0 && epochs[i] <= epochs[i - 1]) {
      r.Fail(at, "epochs not strictly increasing");
    }
  }
  for (size_t epoch : epochs) {
    auto net = std::make_shared<Network>(trace.spec);
    for (size_t i = 0; i < trace.spec.layers.size(); ++i) {
      for (Tensor* t : net->LayerValues(i)) {
        for (double& v : t->data()) v = r.F32();
      }
    }
    net->set_mode(Mode::kEval);
    trace.snapshots.emplace(epoch, std::move(net));
  }
  if (!r.AtEnd()) r.Fail(r.offset(), "trailing bytes");
  return trace;
}

void SaveTrace(const CheckpointTrace& trace, const std::string& path) {
  const std::vector<uint8_t> bytes = EncodeTrace(trace);
  std::ofstream out(path, std::ios::binary);
  Require(out.good(), ErrorKind::kIo, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  Require(out.good(), ErrorKind::kIo, "failed writing " + path);
}

CheckpointTrace LoadTrace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  Require(in.good(), ErrorKind::kIo, "cannot open trace " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  try {
    return DecodeTrace(bytes);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kFormat) throw;
    Fail(ErrorKind::kFormat, path + ": " + e.what());
  }
}

void SaveModel(const Network& net, const std::string& path) {
  CheckpointTrace trace;
  trace.spec = net.spec();
  trace.snapshots.emplace(1, std::make_shared<Network>(net));
  SaveTrace(trace, path);
}

Network LoadModel(const std::string& path) {
  CheckpointTrace trace = LoadTrace(path);
  Require(trace.snapshots.size() == 1, ErrorKind::kFormat,
          path + ": expected a single model, found " +
              std::to_string(trace.snapshots.size()) + " snapshots");
  return *trace.snapshots.begin()->second;
}

}  // namespace fedmia
