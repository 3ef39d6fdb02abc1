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


#include "fedmia/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string_view>

#include "fedmia/error.h"
#include "fedmia/rng.h"

namespace fedmia {
namespace {

// Splits a CSV line on commas, trimming spaces and a trailing '\r'.
std::vector<std::string_view> SplitFields(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> out;
  size_t start = 0;
  for (;;) {
    size_t comma = line.find(',', start);
    std::string_view f = line.substr(
        start, comma == std::string_view::npos ? comma : comma - start);
    while (!f.empty() && f.front() == ' ') f.remove_prefix(1);
    while (!f.empty() && f.back() == ' ') f.remove_suffix(1);
    out.push_back(f);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool ParseUnsigned(std::string_view s, size_t& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

std::vector<size_t> Complement(std::span<const size_t> sorted_excluded,
                               std::span<const size_t> candidates) {
  std::vector<size_t> out;
  for (size_t i : candidates) {
    if (!std::binary_search(sorted_excluded.begin(), sorted_excluded.end(),
                            i)) {
      out.push_back(i);
    }
  }
  return out;
}

}  // namespace

void LabeledDataset::Validate() const {
  Require(feature_dim > 0 && class_count > 0, ErrorKind::kValidation,
          "dataset '" + name + "' needs positive dimension and class count");
  Require(features.size() == labels.size() * feature_dim,
          ErrorKind::kValidation,
          "dataset '" + name + "' has " + std::to_string(features.size()) +
              " feature values for " + std::to_string(labels.size()) +
              " rows of dimension " + std::to_string(feature_dim));
  for (size_t i = 0; i < labels.size(); ++i) {
    Require(labels[i] < class_count, ErrorKind::kValidation,
            "dataset '" + name + "' row " + std::to_string(i) + " label " +
                std::to_string(labels[i]) + " outside [0, " +
                std::to_string(class_count) + ")");
  }
}

Tensor GatherInputs(const LabeledDataset& data,
                    std::span<const size_t> indices) {
  Require(!indices.empty(), ErrorKind::kValidation, "empty sample selection");
  Tensor out({indices.size(), data.feature_dim});
  for (size_t r = 0; r < indices.size(); ++r) {
    Require(indices[r] < data.size(), ErrorKind::kValidation,
            "sample index " + std::to_string(indices[r]) + " out of range");
    std::span<const double> src = data.row(indices[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

std::vector<size_t> GatherLabels(const LabeledDataset& data,
                                 std::span<const size_t> indices) {
  std::vector<size_t> out;
  out.reserve(indices.size());
  for (size_t i : indices) out.push_back(data.labels.at(i));
  return out;
}

LabeledDataset LoadPurchaseStyle(const std::string& path, size_t feature_dim,
                                 size_t class_count) {
  std::ifstream in(path);
  Require(in.good(), ErrorKind::kIo, "cannot open dataset file " + path);
  LabeledDataset data;
  data.name = path;
  data.feature_dim = feature_dim;
  data.class_count = class_count;
  std::string line;
  size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    Fail(ErrorKind::kParse, path + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string_view> fields = SplitFields(line);
    if (fields.size() != feature_dim + 1) {
      fail("expected " + std::to_string(feature_dim + 1) + " fields, got " +
           std::to_string(fields.size()));
    }
    size_t label = 0;
    if (!ParseUnsigned(fields[0], label)) {
      fail("label '" + std::string(fields[0]) + "' is not a non-negative integer");
    }
    if (label >= class_count) {
      Fail(ErrorKind::kValidation,
           path + ":" + std::to_string(line_no) + ": label " +
               std::to_string(label) + " outside [0, " +
               std::to_string(class_count) + ")");
    }
    for (size_t j = 1; j < fields.size(); ++j) {
      if (fields[j] == "0") {
        data.features.push_back(0.0);
      } else if (fields[j] == "1") {
        data.features.push_back(1.0);
      } else {
        fail("feature " + std::to_string(j) + " is '" + std::string(fields[j]) +
             "', expected 0 or 1");
      }
    }
    data.labels.push_back(label);
  }
  return data;
}

LabeledDataset GenerateSynthetic(const SyntheticSpec& spec) {
  Require(spec.classes > 0 && spec.dim > 0 && spec.per_class > 0,
          ErrorKind::kValidation, "synthetic classes, dim and per_class must be positive");
  Require(std::isfinite(spec.cluster_spread) && spec.cluster_spread >= 0.0,
          ErrorKind::kValidation, "synthetic cluster_spread must be >= 0");
  LabeledDataset data;
  data.name = "synthetic";
  data.feature_dim = spec.dim;
  data.class_count = spec.classes;
  Rng centers_rng(DeriveSeed(spec.seed, "centers"));
  std::vector<double> centers(spec.classes * spec.dim);
  for (double& c : centers) c = centers_rng.Normal();
  Rng points_rng(DeriveSeed(spec.seed, "points"));
  data.features.reserve(spec.classes * spec.per_class * spec.dim);
  for (size_t c = 0; c < spec.classes; ++c) {
    for (size_t i = 0; i < spec.per_class; ++i) {
      for (size_t j = 0; j < spec.dim; ++j) {
        const double noise = points_rng.Normal();
        data.features.push_back(centers[c * spec.dim + j] +
                                spec.cluster_spread * noise);
      }
      data.labels.push_back(c);
    }
  }
  return data;
}

std::vector<Partition> PartitionUniform(std::span<const size_t> pool,
                                        size_t n_clients, uint64_t seed) {
  Require(n_clients >= 1, ErrorKind::kValidation, "need at least one client");
  Require(n_clients <= pool.size(), ErrorKind::kCapacity,
          std::to_string(n_clients) + " clients but only " +
              std::to_string(pool.size()) + " samples");
  std::vector<size_t> order(pool.begin(), pool.end());
  Rng rng(DeriveSeed(seed, "partition"));
  rng.Shuffle(std::span<size_t>(order));
  std::vector<Partition> out(n_clients);
  const size_t base = order.size() / n_clients;
  const size_t extra = order.size() % n_clients;
  size_t pos = 0;
  for (size_t c = 0; c < n_clients; ++c) {
    const size_t n = base + (c < extra ? 1 : 0);
    out[c].client_id = c;
    out[c].indices.assign(order.begin() + pos, order.begin() + pos + n);
    std::sort(out[c].indices.begin(), out[c].indices.end());
    pos += n;
  }
  return out;
}

std::vector<Partition> PartitionUniform(const LabeledDataset& data,
                                        size_t n_clients, uint64_t seed) {
  std::vector<size_t> all(data.size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = i;
  return PartitionUniform(all, n_clients, seed);
}

HoldoutSplit SplitHoldout(size_t dataset_size, size_t holdout, uint64_t seed) {
  Require(holdout < dataset_size, ErrorKind::kCapacity,
          "holdout of " + std::to_string(holdout) + " leaves no training data in " +
              std::to_string(dataset_size) + " samples");
  std::vector<size_t> order(dataset_size);
  for (size_t i = 0; i < dataset_size; ++i) order[i] = i;
  Rng rng(DeriveSeed(seed, "holdout"));
  rng.Shuffle(std::span<size_t>(order));
  HoldoutSplit split;
  split.holdout.assign(order.begin(), order.begin() + holdout);
  split.pool.assign(order.begin() + holdout, order.end());
  std::sort(split.holdout.begin(), split.holdout.end());
  std::sort(split.pool.begin(), split.pool.end());
  return split;
}

AuxiliaryDataset BuildAuxiliary(
    const Partition& target, const LabeledDataset& pool,
    const AuxCounts& counts, uint64_t seed,
    std::optional<std::span<const size_t>> nonmember_candidates) {
  std::vector<size_t> members(target.indices);
  std::sort(members.begin(), members.end());
  Require(std::adjacent_find(members.begin(), members.end()) == members.end(),
          ErrorKind::kValidation, "target partition has duplicate indices");
  Require(members.empty() || members.back() < pool.size(),
          ErrorKind::kValidation, "target partition index outside the pool");

  std::vector<size_t> outside;
  if (nonmember_candidates) {
    outside = Complement(members, *nonmember_candidates);
  } else {
    std::vector<size_t> all(pool.size());
    for (size_t i = 0; i < all.size(); ++i) all[i] = i;
    outside = Complement(members, all);
  }
  for (size_t i : outside) {
    Require(i < pool.size(), ErrorKind::kValidation,
            "non-member candidate " + std::to_string(i) + " outside the pool");
  }
  std::sort(outside.begin(), outside.end());
  outside.erase(std::unique(outside.begin(), outside.end()), outside.end());

  const size_t need_members = counts.member_train + counts.member_test;
  const size_t need_nonmembers = counts.nonmember_train + counts.nonmember_test;
  Require(members.size() >= need_members, ErrorKind::kCapacity,
          "members: need " + std::to_string(need_members) +
              " but the target partition has " + std::to_string(members.size()));
  Require(outside.size() >= need_nonmembers, ErrorKind::kCapacity,
          "non-members: need " + std::to_string(need_nonmembers) +
              " but only " + std::to_string(outside.size()) +
              " samples lie outside the target partition");

  Rng member_rng(DeriveSeed(seed, "aux-members"));
  member_rng.Shuffle(std::span<size_t>(members));
  Rng outside_rng(DeriveSeed(seed, "aux-nonmembers"));
  outside_rng.Shuffle(std::span<size_t>(outside));

  AuxiliaryDataset aux;
  auto take = [&](std::vector<AuxSample>& dst, const std::vector<size_t>& src,
                  size_t from, size_t n, bool member) {
    for (size_t k = from; k < from + n; ++k) {
      dst.push_back({src[k], pool.labels.at(src[k]), member});
    }
  };
  take(aux.attack_train, members, 0, counts.member_train, true);
  take(aux.attack_train, outside, 0, counts.nonmember_train, false);
  take(aux.attack_test, members, counts.member_train, counts.member_test, true);
  take(aux.attack_test, outside, counts.nonmember_train, counts.nonmember_test,
       false);
  auto by_index = [](const AuxSample& a, const AuxSample& b) {
    return a.index < b.index;
  };
  std::sort(aux.attack_train.begin(), aux.attack_train.end(), by_index);
  std::sort(aux.attack_test.begin(), aux.attack_test.end(), by_index);
  return aux;
}

}  // namespace fedmia
