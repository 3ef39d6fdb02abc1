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

#ifndef FEDMIA_RNG_H_
#define FEDMIA_RNG_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace fedmia {

// Mixes a parent seed with a label and an index into a child seed.
//
// The label is hashed with 64-bit FNV-1a, combined with the parent and the
// index, and finalized with the splitmix64 mixer. Every sub-seed in the
// project (data generation, client shuffles, weight init, attack training)
// is derived this way from the single master seed.
uint64_t DeriveSeed(uint64_t parent, std::string_view label,
                    uint64_t index = 0);

// Seeded generator with distribution code written out explicitly, so that
// streams are identical across standard library implementations (the
// std:: distributions are not specified bit-for-bit).
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Standard normal via Box-Muller; the second variate is cached.
  double Normal();

  // Uniform integer in [0, bound), rejection sampled to avoid modulo bias.
  uint64_t Below(uint64_t bound);

  // Fisher-Yates shuffle.
  template <typename T>
  void Shuffle(std::span<T> items) {
    for (size_t i = items.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(Below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fedmia

#endif  // FEDMIA_RNG_H_
