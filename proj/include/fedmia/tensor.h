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

#ifndef FEDMIA_TENSOR_H_
#define FEDMIA_TENSOR_H_

#include <cstddef>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace fedmia {

using Shape = std::vector<size_t>;

// Cache-line aligned storage. Vectorized kernels peel differently depending
// on the base address, so alignment that varied with heap layout would make
// results differ in the last bits between otherwise identical runs.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlignment{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) {}

  T* allocate(size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), kAlignment));
  }
  void deallocate(T* p, size_t) { ::operator delete(p, kAlignment); }

  template <typename U>
  friend bool operator==(const AlignedAllocator&, const AlignedAllocator<U>&) {
    return true;
  }
};

using AlignedVector = std::vector<double, AlignedAllocator<double>>;

size_t ShapeSize(const Shape& shape);
std::string ShapeToString(const Shape& shape);

// Dense row-major array of 64-bit reals.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  const Shape& shape() const { return shape_; }
  size_t rank() const { return shape_.size(); }
  size_t dim(size_t axis) const { return shape_.at(axis); }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  double* raw() { return data_.data(); }
  const double* raw() const { return data_.data(); }

  double& operator[](size_t i) { return data_[i]; }
  double operator[](size_t i) const { return data_[i]; }

  // Reinterprets the same data under a new shape of equal size.
  Tensor Reshaped(Shape shape) const&;
  Tensor Reshaped(Shape shape) &&;

  // Number of leading-axis rows and the size of one row.
  size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
  size_t row_size() const { return rows() == 0 ? 0 : size() / rows(); }
  std::span<const double> row(size_t i) const {
    return std::span<const double>(data_).subspan(i * row_size(), row_size());
  }
  std::span<double> row(size_t i) {
    return std::span<double>(data_).subspan(i * row_size(), row_size());
  }

  void Fill(double value);
  bool AllFinite() const;

  friend bool operator==(const Tensor& a, const Tensor& b) = default;

 private:
  struct Adopt {};
  Tensor(Adopt, Shape shape, AlignedVector data);

  Shape shape_;
  AlignedVector data_;
};

}  // namespace fedmia

#endif  // FEDMIA_TENSOR_H_
