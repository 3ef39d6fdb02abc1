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


#ifndef FEDMIA_SRC_JSON_READER_H_
#define FEDMIA_SRC_JSON_READER_H_

#include <cstdint>
#include <set>
#include <string>
#include <type_traits>

#include "fedmia/error.h"
#include "json.hpp"

namespace fedmia::internal {

// Walks one JSON object, remembering which keys were read so leftovers can
// be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const nlohmann::json& j, std::string path,
               ErrorKind kind = ErrorKind::kConfig)
      : j_(j), path_(std::move(path)), kind_(kind) {
    Require(j_.is_object(), kind_, Where() + " must be an object");
  }

  bool Has(const std::string& key) const { return j_.contains(key); }

  template <typename T>
  void Read(const std::string& key, T& out) {
    if (!j_.contains(key)) return;
    seen_.insert(key);
    out = Convert<T>(j_.at(key), Child(key));
  }

  ObjectReader Object(const std::string& key) {
    seen_.insert(key);
    return ObjectReader(j_.at(key), Child(key), kind_);
  }

  const nlohmann::json& Raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void Finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) Fail(kind_, "unknown key '" + Child(key) + "'");
    }
  }

  std::string Child(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  template <typename T>
  T Convert(const nlohmann::json& v, const std::string& where) {
    if constexpr (std::is_same_v<T, bool>) {
      Require(v.is_boolean(), kind_, where + " must be a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      Require(v.is_string(), kind_, where + " must be a string");
      return v.get<std::string>();
    } else if constexpr (std::is_same_v<T, double>) {
      Require(v.is_number(), kind_, where + " must be a number");
      return v.get<double>();
    } else if constexpr (std::is_integral_v<T>) {
      Require(v.is_number_unsigned() || (v.is_number_integer() && v.get<int64_t>() >= 0),
              kind_, where + " must be a non-negative integer");
      return static_cast<T>(v.get<uint64_t>());
    } else {
      Require(v.is_array(), kind_, where + " must be an array");
      T out;
      for (size_t i = 0; i < v.size(); ++i) {
        out.push_back(Convert<typename T::value_type>(
            v[i], where + "[" + std::to_string(i) + "]"));
      }
      return out;
    }
  }

 private:
  std::string Where() const { return path_.empty() ? "document" : "'" + path_ + "'"; }

  const nlohmann::json& j_;
  std::string path_;
  ErrorKind kind_;
  std::set<std::string> seen_;
};

}  // namespace fedmia::internal

#endif  // FEDMIA_SRC_JSON_READER_H_
