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


#ifndef FEDMIA_TRACE_IO_H_
#define FEDMIA_TRACE_IO_H_

#include <cstdint>
#include <string>
#include <vector>

#include "fedmia/fedavg.h"

namespace fedmia {

// FLTR container, all integers little-endian:
//   "FLTR" | u16 version | u32 target_client | spec | u32 n | u32 epoch[n] |
//   for each epoch, for each layer: params then state as f32
// spec: u32 rank | u32 dims[rank] | u32 class_count | u32 layers |
//   per layer u8 type then its fields (u32, except batch-norm eps and
//   momentum as f64 and conv padding as u8).
inline constexpr uint16_t kTraceVersion = 1;

std::vector<uint8_t> EncodeTrace(const CheckpointTrace& trace);
// Throws kFormat with the byte offset of the first problem.
CheckpointTrace DecodeTrace(const std::vector<uint8_t>& bytes);

void SaveTrace(const CheckpointTrace& trace, const std::string& path);
CheckpointTrace LoadTrace(const std::string& path);

// Single-snapshot trace holding one model, e.g. a trained attack network.
void SaveModel(const Network& net, const std::string& path);
Network LoadModel(const std::string& path);

}  // namespace fedmia

#endif  // FEDMIA_TRACE_IO_H_
