// Copyright 2026 The Int2Plan Authors
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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "int2plan/nn/parameter.hpp"

namespace int2plan::nn {

/// A named f32 tensor as stored on disk.
struct TensorRecord
{
  std::string name;
  std::vector<std::uint64_t> dims;
  std::vector<float> data;

  bool operator==(const TensorRecord &) const = default;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary little-endian layout: "I2PK", version u32, count u32, then per
/// tensor: name length u32, UTF-8 name, rank u32, dims u64[rank], f32 data.
void write_checkpoint(std::ostream & out, const std::vector<TensorRecord> & tensors);
std::vector<TensorRecord> read_checkpoint(std::istream & in);
void write_checkpoint_file(const std::string & path, const std::vector<TensorRecord> & tensors);
std::vector<TensorRecord> read_checkpoint_file(const std::string & path);

/// Parameters plus `<name>.m1`, `<name>.m2`, `<name>.step` optimizer entries.
std::vector<TensorRecord> store_to_records(const ParameterStore<float> & store);

/// Restores values and optimizer state. Every parameter must be present with
/// a matching shape; optimizer entries are optional.
void load_store(ParameterStore<float> & store, const std::vector<TensorRecord> & tensors);

/// UTF-8 text carried as one f32 per byte.
TensorRecord text_record(const std::string & name, const std::string & text);
std::string record_text(const TensorRecord & record);

const TensorRecord * find_record(const std::vector<TensorRecord> & tensors, const std::string & name);

}  // namespace int2plan::nn
