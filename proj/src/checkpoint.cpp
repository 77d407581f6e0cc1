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

#include "int2plan/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "int2plan/error.hpp"

namespace int2plan::nn {

namespace {

constexpr const char * kModule = "nn_core";
constexpr char kMagic[4] = {'I', '2', 'P', 'K'};

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes a little-endian host");

template <typename T>
void put(std::ostream & out, T value)
{
  out.write(reinterpret_cast<const char *>(&value), sizeof(T));
}

template <typename T>
T get(std::istream & in)
{
  T value{};
  if (!in.read(reinterpret_cast<char *>(&value), sizeof(T))) {
    throw Error(kModule, "truncated checkpoint");
  }
  return value;
}

std::uint64_t element_count(const std::vector<std::uint64_t> & dims)
{
  std::uint64_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

TensorRecord matrix_record(const std::string & name, const std::vector<std::uint64_t> & dims, const Matrix<float> & m)
{
  TensorRecord r;
  r.name = name;
  r.dims = dims;
  r.data.assign(m.data(), m.data() + m.size());
  return r;
}

}  // namespace

void write_checkpoint(std::ostream & out, const std::vector<TensorRecord> & tensors)
{
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto & t : tensors) {
    if (element_count(t.dims) != t.data.size()) {
      throw Error(kModule, "tensor '" + t.name + "' data does not match its shape");
    }
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.name.size()));
    out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.dims.size()));
    for (auto d : t.dims) put<std::uint64_t>(out, d);
    out.write(reinterpret_cast<const char *>(t.data.data()), static_cast<std::streamsize>(t.data.size() * sizeof(float)));
  }
  if (!out) throw Error(kModule, "failed to write checkpoint");
}

std::vector<TensorRecord> read_checkpoint(std::istream & in)
{
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw Error(kModule, "not a checkpoint file (bad magic)");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw Error(kModule, "unsupported checkpoint version " + std::to_string(version));
  }
  const auto count = get<std::uint32_t>(in);
  std::vector<TensorRecord> tensors;
  tensors.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    TensorRecord t;
    const auto name_len = get<std::uint32_t>(in);
    t.name.resize(name_len);
    if (!in.read(t.name.data(), name_len)) throw Error(kModule, "truncated checkpoint");
    const auto rank = get<std::uint32_t>(in);
    for (std::uint32_t r = 0; r < rank; ++r) t.dims.push_back(get<std::uint64_t>(in));
    t.data.resize(element_count(t.dims));
    if (!in.read(reinterpret_cast<char *>(t.data.data()), static_cast<std::streamsize>(t.data.size() * sizeof(float)))) {
      throw Error(kModule, "truncated checkpoint");
    }
    tensors.push_back(std::move(t));
  }
  return tensors;
}

void write_checkpoint_file(const std::string & path, const std::vector<TensorRecord> & tensors)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(kModule, "cannot write checkpoint '" + path + "'");
  write_checkpoint(out, tensors);
}

std::vector<TensorRecord> read_checkpoint_file(const std::string & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(kModule, "cannot open checkpoint '" + path + "'");
  return read_checkpoint(in);
}

std::vector<TensorRecord> store_to_records(const ParameterStore<float> & store)
{
  std::vector<TensorRecord> out;
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto & p = store[i];
    out.push_back(matrix_record(p.name, p.dims, p.value));
    out.push_back(matrix_record(p.name + ".m1", p.dims, p.first_moment));
    out.push_back(matrix_record(p.name + ".m2", p.dims, p.second_moment));
    out.push_back({p.name + ".step", {1}, {static_cast<float>(p.step)}});
  }
  return out;
}

const TensorRecord * find_record(const std::vector<TensorRecord> & tensors, const std::string & name)
{
  for (const auto & t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

void load_store(ParameterStore<float> & store, const std::vector<TensorRecord> & tensors)
{
  auto fill = [](Matrix<float> & m, const TensorRecord & r, const std::string & name) {
    if (static_cast<std::size_t>(m.size()) != r.data.size()) {
      throw Error(kModule, "shape mismatch for checkpoint tensor '" + name + "'");
    }
    std::copy(r.data.begin(), r.data.end(), m.data());
  };
  for (std::size_t i = 0; i < store.size(); ++i) {
    auto & p = store[i];
    const auto * value = find_record(tensors, p.name);
    if (value == nullptr) throw Error(kModule, "checkpoint lacks parameter '" + p.name + "'");
    if (value->dims != p.dims) throw Error(kModule, "shape mismatch for parameter '" + p.name + "'");
    fill(p.value, *value, p.name);
    if (const auto * m1 = find_record(tensors, p.name + ".m1")) fill(p.first_moment, *m1, m1->name);
    if (const auto * m2 = find_record(tensors, p.name + ".m2")) fill(p.second_moment, *m2, m2->name);
    if (const auto * step = find_record(tensors, p.name + ".step"); step && !step->data.empty()) {
      p.step = static_cast<std::int64_t>(step->data.front());
    }
  }
}

TensorRecord text_record(const std::string & name, const std::string & text)
{
  TensorRecord r;
  r.name = name;
  r.dims = {text.size()};
  for (unsigned char c : text) r.data.push_back(static_cast<float>(c));
  return r;
}

std::string record_text(const TensorRecord & record)
{
  std::string text;
  text.reserve(record.data.size());
  for (float f : record.data) text.push_back(static_cast<char>(static_cast<unsigned char>(f)));
  return text;
}

}  // namespace int2plan::nn
