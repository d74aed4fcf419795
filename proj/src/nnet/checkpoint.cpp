// Copyright 2026 The dxr Authors. All Rights Reserved.
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


#include "dxr/nnet/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <sstream>

#include "dxr/pgm.hpp"

namespace dxr::nn {

namespace {

using Kind = FormatError::Kind;

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const auto b : bytes) {
    h ^= b;
    h *= 0x100000001B3ULL;
  }
  return h;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[at + i]) << (8 * i);
  return v;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::size_t parse_size(const std::string& text, const std::string& key) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(key);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw FormatError(Kind::kCorrupt, "checkpoint: bad value for " + key);
  }
}

Shape parse_shape(const std::string& text) {
  Shape s;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, 'x')) s.push_back(parse_size(part, "tensor shape"));
  return s;
}

}  // namespace

Model Checkpoint::model() const {
  Model m(config);
  if (!m.params().same_layout(params)) throw FormatError(Kind::kCorrupt, "checkpoint: layout does not match config");
  auto dst = m.mutable_params().flat();
  std::copy(params.flat().begin(), params.flat().end(), dst.begin());
  return m;
}

std::vector<std::uint8_t> encode_checkpoint(const Model& model, const std::map<std::string, std::string>& metadata) {
  const auto& cfg = model.config();
  const auto& ps = model.params();

  std::vector<std::uint8_t> payload;
  payload.reserve(ps.total_size() * 4);
  for (const float v : ps.flat()) put_u32(payload, std::bit_cast<std::uint32_t>(v));

  std::ostringstream meta;
  meta << "config.input_size=" << cfg.input_size << '\n'
       << "config.branch_a_dim=" << cfg.branch_a_dim << '\n'
       << "config.branch_b_dim=" << cfg.branch_b_dim << '\n'
       << "config.fusion_dim=" << cfg.fusion_dim << '\n'
       << "config.num_classes=" << cfg.num_classes << '\n'
       << "config.dropout_rate=" << format_double(cfg.dropout_rate) << '\n';
  for (const auto& [k, v] : metadata) {
    if (k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos)
      throw InvalidArgument("checkpoint: metadata keys/values may not contain '=' or newlines");
    meta << "meta." << k << '=' << v << '\n';
  }
  meta << "tensor_count=" << ps.count() << '\n';
  for (const auto& info : ps.info())
    meta << "tensor=" << info.name << ' ' << shape_string(info.shape) << ' ' << info.offset * 4 << ' '
         << info.size() * 4 << '\n';
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a64(payload)));
  meta << "payload_bytes=" << payload.size() << '\n' << "payload_fnv1a64=" << hash << '\n';
  const std::string text = meta.str();

  std::vector<std::uint8_t> out(std::begin(Checkpoint::kMagic), std::end(Checkpoint::kMagic));
  put_u32(out, Checkpoint::kVersion);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 16) throw FormatError(Kind::kTruncated, "checkpoint: file shorter than its fixed header");
  if (std::memcmp(bytes.data(), Checkpoint::kMagic, 8) != 0)
    throw FormatError(Kind::kCorrupt, "checkpoint: bad magic");
  Checkpoint ck;
  ck.version = get_u32(bytes, 8);
  if (ck.version != Checkpoint::kVersion)
    throw FormatError(Kind::kVersion, "checkpoint: unsupported version " + std::to_string(ck.version));
  const std::size_t meta_len = get_u32(bytes, 12);
  if (bytes.size() - 16 < meta_len) throw FormatError(Kind::kTruncated, "checkpoint: truncated metadata");
  const std::string text(reinterpret_cast<const char*>(bytes.data() + 16), meta_len);
  const auto payload = bytes.subspan(16 + meta_len);

  std::map<std::string, std::string> kv;
  struct Entry {
    std::string name;
    Shape shape;
    std::size_t offset, length;
  };
  std::vector<Entry> tensors;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError(Kind::kCorrupt, "checkpoint: bad metadata line");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "tensor") {
      std::istringstream fields(value);
      Entry e;
      std::string shape, off, len;
      if (!(fields >> e.name >> shape >> off >> len)) throw FormatError(Kind::kCorrupt, "checkpoint: bad tensor line");
      e.shape = parse_shape(shape);
      e.offset = parse_size(off, "tensor offset");
      e.length = parse_size(len, "tensor length");
      tensors.push_back(std::move(e));
    } else if (key.rfind("meta.", 0) == 0) {
      ck.metadata[key.substr(5)] = value;
    } else {
      kv[key] = value;
    }
  }
  auto need = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw FormatError(Kind::kMissing, "checkpoint: missing " + key);
    return it->second;
  };

  ck.config.input_size = parse_size(need("config.input_size"), "input_size");
  ck.config.branch_a_dim = parse_size(need("config.branch_a_dim"), "branch_a_dim");
  ck.config.branch_b_dim = parse_size(need("config.branch_b_dim"), "branch_b_dim");
  ck.config.fusion_dim = parse_size(need("config.fusion_dim"), "fusion_dim");
  ck.config.num_classes = parse_size(need("config.num_classes"), "num_classes");
  try {
    ck.config.dropout_rate = std::stod(need("config.dropout_rate"));
    ck.config.validate();
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw FormatError(Kind::kCorrupt, std::string("checkpoint: invalid config: ") + e.what());
  }

  const std::size_t payload_bytes = parse_size(need("payload_bytes"), "payload_bytes");
  if (payload.size() < payload_bytes) throw FormatError(Kind::kTruncated, "checkpoint: truncated payload");
  if (payload.size() > payload_bytes) throw FormatError(Kind::kCorrupt, "checkpoint: trailing bytes after payload");
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a64(payload)));
  if (need("payload_fnv1a64") != hash) throw FormatError(Kind::kCorrupt, "checkpoint: payload checksum mismatch");
  if (parse_size(need("tensor_count"), "tensor_count") != tensors.size())
    throw FormatError(Kind::kCorrupt, "checkpoint: tensor_count disagrees with tensor directory");

  ck.params = ParamSet<float>(fusion_param_layout(ck.config));
  std::vector<bool> seen(ck.params.count(), false);
  for (const auto& e : tensors) {
    const std::size_t idx = ck.params.find(e.name);
    if (idx == ck.params.count()) throw FormatError(Kind::kCorrupt, "checkpoint: unknown tensor " + e.name);
    if (seen[idx]) throw FormatError(Kind::kCorrupt, "checkpoint: duplicate tensor " + e.name);
    seen[idx] = true;
    const auto& info = ck.params.info(idx);
    if (e.shape != info.shape || e.length != info.size() * 4)
      throw FormatError(Kind::kCorrupt, "checkpoint: tensor " + e.name + " has shape " + shape_string(e.shape) +
                                            ", expected " + shape_string(info.shape));
    if (e.offset % 4 != 0 || e.offset > payload.size() || payload.size() - e.offset < e.length)
      throw FormatError(Kind::kCorrupt, "checkpoint: tensor " + e.name + " lies outside the payload");
    auto dst = ck.params.view(idx);
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = std::bit_cast<float>(get_u32(payload, e.offset + 4 * i));
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i]) throw FormatError(Kind::kMissing, "checkpoint: missing tensor " + ck.params.info(i).name);
  return ck;
}

void save_checkpoint(const Model& model, const std::filesystem::path& path,
                     const std::map<std::string, std::string>& metadata) {
  write_file_bytes(path, encode_checkpoint(model, metadata));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_checkpoint(bytes);
  } catch (const FormatError& e) {
    throw FormatError(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace dxr::nn
