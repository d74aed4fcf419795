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


#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dxr/nnet/model.hpp"

namespace dxr::nn {

/// Decoded checkpoint file. The byte layout is described in
/// docs/checkpoint_format.md.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;
  static constexpr char kMagic[8] = {'D', 'X', 'R', 'C', 'K', 'P', 'T', '\n'};

  std::uint32_t version = kVersion;
  ModelConfig config;
  ParamSet<float> params;
  /// Free-form key=value annotations (task, best epoch, seed, ...).
  std::map<std::string, std::string> metadata;

  Model model() const;
};

std::vector<std::uint8_t> encode_checkpoint(const Model& model, const std::map<std::string, std::string>& metadata = {});

/// Nothing is returned unless the whole file validates: FormatError kinds
/// kVersion, kTruncated, kCorrupt (bad magic, checksum or layout) and
/// kMissing (absent config key or parameter).
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const Model& model, const std::filesystem::path& path,
                     const std::map<std::string, std::string>& metadata = {});
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace dxr::nn
