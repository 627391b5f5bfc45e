// Copyright 2026 The depthcomp Authors. All Rights Reserved.
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

// Checkpoints are two files sharing a stem:
//
//   <stem>.ckpt  text manifest
//   <stem>.bin   raw little-endian float64 data, tensors back to back
//
// Manifest lines (fields separated by single spaces):
//
//   depthcomp-checkpoint 1
//   kind <cpn|dcn>
//   step <int>
//   config <key> <value>
//   tensor <name> <n> <c> <h> <w> f64 <byte offset> <element count>

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "depthcomp/networks.hpp"

namespace depthcomp {

struct Checkpoint {
  std::string kind;
  std::int64_t step = 0;
  KeyValues config;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor* find(const std::string& name) const;
};

/// `path` may name the manifest or the stem; ".ckpt"/".bin" are appended.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::filesystem::path& path);

Checkpoint make_checkpoint(const DcnModel& m, std::int64_t step = 0);
Checkpoint make_checkpoint(const CpnModel& m, std::int64_t step = 0);

/// Rebuilds the model and copies parameters; rejects kind or shape mismatch.
DcnModel dcn_from_checkpoint(const Checkpoint& ck);
CpnModel cpn_from_checkpoint(const Checkpoint& ck);

/// Copies matching tensors into `params`; every parameter must be present.
void load_parameters(const Checkpoint& ck, std::vector<Parameter>& params);

}  // namespace depthcomp
