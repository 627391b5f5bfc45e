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

// Two-branch encoder/decoder networks.
//
// Both networks encode depth and image in separate branches whose channel
// widths are round(base_channels[i] * k). The completion network (DCN) fuses
// the branches in the decoder through skip connections at every scale. The
// prior network (CPN) only sees the depth branch through a narrow bottleneck
// and reconstructs its input; its reconstruction error is the prior energy.

#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "depthcomp/autograd.hpp"

namespace depthcomp {

enum class BlockKind { plain_conv, resnet_block };

struct EncoderSpec {
  std::vector<int> base_channels{64, 128, 256, 512, 512};
  double k = 1.0;
  int in_channels = 1;
  /// Per-stage stride; empty means 2 for every stage.
  std::vector<int> strides;
  BlockKind block = BlockKind::plain_conv;

  int num_stages() const { return static_cast<int>(base_channels.size()); }
  /// round(base * k) per stage; rejects any width below 1.
  std::vector<int> channels() const;
  std::vector<int> stride_schedule() const;
};

enum class LayerKind { conv, conv_transpose, upsample_nearest };

struct LayerInfo {
  std::string name;
  LayerKind kind = LayerKind::conv;
  int in_c = 0;
  int out_c = 0;
  int kernel = 3;
  int stride = 1;
  bool bias = true;

  std::int64_t weight_count() const;
  std::int64_t bias_count() const;
};

struct ParameterCount {
  std::int64_t total = 0;
  std::vector<std::pair<std::string, std::int64_t>> per_layer;
};

/// Kernel-only count by default.
ParameterCount count_parameters(std::span<const LayerInfo> layers,
                                bool include_bias = false);

/// Weights of a single k x k convolution.
constexpr std::int64_t conv_weight_count(int kernel, int in_c, int out_c) {
  return static_cast<std::int64_t>(kernel) * kernel * in_c * out_c;
}

/// Owns parameters for an ordered list of layers.
class Network {
 public:
  const std::vector<LayerInfo>& layers() const { return layers_; }
  const LayerInfo& layer(std::string_view name) const;
  bool has_layer(std::string_view name) const;

  std::vector<Parameter>& params() { return params_; }
  const std::vector<Parameter>& params() const { return params_; }
  std::vector<Parameter*> param_ptrs();

  ParameterCount parameter_count(bool include_bias = false) const {
    return count_parameters(layers_, include_bias);
  }

 protected:
  void init_layers(std::vector<LayerInfo> layers, std::uint64_t seed);

  struct Slot {
    int weight = -1;
    int bias = -1;
  };

  /// Applies the named layer. `trainable` selects gradient-tracking params.
  Var apply(Graph& g, std::string_view name, Var x, bool trainable);
  Var apply(Graph& g, std::string_view name, Var x) const;

 private:
  Var apply_impl(Graph& g, std::size_t index, Var x, Var w, Var b) const;
  std::size_t index_of(std::string_view name) const;

  std::vector<LayerInfo> layers_;
  std::vector<Slot> slots_;
  std::unordered_map<std::string, std::size_t> by_name_;
  std::vector<Parameter> params_;
};

// ---------------------------------------------------------------------------

struct DcnConfig {
  EncoderSpec depth;
  EncoderSpec image;
  bool unsupervised_variant = false;
  /// Input depths are divided by this; the output mapping is scaled by it.
  double max_depth = 80.0;
};

/// Presets: "full" (five stages, base [64..512]), "desk" (three stages,
/// base [16, 32, 64]) and "tiny" (three stages, base [8, 16, 32]).
DcnConfig dcn_preset(std::string_view name, bool unsupervised_variant = false);

std::vector<LayerInfo> dcn_layout(const DcnConfig& cfg);
/// Same stage list with the inputs stacked into one k = 1 encoder.
std::vector<LayerInfo> dcn_fused_layout(const DcnConfig& cfg);

class DcnModel : public Network {
 public:
  DcnModel(DcnConfig cfg, std::uint64_t seed);

  const DcnConfig& config() const { return cfg_; }

  /// z: (n,1,H,W) sparse depth in metres with zeros off the sample set;
  /// image: (n,3,H,W). Returns strictly positive dense depth (n,1,H,W).
  Var forward(Graph& g, Var z, Var image, bool trainable);
  Var forward(Graph& g, Var z, Var image) const;

  /// Product of all encoder strides; inputs must be divisible by it.
  int downsample_factor() const;

 private:
  template <typename Self>
  static Var run(Self& self, Graph& g, Var z, Var image, bool trainable);

  DcnConfig cfg_;
};

DcnModel build_dcn(const DcnConfig& cfg, std::uint64_t seed);

// ---------------------------------------------------------------------------

struct CpnConfig {
  EncoderSpec depth;
  EncoderSpec image;
  /// Width of the last depth stage. 0 picks the largest width keeping the
  /// bottleneck at or below 1/16 of the input pixel count.
  int bottleneck_channels = 0;
  int eta = 2;
  int input_height = 64;
  int input_width = 192;
  double max_depth = 80.0;
  /// Also feed image features to every decoder scale. The depth branch is
  /// never skipped around the bottleneck.
  bool image_skips = false;

  int resolved_bottleneck() const;
};

CpnConfig cpn_preset(std::string_view name, int height, int width,
                     int eta = 2);

std::vector<LayerInfo> cpn_layout(const CpnConfig& cfg);

class CpnModel : public Network {
 public:
  CpnModel(CpnConfig cfg, std::uint64_t seed);

  const CpnConfig& config() const { return cfg_; }
  int eta() const { return cfg_.eta; }

  /// Reconstruction d' of depth d (n,1,H,W) given image (n,3,H,W).
  Var forward(Graph& g, Var depth, Var image, bool trainable);
  Var forward(Graph& g, Var depth, Var image) const;

  /// Dimensionality of the depth code at the bottleneck.
  std::int64_t bottleneck_size() const;

 private:
  template <typename Self>
  static Var run(Self& self, Graph& g, Var depth, Var image, bool trainable);

  CpnConfig cfg_;
};

CpnModel build_cpn(const CpnConfig& cfg, std::uint64_t seed);

/// E = power_penalty(d' - d, eta), the negative log of the prior Q = exp(-E).
/// The CPN is used frozen: gradients reach `depth` but not its parameters.
Var cpn_score(Graph& g, const CpnModel& m, Var depth, Var image);
double cpn_score(const CpnModel& m, const Tensor& depth, const Tensor& image);

// ---------------------------------------------------------------------------
// Flat key/value encodings stored in checkpoint manifests.

using KeyValues = std::map<std::string, std::string>;

KeyValues to_key_values(const DcnConfig& cfg);
KeyValues to_key_values(const CpnConfig& cfg);
DcnConfig dcn_config_from(const KeyValues& kv);
CpnConfig cpn_config_from(const KeyValues& kv);

}  // namespace depthcomp
