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

#include "depthcomp/networks.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <type_traits>
#include <utility>

namespace depthcomp {
namespace {

// Keeps the output strictly positive even where softplus underflows.
constexpr double kMinDepth = 1e-3;
// Initial DCN output as a fraction of max_depth.
constexpr double kInitDepthFraction = 0.25;

std::string stage_name(std::string_view prefix, int stage,
                       std::string_view leaf) {
  std::string s(prefix);
  s += '.';
  s += std::to_string(stage);
  s += '.';
  s += leaf;
  return s;
}

void append_encoder(std::vector<LayerInfo>& out, std::string_view prefix,
                    const EncoderSpec& spec, const std::vector<int>& channels,
                    const std::vector<int>& strides) {
  int in_c = spec.in_channels;
  for (int i = 0; i < spec.num_stages(); ++i) {
    const int c = channels[i];
    out.push_back({stage_name(prefix, i, "down"), LayerKind::conv, in_c, c, 3,
                   strides[i], true});
    if (spec.block == BlockKind::resnet_block) {
      out.push_back(
          {stage_name(prefix, i, "res.a"), LayerKind::conv, c, c, 3, 1, true});
      out.push_back(
          {stage_name(prefix, i, "res.b"), LayerKind::conv, c, c, 3, 1, true});
    }
    in_c = c;
  }
}

LayerInfo up_layer(std::string name, int in_c, int out_c, int stride) {
  return {std::move(name),
          stride == 2 ? LayerKind::conv_transpose : LayerKind::conv,
          in_c,
          out_c,
          3,
          stride,
          true};
}

std::vector<int> dcn_strides(const DcnConfig& cfg, const EncoderSpec& spec) {
  std::vector<int> s = spec.stride_schedule();
  if (!s.empty()) s[0] = cfg.unsupervised_variant ? 2 : 1;
  return s;
}

void check_dcn(const DcnConfig& cfg) {
  if (cfg.depth.num_stages() != cfg.image.num_stages() ||
      cfg.depth.num_stages() == 0) {
    throw std::invalid_argument(
        "dcn: both encoders need the same non-zero number of stages");
  }
  if (cfg.depth.in_channels != 1 || cfg.image.in_channels != 3) {
    throw std::invalid_argument(
        "dcn: depth branch takes 1 channel and image branch 3");
  }
  if (cfg.depth.stride_schedule() != cfg.image.stride_schedule()) {
    throw std::invalid_argument("dcn: branch stride schedules differ");
  }
  if (!(cfg.max_depth > 0.0)) throw std::invalid_argument("dcn: max_depth <= 0");
}

void check_eta(int eta) {
  if (eta != 1 && eta != 2) {
    throw std::invalid_argument("eta must be 1 or 2, got " +
                                std::to_string(eta));
  }
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<int> EncoderSpec::channels() const {
  if (!(k > 0.0)) throw std::invalid_argument("encoder: k must be > 0");
  std::vector<int> out;
  for (int b : base_channels) {
    const int c = static_cast<int>(std::lround(b * k));
    if (c < 1) {
      throw std::invalid_argument("encoder: round(" + std::to_string(b) +
                                  " * k) < 1");
    }
    out.push_back(c);
  }
  return out;
}

std::vector<int> EncoderSpec::stride_schedule() const {
  if (strides.empty()) return std::vector<int>(base_channels.size(), 2);
  if (strides.size() != base_channels.size()) {
    throw std::invalid_argument("encoder: stride schedule length " +
                                std::to_string(strides.size()) +
                                " != stage count " +
                                std::to_string(base_channels.size()));
  }
  for (int s : strides) {
    if (s != 1 && s != 2) throw std::invalid_argument("encoder: stride not 1/2");
  }
  return strides;
}

std::int64_t LayerInfo::weight_count() const {
  if (kind == LayerKind::upsample_nearest) return 0;
  return conv_weight_count(kernel, in_c, out_c);
}

std::int64_t LayerInfo::bias_count() const {
  if (kind == LayerKind::upsample_nearest || !bias) return 0;
  return out_c;
}

ParameterCount count_parameters(std::span<const LayerInfo> layers,
                                bool include_bias) {
  ParameterCount pc;
  for (const auto& l : layers) {
    const std::int64_t n =
        l.weight_count() + (include_bias ? l.bias_count() : 0);
    pc.per_layer.emplace_back(l.name, n);
    pc.total += n;
  }
  return pc;
}

// ---------------------------------------------------------------------------

void Network::init_layers(std::vector<LayerInfo> layers, std::uint64_t seed) {
  layers_ = std::move(layers);
  slots_.assign(layers_.size(), Slot{});
  by_name_.clear();
  params_.clear();
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerInfo& l = layers_[i];
    if (!by_name_.emplace(l.name, i).second) {
      throw std::logic_error("duplicate layer name " + l.name);
    }
    if (l.kind == LayerKind::upsample_nearest) continue;
    const bool transpose = l.kind == LayerKind::conv_transpose;
    Shape ws = transpose ? Shape{l.in_c, l.out_c, l.kernel, l.kernel}
                         : Shape{l.out_c, l.in_c, l.kernel, l.kernel};
    double fan_in = static_cast<double>(l.in_c) * l.kernel * l.kernel;
    if (transpose) fan_in /= l.stride * l.stride;
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / fan_in));
    Tensor w(ws);
    for (auto& v : w.vec()) v = normal(rng);
    slots_[i].weight = static_cast<int>(params_.size());
    params_.push_back({l.name + ".weight", std::move(w), {}});
    if (l.bias) {
      slots_[i].bias = static_cast<int>(params_.size());
      params_.push_back({l.name + ".bias", Tensor({1, l.out_c, 1, 1}), {}});
    }
  }
}

std::size_t Network::index_of(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) {
    throw std::invalid_argument("no layer named '" + std::string(name) + "'");
  }
  return it->second;
}

const LayerInfo& Network::layer(std::string_view name) const {
  return layers_[index_of(name)];
}

bool Network::has_layer(std::string_view name) const {
  return by_name_.count(std::string(name)) > 0;
}

std::vector<Parameter*> Network::param_ptrs() {
  std::vector<Parameter*> out;
  for (auto& p : params_) out.push_back(&p);
  return out;
}

Var Network::apply(Graph& g, std::string_view name, Var x, bool trainable) {
  if (!trainable) return std::as_const(*this).apply(g, name, x);
  const std::size_t i = index_of(name);
  const Slot s = slots_[i];
  Var w = s.weight >= 0 ? g.parameter(params_[s.weight]) : Var();
  Var b = s.bias >= 0 ? g.parameter(params_[s.bias]) : Var();
  return apply_impl(g, i, x, w, b);
}

Var Network::apply(Graph& g, std::string_view name, Var x) const {
  const std::size_t i = index_of(name);
  const Slot s = slots_[i];
  Var w = s.weight >= 0 ? g.constant_ref(params_[s.weight].value) : Var();
  Var b = s.bias >= 0 ? g.constant_ref(params_[s.bias].value) : Var();
  return apply_impl(g, i, x, w, b);
}

Var Network::apply_impl(Graph&, std::size_t index, Var x, Var w,
                        Var b) const {
  const LayerInfo& l = layers_[index];
  switch (l.kind) {
    case LayerKind::conv:
      return conv2d(x, w, b, l.stride, l.kernel / 2);
    case LayerKind::conv_transpose:
      return conv_transpose2d(x, w, b, l.stride, l.kernel / 2, l.stride - 1);
    case LayerKind::upsample_nearest:
      return upsample_nearest2x(x);
  }
  throw std::logic_error("unknown layer kind");
}

// ---------------------------------------------------------------------------
// DCN

DcnConfig dcn_preset(std::string_view name, bool unsupervised_variant) {
  DcnConfig cfg;
  std::vector<int> base;
  if (name == "full") {
    base = {64, 128, 256, 512, 512};
  } else if (name == "desk") {
    base = {16, 32, 64};
  } else if (name == "tiny") {
    base = {8, 16, 32};
  } else {
    throw std::invalid_argument("unknown model preset '" + std::string(name) +
                                "'");
  }
  std::vector<int> strides(base.size(), 2);
  strides[0] = 1;
  cfg.depth = {base, 0.25, 1, strides, BlockKind::resnet_block};
  cfg.image = {base, 0.75, 3, strides, BlockKind::resnet_block};
  cfg.unsupervised_variant = unsupervised_variant;
  return cfg;
}

std::vector<LayerInfo> dcn_layout(const DcnConfig& cfg) {
  check_dcn(cfg);
  const auto cd = cfg.depth.channels();
  const auto ci = cfg.image.channels();
  const auto strides = dcn_strides(cfg, cfg.depth);
  const int n = cfg.depth.num_stages();
  std::vector<LayerInfo> out;
  append_encoder(out, "enc_d", cfg.depth, cd, strides);
  append_encoder(out, "enc_i", cfg.image, ci, strides);
  int width = cd[n - 1] + ci[n - 1];
  for (int j = n - 2; j >= 0; --j) {
    const int dec = cd[j] + ci[j];
    out.push_back(up_layer(stage_name("dec", j, "up"), width, dec,
                           strides[j + 1]));
    out.push_back({stage_name("dec", j, "fuse"), LayerKind::conv,
                   dec + cd[j] + ci[j], dec, 3, 1, true});
    width = dec;
  }
  out.push_back({"out", LayerKind::conv, width, 1, 3, 1, true});
  if (strides[0] == 2) {
    out.push_back({"out.upsample", LayerKind::upsample_nearest, 1, 1, 1, 2,
                   false});
  }
  return out;
}

std::vector<LayerInfo> dcn_fused_layout(const DcnConfig& cfg) {
  check_dcn(cfg);
  EncoderSpec fused = cfg.depth;
  fused.k = 1.0;
  fused.in_channels = cfg.depth.in_channels + cfg.image.in_channels;
  const auto cf = fused.channels();
  const auto strides = dcn_strides(cfg, fused);
  const int n = fused.num_stages();
  std::vector<LayerInfo> out;
  append_encoder(out, "enc_f", fused, cf, strides);
  int width = cf[n - 1];
  for (int j = n - 2; j >= 0; --j) {
    const int dec = cf[j];
    out.push_back(up_layer(stage_name("dec", j, "up"), width, dec,
                           strides[j + 1]));
    out.push_back({stage_name("dec", j, "fuse"), LayerKind::conv, dec + cf[j],
                   dec, 3, 1, true});
    width = dec;
  }
  out.push_back({"out", LayerKind::conv, width, 1, 3, 1, true});
  if (strides[0] == 2) {
    out.push_back({"out.upsample", LayerKind::upsample_nearest, 1, 1, 1, 2,
                   false});
  }
  return out;
}

DcnModel::DcnModel(DcnConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
  init_layers(dcn_layout(cfg_), seed);
  // Output layer starts small with its bias at the initial depth guess.
  for (auto& p : params()) {
    if (p.name == "out.weight") {
      for (auto& v : p.value.vec()) v *= 0.1;
    } else if (p.name == "out.bias") {
      const double x = kInitDepthFraction;
      p.value.fill(std::log(std::expm1(x)));
    }
  }
}

int DcnModel::downsample_factor() const {
  int f = 1;
  for (int s : dcn_strides(cfg_, cfg_.depth)) f *= s;
  return f;
}

template <typename Self>
Var DcnModel::run(Self& self, Graph& g, Var z, Var image, bool trainable) {
  const Shape zs = z.shape();
  const Shape is = image.shape();
  if (zs.c != 1 || is.c != 3 || zs.n != is.n || zs.h != is.h ||
      zs.w != is.w) {
    throw std::invalid_argument("dcn_forward: sparse depth " + to_string(zs) +
                                " and image " + to_string(is) +
                                " are not aligned");
  }
  const int f = self.downsample_factor();
  if (zs.h % f != 0 || zs.w % f != 0) {
    throw std::invalid_argument("dcn_forward: input " + to_string(zs) +
                                " not divisible by " + std::to_string(f));
  }
  auto L = [&](const std::string& name, Var x) {
    if constexpr (std::is_const_v<Self>) {
      return self.apply(g, name, x);
    } else {
      return self.apply(g, name, x, trainable);
    }
  };
  const DcnConfig& cfg = self.cfg_;
  const int n = cfg.depth.num_stages();
  const bool resnet = cfg.depth.block == BlockKind::resnet_block;
  auto encode = [&](const std::string& prefix, Var x) {
    std::vector<Var> skips;
    for (int i = 0; i < n; ++i) {
      x = relu(L(stage_name(prefix, i, "down"), x));
      if (resnet) {
        Var y = relu(L(stage_name(prefix, i, "res.a"), x));
        y = L(stage_name(prefix, i, "res.b"), y);
        x = relu(add(x, y));
      }
      skips.push_back(x);
    }
    return skips;
  };
  const auto ed = encode("enc_d", scale(z, 1.0 / cfg.max_depth));
  const auto ei = encode("enc_i", image);
  Var x = concat_channels(ed[n - 1], ei[n - 1]);
  for (int j = n - 2; j >= 0; --j) {
    x = relu(L(stage_name("dec", j, "up"), x));
    x = concat_channels(concat_channels(x, ed[j]), ei[j]);
    x = relu(L(stage_name("dec", j, "fuse"), x));
  }
  x = L("out", x);
  if (self.has_layer("out.upsample")) x = L("out.upsample", x);
  return add_scalar(scale(softplus(x), cfg.max_depth), kMinDepth);
}

Var DcnModel::forward(Graph& g, Var z, Var image, bool trainable) {
  return run(*this, g, z, image, trainable);
}

Var DcnModel::forward(Graph& g, Var z, Var image) const {
  return run(*this, g, z, image, false);
}

DcnModel build_dcn(const DcnConfig& cfg, std::uint64_t seed) {
  return DcnModel(cfg, seed);
}

// ---------------------------------------------------------------------------
// CPN

int CpnConfig::resolved_bottleneck() const {
  const auto strides = depth.stride_schedule();
  int f = 1;
  for (int s : strides) f *= s;
  const std::int64_t pixels =
      static_cast<std::int64_t>(input_height) * input_width;
  const std::int64_t spatial =
      static_cast<std::int64_t>(input_height / f) * (input_width / f);
  if (spatial <= 0) {
    throw std::invalid_argument("cpn: input " + std::to_string(input_height) +
                                "x" + std::to_string(input_width) +
                                " smaller than the encoder downsampling");
  }
  if (bottleneck_channels > 0) return bottleneck_channels;
  const auto widths = depth.channels();
  const std::int64_t cap = pixels / 16 / spatial;
  return static_cast<int>(
      std::max<std::int64_t>(1, std::min<std::int64_t>(cap, widths.back())));
}

CpnConfig cpn_preset(std::string_view name, int height, int width, int eta) {
  CpnConfig cfg;
  std::vector<int> base;
  if (name == "full") {
    base = {64, 128, 256, 512, 512};
  } else if (name == "desk") {
    base = {16, 32, 64};
  } else if (name == "tiny") {
    base = {8, 16, 32};
  } else {
    throw std::invalid_argument("unknown model preset '" + std::string(name) +
                                "'");
  }
  cfg.depth = {base, 0.25, 1, {}, BlockKind::plain_conv};
  cfg.image = {base, 0.75, 3, {}, BlockKind::plain_conv};
  cfg.eta = eta;
  cfg.input_height = height;
  cfg.input_width = width;
  return cfg;
}

std::vector<LayerInfo> cpn_layout(const CpnConfig& cfg) {
  check_eta(cfg.eta);
  if (cfg.depth.num_stages() != cfg.image.num_stages() ||
      cfg.depth.num_stages() == 0) {
    throw std::invalid_argument(
        "cpn: both encoders need the same non-zero number of stages");
  }
  if (cfg.depth.stride_schedule() != cfg.image.stride_schedule()) {
    throw std::invalid_argument("cpn: branch stride schedules differ");
  }
  const int n = cfg.depth.num_stages();
  auto cd = cfg.depth.channels();
  const auto ci = cfg.image.channels();
  const auto strides = cfg.depth.stride_schedule();
  cd[n - 1] = cfg.resolved_bottleneck();

  int f = 1;
  for (int s : strides) f *= s;
  const std::int64_t code = static_cast<std::int64_t>(cd[n - 1]) *
                            (cfg.input_height / f) * (cfg.input_width / f);
  const std::int64_t pixels =
      static_cast<std::int64_t>(cfg.input_height) * cfg.input_width;
  if (code >= pixels) {
    throw std::invalid_argument(
        "cpn: bottleneck size " + std::to_string(code) +
        " does not compress the depth input of " + std::to_string(pixels) +
        " values");
  }

  std::vector<LayerInfo> out;
  append_encoder(out, "cpn_d", cfg.depth, cd, strides);
  append_encoder(out, "cpn_i", cfg.image, ci, strides);
  int width = cd[n - 1] + ci[n - 1];
  for (int j = n - 2; j >= 0; --j) {
    const int dec = cfg.depth.channels()[j] + ci[j];
    out.push_back(up_layer(stage_name("dec", j, "up"), width, dec,
                           strides[j + 1]));
    if (cfg.image_skips) {
      out.push_back({stage_name("dec", j, "fuse"), LayerKind::conv,
                     dec + ci[j], dec, 3, 1, true});
    }
    width = dec;
  }
  if (strides[0] == 2) {
    out.push_back(up_layer("dec.top.up", width, width, 2));
  }
  out.push_back({"out", LayerKind::conv, width, 1, 3, 1, true});
  return out;
}

CpnModel::CpnModel(CpnConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
  init_layers(cpn_layout(cfg_), seed);
  for (auto& p : params()) {
    if (p.name == "out.weight") {
      for (auto& v : p.value.vec()) v *= 0.1;
    }
  }
}

std::int64_t CpnModel::bottleneck_size() const {
  int f = 1;
  for (int s : cfg_.depth.stride_schedule()) f *= s;
  return static_cast<std::int64_t>(cfg_.resolved_bottleneck()) *
         (cfg_.input_height / f) * (cfg_.input_width / f);
}

template <typename Self>
Var CpnModel::run(Self& self, Graph& g, Var depth, Var image, bool trainable) {
  const CpnConfig& cfg = self.cfg_;
  const Shape ds = depth.shape();
  const Shape is = image.shape();
  if (ds.c != 1 || is.c != 3 || ds.n != is.n || ds.h != is.h ||
      ds.w != is.w) {
    throw std::invalid_argument("cpn_forward: depth " + to_string(ds) +
                                " and image " + to_string(is) +
                                " are not aligned");
  }
  if (ds.h != cfg.input_height || ds.w != cfg.input_width) {
    throw std::invalid_argument(
        "cpn_forward: model built for " + std::to_string(cfg.input_height) +
        "x" + std::to_string(cfg.input_width) + " input, got " + to_string(ds));
  }
  auto L = [&](const std::string& name, Var x) {
    if constexpr (std::is_const_v<Self>) {
      return self.apply(g, name, x);
    } else {
      return self.apply(g, name, x, trainable);
    }
  };
  const int n = cfg.depth.num_stages();
  auto encode = [&](const std::string& prefix, Var x, bool resnet) {
    std::vector<Var> feats;
    for (int i = 0; i < n; ++i) {
      x = relu(L(stage_name(prefix, i, "down"), x));
      if (resnet) {
        Var y = relu(L(stage_name(prefix, i, "res.a"), x));
        y = L(stage_name(prefix, i, "res.b"), y);
        x = relu(add(x, y));
      }
      feats.push_back(x);
    }
    return feats;
  };
  const auto ed = encode("cpn_d", scale(depth, 1.0 / cfg.max_depth),
                         cfg.depth.block == BlockKind::resnet_block);
  const auto ei =
      encode("cpn_i", image, cfg.image.block == BlockKind::resnet_block);
  Var x = concat_channels(ed[n - 1], ei[n - 1]);
  for (int j = n - 2; j >= 0; --j) {
    x = relu(L(stage_name("dec", j, "up"), x));
    if (cfg.image_skips) {
      x = relu(L(stage_name("dec", j, "fuse"), concat_channels(x, ei[j])));
    }
  }
  if (self.has_layer("dec.top.up")) x = relu(L("dec.top.up", x));
  return scale(L("out", x), cfg.max_depth);
}

Var CpnModel::forward(Graph& g, Var depth, Var image, bool trainable) {
  return run(*this, g, depth, image, trainable);
}

Var CpnModel::forward(Graph& g, Var depth, Var image) const {
  return run(*this, g, depth, image, false);
}

CpnModel build_cpn(const CpnConfig& cfg, std::uint64_t seed) {
  return CpnModel(cfg, seed);
}

Var cpn_score(Graph& g, const CpnModel& m, Var depth, Var image) {
  Var recon = m.forward(g, depth, image);
  return power_penalty(sub(recon, depth), m.eta());
}

double cpn_score(const CpnModel& m, const Tensor& depth, const Tensor& image) {
  Graph g;
  return cpn_score(g, m, g.constant_ref(depth), g.constant_ref(image))
      .value()
      .item();
}

// ---------------------------------------------------------------------------

namespace {

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

std::vector<int> split_ints(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  return out;
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

const std::string& get(const KeyValues& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) {
    throw std::invalid_argument("model config missing key '" + key + "'");
  }
  return it->second;
}

void put_encoder(KeyValues& kv, const std::string& p, const EncoderSpec& e) {
  kv[p + ".base_channels"] = join_ints(e.base_channels);
  kv[p + ".k"] = fmt_double(e.k);
  kv[p + ".in_channels"] = std::to_string(e.in_channels);
  kv[p + ".strides"] = join_ints(e.stride_schedule());
  kv[p + ".block"] = e.block == BlockKind::resnet_block ? "resnet" : "plain";
}

EncoderSpec get_encoder(const KeyValues& kv, const std::string& p) {
  EncoderSpec e;
  e.base_channels = split_ints(get(kv, p + ".base_channels"));
  e.k = std::stod(get(kv, p + ".k"));
  e.in_channels = std::stoi(get(kv, p + ".in_channels"));
  e.strides = split_ints(get(kv, p + ".strides"));
  e.block = get(kv, p + ".block") == "resnet" ? BlockKind::resnet_block
                                              : BlockKind::plain_conv;
  return e;
}

}  // namespace

KeyValues to_key_values(const DcnConfig& cfg) {
  KeyValues kv;
  put_encoder(kv, "depth", cfg.depth);
  put_encoder(kv, "image", cfg.image);
  kv["unsupervised_variant"] = cfg.unsupervised_variant ? "1" : "0";
  kv["max_depth"] = fmt_double(cfg.max_depth);
  return kv;
}

KeyValues to_key_values(const CpnConfig& cfg) {
  KeyValues kv;
  put_encoder(kv, "depth", cfg.depth);
  put_encoder(kv, "image", cfg.image);
  kv["bottleneck_channels"] = std::to_string(cfg.bottleneck_channels);
  kv["eta"] = std::to_string(cfg.eta);
  kv["input_height"] = std::to_string(cfg.input_height);
  kv["input_width"] = std::to_string(cfg.input_width);
  kv["max_depth"] = fmt_double(cfg.max_depth);
  kv["image_skips"] = cfg.image_skips ? "1" : "0";
  return kv;
}

DcnConfig dcn_config_from(const KeyValues& kv) {
  DcnConfig cfg;
  cfg.depth = get_encoder(kv, "depth");
  cfg.image = get_encoder(kv, "image");
  cfg.unsupervised_variant = get(kv, "unsupervised_variant") == "1";
  cfg.max_depth = std::stod(get(kv, "max_depth"));
  return cfg;
}

CpnConfig cpn_config_from(const KeyValues& kv) {
  CpnConfig cfg;
  cfg.depth = get_encoder(kv, "depth");
  cfg.image = get_encoder(kv, "image");
  cfg.bottleneck_channels = std::stoi(get(kv, "bottleneck_channels"));
  cfg.eta = std::stoi(get(kv, "eta"));
  cfg.input_height = std::stoi(get(kv, "input_height"));
  cfg.input_width = std::stoi(get(kv, "input_width"));
  cfg.max_depth = std::stod(get(kv, "max_depth"));
  cfg.image_skips = get(kv, "image_skips") == "1";
  return cfg;
}

}  // namespace depthcomp
