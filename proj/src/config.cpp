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

#include "depthcomp/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace depthcomp {
namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"run",
       {"mode", "preset", "cpn_preset", "seed", "out", "cpn_checkpoint",
        "resume", "unsupervised_variant"}},
      {"loss", {"gamma", "eta", "alpha", "beta", "beta_c", "beta_s"}},
      {"optim", {"lr", "half_every", "steps", "batch", "eval_every"}},
      {"data",
       {"manifest", "scenes", "seed", "height", "width", "density", "stereo",
        "min_depth", "max_depth", "supersample"}},
      {"augment",
       {"crop_height", "crop_width", "flip_h", "flip_v", "hist_eq",
        "sparse_shift"}},
  };
  return keys;
}

template <typename T>
void read(const pt::ptree& tree, const char* key, T& out) {
  const auto v = tree.get_optional<std::string>(key);
  if (!v) return;
  const auto parsed = pt::ptree(*v).get_value_optional<T>();
  if (!parsed) {
    throw std::invalid_argument(std::string("config: bad value '") + *v +
                                "' for " + key);
  }
  out = *parsed;
}

void read_path(const pt::ptree& tree, const char* key,
               std::filesystem::path& out) {
  if (auto v = tree.get_optional<std::string>(key)) out = *v;
}

void read_bool(const pt::ptree& tree, const char* key, bool& out) {
  const auto v = tree.get_optional<std::string>(key);
  if (!v) return;
  if (*v == "1" || *v == "true" || *v == "yes") {
    out = true;
  } else if (*v == "0" || *v == "false" || *v == "no") {
    out = false;
  } else {
    throw std::invalid_argument(std::string("config: bad boolean '") + *v +
                                "' for " + key);
  }
}

}  // namespace

Mode parse_mode(std::string_view s) {
  if (s == "cpn") return Mode::cpn;
  if (s == "supervised") return Mode::supervised;
  if (s == "unsupervised") return Mode::unsupervised;
  if (s == "stereo") return Mode::stereo;
  throw std::invalid_argument("unknown mode '" + std::string(s) + "'");
}

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::cpn: return "cpn";
    case Mode::supervised: return "supervised";
    case Mode::unsupervised: return "unsupervised";
    case Mode::stereo: return "stereo";
  }
  return "?";
}

void RunConfig::validate() const {
  norms.validate();
  weights.validate();
  if (optim.steps < 0) throw std::invalid_argument("optim.steps must be >= 0");
  if (optim.batch < 1) throw std::invalid_argument("optim.batch must be >= 1");
  if (optim.half_every < 1 || optim.eval_every < 1) {
    throw std::invalid_argument("optim.half_every and eval_every must be >= 1");
  }
  if (!(optim.lr > 0.0)) throw std::invalid_argument("optim.lr must be > 0");
  if (!(data.density > 0.0 && data.density <= 1.0)) {
    throw std::invalid_argument("data.density must lie in (0, 1]");
  }
  if (data.manifest.empty()) {
    data.scene.validate();
    if (data.scenes < 2) {
      throw std::invalid_argument("data.scenes must be >= 2 for a validation split");
    }
    if (mode == Mode::stereo && !data.scene.stereo) {
      throw std::invalid_argument("stereo mode needs data.stereo = true");
    }
  }
  data.augment.validate();
}

RunConfig parse_run_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    const auto it = known_keys().find(section);
    if (it == known_keys().end()) {
      throw std::invalid_argument("config: unknown section [" + section + "]");
    }
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) {
        throw std::invalid_argument("config: unknown key " + section + "." + key);
      }
    }
  }
  RunConfig cfg;
  const pt::ptree empty;
  const auto& run = tree.get_child("run", empty);
  if (auto m = run.get_optional<std::string>("mode")) cfg.mode = parse_mode(*m);
  read(run, "preset", cfg.preset);
  read(run, "cpn_preset", cfg.cpn_preset);
  read(run, "seed", cfg.seed);
  read_path(run, "out", cfg.out_dir);
  read_path(run, "cpn_checkpoint", cfg.cpn_checkpoint);
  read_path(run, "resume", cfg.resume);
  read_bool(run, "unsupervised_variant", cfg.unsupervised_variant);

  const auto& loss = tree.get_child("loss", empty);
  read(loss, "gamma", cfg.norms.gamma);
  read(loss, "eta", cfg.norms.eta);
  read(loss, "alpha", cfg.weights.alpha);
  read(loss, "beta", cfg.weights.beta);
  read(loss, "beta_c", cfg.weights.beta_c);
  read(loss, "beta_s", cfg.weights.beta_s);

  const auto& optim = tree.get_child("optim", empty);
  read(optim, "lr", cfg.optim.lr);
  read(optim, "half_every", cfg.optim.half_every);
  read(optim, "steps", cfg.optim.steps);
  read(optim, "batch", cfg.optim.batch);
  read(optim, "eval_every", cfg.optim.eval_every);

  const auto& data = tree.get_child("data", empty);
  read_path(data, "manifest", cfg.data.manifest);
  read(data, "scenes", cfg.data.scenes);
  read(data, "seed", cfg.data.seed);
  read(data, "height", cfg.data.scene.height);
  read(data, "width", cfg.data.scene.width);
  read(data, "density", cfg.data.density);
  read_bool(data, "stereo", cfg.data.scene.stereo);
  read(data, "min_depth", cfg.data.scene.min_depth);
  read(data, "max_depth", cfg.data.scene.max_depth);
  read(data, "supersample", cfg.data.scene.supersample);

  const auto& aug = tree.get_child("augment", empty);
  read(aug, "crop_height", cfg.data.augment.crop_height);
  read(aug, "crop_width", cfg.data.augment.crop_width);
  read(aug, "flip_h", cfg.data.augment.flip_h);
  read(aug, "flip_v", cfg.data.augment.flip_v);
  read_bool(aug, "hist_eq", cfg.data.augment.hist_eq);
  read_bool(aug, "sparse_shift", cfg.data.augment.sparse_shift);

  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  try {
    return parse_run_config(os.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

std::string to_ini(const RunConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << "[run]\nmode = " << to_string(c.mode) << "\npreset = " << c.preset
     << "\ncpn_preset = " << c.cpn_preset << "\nseed = " << c.seed
     << "\nout = " << c.out_dir.string()
     << "\nunsupervised_variant = " << (c.unsupervised_variant ? 1 : 0) << "\n";
  if (!c.cpn_checkpoint.empty()) os << "cpn_checkpoint = " << c.cpn_checkpoint.string() << "\n";
  if (!c.resume.empty()) os << "resume = " << c.resume.string() << "\n";
  os << "\n[loss]\ngamma = " << c.norms.gamma << "\neta = " << c.norms.eta
     << "\nalpha = " << c.weights.alpha << "\nbeta = " << c.weights.beta
     << "\nbeta_c = " << c.weights.beta_c << "\nbeta_s = " << c.weights.beta_s
     << "\n\n[optim]\nlr = " << c.optim.lr
     << "\nhalf_every = " << c.optim.half_every << "\nsteps = " << c.optim.steps
     << "\nbatch = " << c.optim.batch << "\neval_every = " << c.optim.eval_every
     << "\n\n[data]\n";
  if (!c.data.manifest.empty()) os << "manifest = " << c.data.manifest.string() << "\n";
  os << "scenes = " << c.data.scenes << "\nseed = " << c.data.seed
     << "\nheight = " << c.data.scene.height << "\nwidth = " << c.data.scene.width
     << "\ndensity = " << c.data.density
     << "\nstereo = " << (c.data.scene.stereo ? 1 : 0)
     << "\nmin_depth = " << c.data.scene.min_depth
     << "\nmax_depth = " << c.data.scene.max_depth
     << "\nsupersample = " << c.data.scene.supersample
     << "\n\n[augment]\ncrop_height = " << c.data.augment.crop_height
     << "\ncrop_width = " << c.data.augment.crop_width
     << "\nflip_h = " << c.data.augment.flip_h
     << "\nflip_v = " << c.data.augment.flip_v
     << "\nhist_eq = " << (c.data.augment.hist_eq ? 1 : 0)
     << "\nsparse_shift = " << (c.data.augment.sparse_shift ? 1 : 0) << "\n";
  return os.str();
}

}  // namespace depthcomp
