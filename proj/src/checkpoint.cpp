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

#include "depthcomp/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace depthcomp {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint blobs are written in host order");

constexpr const char* kMagic = "depthcomp-checkpoint";

std::filesystem::path stem_of(const std::filesystem::path& p) {
  if (p.extension() == ".ckpt" || p.extension() == ".bin") {
    auto s = p;
    return s.replace_extension();
  }
  return p;
}

std::filesystem::path with_ext(const std::filesystem::path& stem,
                               const char* ext) {
  return std::filesystem::path(stem.string() + ext);
}

void write_atomic(const std::filesystem::path& path, const std::string& bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_all(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

template <typename M>
Checkpoint checkpoint_of(const M& m, const char* kind, std::int64_t step) {
  Checkpoint ck;
  ck.kind = kind;
  ck.step = step;
  ck.config = to_key_values(m.config());
  for (const auto& p : m.params()) ck.tensors.emplace_back(p.name, p.value);
  return ck;
}

void require_kind(const Checkpoint& ck, const std::string& kind) {
  if (ck.kind != kind) {
    throw std::invalid_argument("checkpoint holds a '" + ck.kind +
                                "' model, expected '" + kind + "'");
  }
}

}  // namespace

const Tensor* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return &t;
  }
  return nullptr;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  const auto stem = stem_of(path);
  if (!stem.parent_path().empty()) {
    std::filesystem::create_directories(stem.parent_path());
  }
  std::ostringstream manifest;
  manifest << kMagic << " 1\n";
  manifest << "kind " << ck.kind << "\n";
  manifest << "step " << ck.step << "\n";
  for (const auto& [k, v] : ck.config) {
    if (k.find(' ') != std::string::npos || v.find(' ') != std::string::npos) {
      throw std::invalid_argument("config entries may not contain spaces: " + k);
    }
    manifest << "config " << k << " " << v << "\n";
  }
  std::string blob;
  for (const auto& [name, t] : ck.tensors) {
    if (name.find(' ') != std::string::npos) {
      throw std::invalid_argument("tensor names may not contain spaces: " + name);
    }
    const Shape s = t.shape();
    manifest << "tensor " << name << " " << s.n << " " << s.c << " " << s.h
             << " " << s.w << " f64 " << blob.size() << " " << t.size()
             << "\n";
    const auto* bytes = reinterpret_cast<const char*>(t.data().data());
    blob.append(bytes, t.size() * sizeof(double));
  }
  write_atomic(with_ext(stem, ".bin"), blob);
  write_atomic(with_ext(stem, ".ckpt"), manifest.str());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const auto stem = stem_of(path);
  const auto manifest_path = with_ext(stem, ".ckpt");
  const std::string text = read_all(manifest_path);
  const std::string blob = read_all(with_ext(stem, ".bin"));

  Checkpoint ck;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& why) {
    throw std::runtime_error(manifest_path.string() + ":" +
                             std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (lineno == 1) {
      int version = 0;
      if (tag != kMagic || !(ls >> version) || version != 1) {
        fail("not a depthcomp checkpoint manifest");
      }
    } else if (tag == "kind") {
      ls >> ck.kind;
    } else if (tag == "step") {
      if (!(ls >> ck.step)) fail("bad step");
    } else if (tag == "config") {
      std::string k, v;
      if (!(ls >> k >> v)) fail("bad config line");
      ck.config[k] = v;
    } else if (tag == "tensor") {
      std::string name, dtype;
      Shape s;
      std::size_t offset = 0, count = 0;
      if (!(ls >> name >> s.n >> s.c >> s.h >> s.w >> dtype >> offset >>
            count)) {
        fail("bad tensor line");
      }
      if (dtype != "f64") fail("unsupported dtype " + dtype);
      if (count != s.numel()) fail("element count does not match shape");
      if (offset + count * sizeof(double) > blob.size()) {
        fail("tensor '" + name + "' extends past end of blob");
      }
      std::vector<double> data(count);
      std::memcpy(data.data(), blob.data() + offset, count * sizeof(double));
      ck.tensors.emplace_back(name, Tensor(s, std::move(data)));
    } else {
      fail("unknown record '" + tag + "'");
    }
  }
  if (lineno == 0) {
    throw std::runtime_error(manifest_path.string() + ": empty manifest");
  }
  return ck;
}

Checkpoint make_checkpoint(const DcnModel& m, std::int64_t step) {
  return checkpoint_of(m, "dcn", step);
}

Checkpoint make_checkpoint(const CpnModel& m, std::int64_t step) {
  return checkpoint_of(m, "cpn", step);
}

void load_parameters(const Checkpoint& ck, std::vector<Parameter>& params) {
  for (auto& p : params) {
    const Tensor* t = ck.find(p.name);
    if (!t) {
      throw std::invalid_argument("checkpoint lacks parameter '" + p.name + "'");
    }
    if (!(t->shape() == p.value.shape())) {
      throw std::invalid_argument("checkpoint parameter '" + p.name +
                                  "' has shape " + to_string(t->shape()) +
                                  ", model expects " +
                                  to_string(p.value.shape()));
    }
    p.value = *t;
    p.zero_grad();
  }
}

DcnModel dcn_from_checkpoint(const Checkpoint& ck) {
  require_kind(ck, "dcn");
  DcnModel m(dcn_config_from(ck.config), 0);
  load_parameters(ck, m.params());
  return m;
}

CpnModel cpn_from_checkpoint(const Checkpoint& ck) {
  require_kind(ck, "cpn");
  CpnModel m(cpn_config_from(ck.config), 0);
  load_parameters(ck, m.params());
  return m;
}

}  // namespace depthcomp
