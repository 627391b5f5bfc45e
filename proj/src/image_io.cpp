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

#include "depthcomp/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace depthcomp {
namespace fs = std::filesystem;
namespace {

struct PngImage {
  int width = 0;
  int height = 0;
  int channels = 0;  // 1 or 3
  int bit_depth = 0;  // 8 or 16
  std::vector<std::uint16_t> samples;  // row-major, interleaved
};

void on_png_error(png_structp png, png_const_charp msg) {
  auto* err = static_cast<std::string*>(png_get_error_ptr(png));
  if (err) *err = msg;
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

void append_bytes(png_structp png, png_bytep data, png_size_t n) {
  auto* out = static_cast<std::string*>(png_get_io_ptr(png));
  out->append(reinterpret_cast<const char*>(data), n);
}

void flush_bytes(png_structp) {}

std::string encode_png(const PngImage& img) {
  std::string out;
  std::string err;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err,
                                            on_png_error, on_png_warning);
  if (!png) throw std::runtime_error("png: out of memory");
  png_infop info = png_create_info_struct(png);
  const std::size_t bytes_per = img.bit_depth / 8;
  const std::size_t stride = static_cast<std::size_t>(img.width) * img.channels * bytes_per;
  std::vector<png_byte> buf(stride * img.height);
  for (std::size_t i = 0; i < img.samples.size(); ++i) {
    if (bytes_per == 2) {
      buf[2 * i] = static_cast<png_byte>(img.samples[i] >> 8);  // big-endian
      buf[2 * i + 1] = static_cast<png_byte>(img.samples[i] & 0xff);
    } else {
      buf[i] = static_cast<png_byte>(img.samples[i]);
    }
  }
  std::vector<png_bytep> rows(img.height);
  for (int y = 0; y < img.height; ++y) rows[y] = buf.data() + y * stride;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("png encode failed: " + err);
  }
  png_set_write_fn(png, &out, append_bytes, flush_bytes);
  png_set_IHDR(png, info, img.width, img.height, img.bit_depth,
               img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

PngImage decode_png(const fs::path& path) {
  std::FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) throw std::runtime_error("cannot open " + path.string());
  png_byte sig[8] = {};
  if (std::fread(sig, 1, 8, fp) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    std::fclose(fp);
    throw std::runtime_error(path.string() + ": not a PNG file");
  }
  std::string err;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err,
                                           on_png_error, on_png_warning);
  png_infop info = png_create_info_struct(png);
  PngImage img;
  std::vector<png_byte> buf;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw std::runtime_error(path.string() + ": malformed PNG: " + err);
  }
  png_init_io(png, fp);
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);
  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  img.channels = png_get_channels(png, info);
  img.bit_depth = png_get_bit_depth(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  buf.resize(stride * img.height);
  rows.resize(img.height);
  for (int y = 0; y < img.height; ++y) rows[y] = buf.data() + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);

  const std::size_t n = static_cast<std::size_t>(img.width) * img.height * img.channels;
  img.samples.resize(n);
  for (int y = 0; y < img.height; ++y) {
    const png_byte* row = rows[y];
    const std::size_t per_row = static_cast<std::size_t>(img.width) * img.channels;
    for (std::size_t i = 0; i < per_row; ++i) {
      img.samples[y * per_row + i] =
          img.bit_depth == 16
              ? static_cast<std::uint16_t>((row[2 * i] << 8) | row[2 * i + 1])
              : row[i];
    }
  }
  return img;
}

void require_map(const Tensor& t, int c, const char* what) {
  const Shape s = t.shape();
  if (s.n != 1 || s.c != c || s.h < 1 || s.w < 1) {
    throw std::invalid_argument(std::string(what) + ": expected (1," +
                                std::to_string(c) + ",h,w), got " + to_string(s));
  }
}

std::uint16_t depth_code(double d, double valid) {
  if (valid == 0.0) return 0;
  if (!(d >= 0.0) || d >= 65536.0 / kDepthScale) {
    throw std::invalid_argument("depth " + std::to_string(d) +
                                " m outside the 16-bit range [0, 256)");
  }
  return static_cast<std::uint16_t>(
      std::min(65535.0, std::floor(d * kDepthScale + 0.5)));
}

}  // namespace

void write_file_atomic(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

Tensor quantize_depth(const Tensor& depth, const Tensor& validity) {
  require_same_shape(depth.shape(), validity.shape(), "quantize_depth");
  Tensor out(depth.shape());
  for (std::size_t i = 0; i < depth.size(); ++i) {
    out[i] = depth_code(depth[i], validity[i]) / kDepthScale;
  }
  return out;
}

void write_depth_png(const fs::path& path, const Tensor& depth,
                     const Tensor& validity) {
  require_map(depth, 1, "write_depth_png");
  require_same_shape(depth.shape(), validity.shape(), "write_depth_png validity");
  PngImage img;
  img.width = depth.shape().w;
  img.height = depth.shape().h;
  img.channels = 1;
  img.bit_depth = 16;
  img.samples.resize(depth.size());
  for (std::size_t i = 0; i < depth.size(); ++i) {
    img.samples[i] = depth_code(depth[i], validity[i]);
  }
  write_file_atomic(path, encode_png(img));
}

DepthMap read_depth_png(const fs::path& path) {
  const PngImage img = decode_png(path);
  if (img.channels != 1 || img.bit_depth != 16) {
    throw std::runtime_error(path.string() +
                             ": depth PNG must be 16-bit single channel");
  }
  DepthMap out{Tensor({1, 1, img.height, img.width}),
               Tensor({1, 1, img.height, img.width})};
  for (std::size_t i = 0; i < img.samples.size(); ++i) {
    if (img.samples[i] == 0) continue;
    out.depth[i] = img.samples[i] / kDepthScale;
    out.validity[i] = 1.0;
  }
  return out;
}

void write_rgb_png(const fs::path& path, const Tensor& image) {
  require_map(image, 3, "write_rgb_png");
  const Shape s = image.shape();
  PngImage img;
  img.width = s.w;
  img.height = s.h;
  img.channels = 3;
  img.bit_depth = 8;
  img.samples.resize(image.size());
  for (int y = 0; y < s.h; ++y) {
    for (int x = 0; x < s.w; ++x) {
      for (int c = 0; c < 3; ++c) {
        const double v = std::clamp(image.at(0, c, y, x), 0.0, 1.0);
        img.samples[(static_cast<std::size_t>(y) * s.w + x) * 3 + c] =
            static_cast<std::uint16_t>(std::lround(v * 255.0));
      }
    }
  }
  write_file_atomic(path, encode_png(img));
}

Tensor read_rgb_png(const fs::path& path) {
  const PngImage img = decode_png(path);
  if (img.channels != 3 && img.channels != 1) {
    throw std::runtime_error(path.string() + ": unsupported channel count");
  }
  const double scale = img.bit_depth == 16 ? 65535.0 : 255.0;
  Tensor out({1, 3, img.height, img.width});
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const std::size_t px = static_cast<std::size_t>(y) * img.width + x;
      for (int c = 0; c < 3; ++c) {
        const std::size_t k = img.channels == 3 ? px * 3 + c : px;
        out.at(0, c, y, x) = img.samples[k] / scale;
      }
    }
  }
  return out;
}

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest " + path.string());
  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    fs::path q(p);
    return q.is_absolute() ? q : base / q;
  };
  std::vector<ManifestEntry> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fail = [&](const std::string& why) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": " + why);
    };
    std::istringstream ls(line);
    std::vector<std::string> f;
    for (std::string tok; ls >> tok;) f.push_back(tok);
    if (f.size() != 2 && f.size() != 4 && f.size() != 5) {
      fail("expected 2, 4 or 5 fields, got " + std::to_string(f.size()));
    }
    ManifestEntry e;
    e.line = lineno;
    e.image = resolve(f[0]);
    e.depth = resolve(f[1]);
    if (f.size() == 5) e.stereo_image = resolve(f[2]);
    if (f.size() >= 4) {
      StereoRig rig;
      try {
        std::size_t used = 0;
        rig.focal_px = std::stod(f[f.size() - 2], &used);
        if (used != f[f.size() - 2].size()) throw std::invalid_argument("");
        rig.baseline_m = std::stod(f[f.size() - 1], &used);
        if (used != f[f.size() - 1].size()) throw std::invalid_argument("");
        rig.validate();
      } catch (const std::exception&) {
        fail("bad rig fields '" + f[f.size() - 2] + " " + f[f.size() - 1] + "'");
      }
      e.rig = rig;
    }
    for (const auto* p : {&e.image, &e.depth, &e.stereo_image}) {
      if (!p->empty() && !fs::exists(*p)) fail("missing file " + p->string());
    }
    out.push_back(std::move(e));
  }
  return out;
}

void write_manifest(const fs::path& path, std::span<const ManifestEntry> entries) {
  const fs::path base = path.parent_path();
  auto rel = [&](const fs::path& p) {
    return (base.empty() ? p : p.lexically_relative(base)).generic_string();
  };
  std::ostringstream os;
  os.precision(17);
  for (const auto& e : entries) {
    os << rel(e.image) << " " << rel(e.depth);
    if (!e.stereo_image.empty()) os << " " << rel(e.stereo_image);
    if (e.rig) os << " " << e.rig->focal_px << " " << e.rig->baseline_m;
    os << "\n";
  }
  write_file_atomic(path, os.str());
}

Sample load_sample(const ManifestEntry& entry) {
  Sample s;
  s.image = read_rgb_png(entry.image);
  DepthMap d = read_depth_png(entry.depth);
  if (d.depth.shape().h != s.image.shape().h ||
      d.depth.shape().w != s.image.shape().w) {
    throw std::runtime_error(entry.depth.string() + ": size differs from " +
                             entry.image.string());
  }
  s.depth = std::move(d.depth);
  s.validity = std::move(d.validity);
  if (!entry.stereo_image.empty()) {
    s.stereo_image = read_rgb_png(entry.stereo_image);
    require_same_shape(s.image.shape(), s.stereo_image.shape(), "stereo pair");
  }
  s.rig = entry.rig;
  return s;
}

std::vector<Sample> load_manifest(const fs::path& path) {
  std::vector<Sample> out;
  for (const auto& e : read_manifest(path)) out.push_back(load_sample(e));
  return out;
}

fs::path write_dataset(const fs::path& dir, std::span<const Scene> scenes) {
  fs::create_directories(dir);
  std::vector<ManifestEntry> entries;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const Scene& sc = scenes[i];
    ManifestEntry e;
    const std::string id = std::to_string(i);
    e.image = dir / ("scene_" + id + ".png");
    e.depth = dir / ("depth_" + id + ".png");
    write_rgb_png(e.image, sc.image);
    write_depth_png(e.depth, sc.depth, Tensor(sc.depth.shape(), 1.0));
    if (sc.has_stereo()) {
      e.stereo_image = dir / ("stereo_" + id + ".png");
      write_rgb_png(e.stereo_image, sc.stereo_image);
    }
    e.rig = sc.rig;
    entries.push_back(std::move(e));
  }
  const fs::path manifest = dir / "manifest.txt";
  write_manifest(manifest, entries);
  return manifest;
}

}  // namespace depthcomp
