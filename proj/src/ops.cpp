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

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>

#include "depthcomp/autograd.hpp"

namespace depthcomp {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                             Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

Graph& same_graph(Var a, Var b, const char* op) {
  if (!a.valid() || !b.valid() || a.graph() != b.graph()) {
    throw std::invalid_argument(std::string(op) +
                                ": operands must share one graph");
  }
  return *a.graph();
}

Graph& graph_of(Var a, const char* op) {
  if (!a.valid()) throw std::invalid_argument(std::string(op) + ": unbound Var");
  return *a.graph();
}

// ---------------------------------------------------------------------------
// Elementwise helpers.

template <typename F, typename DF>
Var unary(Var x, F f, DF df) {
  Graph& g = graph_of(x, "unary");
  const Tensor& xv = x.value();
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = f(xv[i]);
  const int xi = x.id();
  return g.record(std::move(out), {xi}, [xi, df](Graph& gr, int self) {
    if (!gr.needs_grad(xi)) return;
    const Tensor& gout = gr.out_grad(self);
    const Tensor& xv = gr.value(xi);
    const Tensor& yv = gr.value(self);
    Tensor& gx = gr.grad_accum(xi);
    for (std::size_t i = 0; i < gx.size(); ++i) {
      gx[i] += gout[i] * df(xv[i], yv[i]);
    }
  });
}

// ---------------------------------------------------------------------------
// im2col / col2im for one batch item. `col` is (c*kh*kw) x (oh*ow).

struct ConvGeom {
  int c, h, w, kh, kw, stride, pad, oh, ow;
};

void im2col(const double* img, const ConvGeom& g, double* col) {
  const std::size_t cols = static_cast<std::size_t>(g.oh) * g.ow;
  for (int c = 0; c < g.c; ++c) {
    for (int ki = 0; ki < g.kh; ++ki) {
      for (int kj = 0; kj < g.kw; ++kj) {
        double* row = col + ((static_cast<std::size_t>(c) * g.kh + ki) * g.kw +
                             kj) * cols;
        for (int oy = 0; oy < g.oh; ++oy) {
          const int iy = oy * g.stride - g.pad + ki;
          double* dst = row + static_cast<std::size_t>(oy) * g.ow;
          if (iy < 0 || iy >= g.h) {
            for (int ox = 0; ox < g.ow; ++ox) dst[ox] = 0.0;
            continue;
          }
          const double* src =
              img + (static_cast<std::size_t>(c) * g.h + iy) * g.w;
          for (int ox = 0; ox < g.ow; ++ox) {
            const int ix = ox * g.stride - g.pad + kj;
            dst[ox] = (ix >= 0 && ix < g.w) ? src[ix] : 0.0;
          }
        }
      }
    }
  }
}

void col2im_add(const double* col, const ConvGeom& g, double* img) {
  const std::size_t cols = static_cast<std::size_t>(g.oh) * g.ow;
  for (int c = 0; c < g.c; ++c) {
    for (int ki = 0; ki < g.kh; ++ki) {
      for (int kj = 0; kj < g.kw; ++kj) {
        const double* row =
            col + ((static_cast<std::size_t>(c) * g.kh + ki) * g.kw + kj) *
                      cols;
        for (int oy = 0; oy < g.oh; ++oy) {
          const int iy = oy * g.stride - g.pad + ki;
          if (iy < 0 || iy >= g.h) continue;
          const double* src = row + static_cast<std::size_t>(oy) * g.ow;
          double* dst = img + (static_cast<std::size_t>(c) * g.h + iy) * g.w;
          for (int ox = 0; ox < g.ow; ++ox) {
            const int ix = ox * g.stride - g.pad + kj;
            if (ix >= 0 && ix < g.w) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

void check_bias(Var bias, int channels, const char* op) {
  if (!bias.valid()) return;
  const Shape& s = bias.shape();
  if (s.numel() != static_cast<std::size_t>(channels)) {
    throw std::invalid_argument(std::string(op) + ": bias shape " +
                                to_string(s) + " does not match " +
                                std::to_string(channels) + " channels");
  }
}

void check_stride(int stride, const char* op) {
  if (stride != 1 && stride != 2) {
    throw std::invalid_argument(std::string(op) + ": stride must be 1 or 2, got " +
                                std::to_string(stride));
  }
}

void add_channel_bias(Tensor& out, const Tensor& b) {
  const Shape s = out.shape();
  const std::size_t plane = s.plane();
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      double* p = &out.at(n, c, 0, 0);
      for (std::size_t i = 0; i < plane; ++i) p[i] += b[c];
    }
  }
}

void accumulate_bias_grad(const Tensor& gout, Tensor& gb) {
  const Shape s = gout.shape();
  const std::size_t plane = s.plane();
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      const double* p = gout.data().data() + gout.offset(n, c, 0, 0);
      double acc = 0.0;
      for (std::size_t i = 0; i < plane; ++i) acc += p[i];
      gb[c] += acc;
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------

Var add(Var a, Var b) {
  Graph& g = same_graph(a, b, "add");
  require_same_shape(a.shape(), b.shape(), "add");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  Tensor out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  const int ai = a.id(), bi = b.id();
  return g.record(std::move(out), {ai, bi}, [ai, bi](Graph& gr, int self) {
    const Tensor& gout = gr.out_grad(self);
    for (int id : {ai, bi}) {
      if (!gr.needs_grad(id)) continue;
      Tensor& gx = gr.grad_accum(id);
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gout[i];
    }
  });
}

Var sub(Var a, Var b) {
  Graph& g = same_graph(a, b, "sub");
  require_same_shape(a.shape(), b.shape(), "sub");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  Tensor out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  const int ai = a.id(), bi = b.id();
  return g.record(std::move(out), {ai, bi}, [ai, bi](Graph& gr, int self) {
    const Tensor& gout = gr.out_grad(self);
    if (gr.needs_grad(ai)) {
      Tensor& ga = gr.grad_accum(ai);
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += gout[i];
    }
    if (gr.needs_grad(bi)) {
      Tensor& gb = gr.grad_accum(bi);
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= gout[i];
    }
  });
}

Var mul(Var a, Var b) {
  Graph& g = same_graph(a, b, "mul");
  require_same_shape(a.shape(), b.shape(), "mul");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  Tensor out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  const int ai = a.id(), bi = b.id();
  return g.record(std::move(out), {ai, bi}, [ai, bi](Graph& gr, int self) {
    const Tensor& gout = gr.out_grad(self);
    const Tensor& av = gr.value(ai);
    const Tensor& bv = gr.value(bi);
    if (gr.needs_grad(ai)) {
      Tensor& ga = gr.grad_accum(ai);
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += gout[i] * bv[i];
    }
    if (gr.needs_grad(bi)) {
      Tensor& gb = gr.grad_accum(bi);
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += gout[i] * av[i];
    }
  });
}

Var div(Var a, Var b) {
  Graph& g = same_graph(a, b, "div");
  require_same_shape(a.shape(), b.shape(), "div");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  Tensor out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] / bv[i];
  const int ai = a.id(), bi = b.id();
  return g.record(std::move(out), {ai, bi}, [ai, bi](Graph& gr, int self) {
    const Tensor& gout = gr.out_grad(self);
    const Tensor& bv = gr.value(bi);
    const Tensor& yv = gr.value(self);
    if (gr.needs_grad(ai)) {
      Tensor& ga = gr.grad_accum(ai);
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += gout[i] / bv[i];
    }
    if (gr.needs_grad(bi)) {
      Tensor& gb = gr.grad_accum(bi);
      for (std::size_t i = 0; i < gb.size(); ++i) {
        gb[i] -= gout[i] * yv[i] / bv[i];
      }
    }
  });
}

Var add_scalar(Var a, double c) {
  return unary(
      a, [c](double x) { return x + c; },
      [](double, double) { return 1.0; });
}

Var scale(Var a, double c) {
  return unary(
      a, [c](double x) { return c * x; }, [c](double, double) { return c; });
}

Var reciprocal(Var a, double c) {
  return unary(
      a, [c](double x) { return c / x; },
      [](double x, double y) { return -y / x; });
}

Var relu(Var x) {
  return unary(
      x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Var softplus(Var x) {
  return unary(
      x,
      [](double v) {
        return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
      },
      [](double v, double) {
        return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                        : std::exp(v) / (1.0 + std::exp(v));
      });
}

// ---------------------------------------------------------------------------

Var conv2d(Var input, Var weight, Var bias, int stride, int padding) {
  Graph& g = same_graph(input, weight, "conv2d");
  if (bias.valid()) same_graph(input, bias, "conv2d");
  check_stride(stride, "conv2d");
  const Shape xs = input.shape();
  const Shape ws = weight.shape();
  if (xs.c != ws.c) {
    throw std::invalid_argument("conv2d: input " + to_string(xs) +
                                " has " + std::to_string(xs.c) +
                                " channels but weight " + to_string(ws) +
                                " expects " + std::to_string(ws.c));
  }
  check_bias(bias, ws.n, "conv2d");
  ConvGeom geom{xs.c, xs.h, xs.w, ws.h, ws.w, stride, padding, 0, 0};
  geom.oh = (xs.h + 2 * padding - ws.h) / stride + 1;
  geom.ow = (xs.w + 2 * padding - ws.w) / stride + 1;
  if (geom.oh <= 0 || geom.ow <= 0) {
    throw std::invalid_argument("conv2d: kernel " + to_string(ws) +
                                " too large for input " + to_string(xs));
  }
  const int out_c = ws.n;
  const int krows = xs.c * ws.h * ws.w;
  const int cols = geom.oh * geom.ow;

  Tensor out({xs.n, out_c, geom.oh, geom.ow});
  std::vector<double> col(static_cast<std::size_t>(krows) * cols);
  const Tensor& xv = input.value();
  ConstMapMat wm(weight.value().data().data(), out_c, krows);
  for (int n = 0; n < xs.n; ++n) {
    im2col(&xv.data()[xv.offset(n, 0, 0, 0)], geom, col.data());
    MapMat om(&out.data()[out.offset(n, 0, 0, 0)], out_c, cols);
    om.noalias() = wm * ConstMapMat(col.data(), krows, cols);
  }
  if (bias.valid()) add_channel_bias(out, bias.value());

  const int xi = input.id(), wi = weight.id();
  const int bi = bias.valid() ? bias.id() : -1;
  std::vector<int> parents{xi, wi};
  if (bi >= 0) parents.push_back(bi);
  return g.record(
      std::move(out), std::move(parents),
      [xi, wi, bi, geom, out_c, krows, cols](Graph& gr, int self) {
        const Tensor& gout = gr.out_grad(self);
        const Tensor& xv = gr.value(xi);
        const bool need_x = gr.needs_grad(xi);
        const bool need_w = gr.needs_grad(wi);
        if (bi >= 0 && gr.needs_grad(bi)) {
          accumulate_bias_grad(gout, gr.grad_accum(bi));
        }
        if (!need_x && !need_w) return;
        ConstMapMat wm(gr.value(wi).data().data(), out_c, krows);
        std::vector<double> col(static_cast<std::size_t>(krows) * cols);
        RowMat dw;
        if (need_w) dw = RowMat::Zero(out_c, krows);
        for (int n = 0; n < xv.shape().n; ++n) {
          ConstMapMat go(&gout.data()[gout.offset(n, 0, 0, 0)], out_c, cols);
          if (need_w) {
            im2col(&xv.data()[xv.offset(n, 0, 0, 0)], geom, col.data());
            dw.noalias() += go * ConstMapMat(col.data(), krows, cols).transpose();
          }
          if (need_x) {
            MapMat cm(col.data(), krows, cols);
            cm.noalias() = wm.transpose() * go;
            Tensor& gx = gr.grad_accum(xi);
            col2im_add(col.data(), geom, &gx.data()[gx.offset(n, 0, 0, 0)]);
          }
        }
        if (need_w) {
          Tensor& gw = gr.grad_accum(wi);
          for (std::size_t i = 0; i < gw.size(); ++i) gw[i] += dw.data()[i];
        }
      });
}

Var conv_transpose2d(Var input, Var weight, Var bias, int stride, int padding,
                     int output_padding) {
  Graph& g = same_graph(input, weight, "conv_transpose2d");
  if (bias.valid()) same_graph(input, bias, "conv_transpose2d");
  check_stride(stride, "conv_transpose2d");
  if (output_padding < 0 || output_padding >= stride) {
    throw std::invalid_argument(
        "conv_transpose2d: output_padding must be in [0, stride)");
  }
  const Shape xs = input.shape();
  const Shape ws = weight.shape();
  if (xs.c != ws.n) {
    throw std::invalid_argument("conv_transpose2d: input " + to_string(xs) +
                                " has " + std::to_string(xs.c) +
                                " channels but weight " + to_string(ws) +
                                " expects " + std::to_string(ws.n));
  }
  const int out_c = ws.c;
  check_bias(bias, out_c, "conv_transpose2d");
  const int oh = (xs.h - 1) * stride - 2 * padding + ws.h + output_padding;
  const int ow = (xs.w - 1) * stride - 2 * padding + ws.w + output_padding;
  if (oh <= 0 || ow <= 0) {
    throw std::invalid_argument("conv_transpose2d: empty output for input " +
                                to_string(xs) + " and weight " + to_string(ws));
  }
  // Geometry of the forward conv that maps the output space back to input.
  const ConvGeom geom{out_c, oh, ow, ws.h, ws.w, stride, padding, xs.h, xs.w};
  const int krows = out_c * ws.h * ws.w;
  const int cols = xs.h * xs.w;

  Tensor out({xs.n, out_c, oh, ow});
  std::vector<double> col(static_cast<std::size_t>(krows) * cols);
  const Tensor& xv = input.value();
  ConstMapMat wm(weight.value().data().data(), xs.c, krows);
  for (int n = 0; n < xs.n; ++n) {
    ConstMapMat xm(&xv.data()[xv.offset(n, 0, 0, 0)], xs.c, cols);
    MapMat cm(col.data(), krows, cols);
    cm.noalias() = wm.transpose() * xm;
    col2im_add(col.data(), geom, &out.data()[out.offset(n, 0, 0, 0)]);
  }
  if (bias.valid()) add_channel_bias(out, bias.value());

  const int xi = input.id(), wi = weight.id();
  const int bi = bias.valid() ? bias.id() : -1;
  const int in_c = xs.c;
  std::vector<int> parents{xi, wi};
  if (bi >= 0) parents.push_back(bi);
  return g.record(
      std::move(out), std::move(parents),
      [xi, wi, bi, geom, in_c, krows, cols](Graph& gr, int self) {
        const Tensor& gout = gr.out_grad(self);
        const Tensor& xv = gr.value(xi);
        const bool need_x = gr.needs_grad(xi);
        const bool need_w = gr.needs_grad(wi);
        if (bi >= 0 && gr.needs_grad(bi)) {
          accumulate_bias_grad(gout, gr.grad_accum(bi));
        }
        if (!need_x && !need_w) return;
        ConstMapMat wm(gr.value(wi).data().data(), in_c, krows);
        std::vector<double> col(static_cast<std::size_t>(krows) * cols);
        RowMat dw;
        if (need_w) dw = RowMat::Zero(in_c, krows);
        for (int n = 0; n < xv.shape().n; ++n) {
          im2col(&gout.data()[gout.offset(n, 0, 0, 0)], geom, col.data());
          ConstMapMat cm(col.data(), krows, cols);
          if (need_x) {
            Tensor& gx = gr.grad_accum(xi);
            MapMat gxm(&gx.data()[gx.offset(n, 0, 0, 0)], in_c, cols);
            gxm.noalias() += wm * cm;
          }
          if (need_w) {
            ConstMapMat xm(&xv.data()[xv.offset(n, 0, 0, 0)], in_c, cols);
            dw.noalias() += xm * cm.transpose();
          }
        }
        if (need_w) {
          Tensor& gw = gr.grad_accum(wi);
          for (std::size_t i = 0; i < gw.size(); ++i) gw[i] += dw.data()[i];
        }
      });
}

// ---------------------------------------------------------------------------

Var concat_channels(Var a, Var b) {
  Graph& g = same_graph(a, b, "concat_channels");
  const Shape as = a.shape();
  const Shape bs = b.shape();
  if (as.n != bs.n || as.h != bs.h || as.w != bs.w) {
    throw std::invalid_argument("concat_channels: shape mismatch " +
                                to_string(as) + " vs " + to_string(bs));
  }
  Tensor out({as.n, as.c + bs.c, as.h, as.w});
  const std::size_t alen = static_cast<std::size_t>(as.c) * as.plane();
  const std::size_t blen = static_cast<std::size_t>(bs.c) * bs.plane();
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  for (int n = 0; n < as.n; ++n) {
    double* dst = &out.data()[out.offset(n, 0, 0, 0)];
    std::copy_n(&av.data()[n * alen], alen, dst);
    std::copy_n(&bv.data()[n * blen], blen, dst + alen);
  }
  const int ai = a.id(), bi = b.id();
  return g.record(std::move(out), {ai, bi},
                  [ai, bi, alen, blen](Graph& gr, int self) {
                    const Tensor& gout = gr.out_grad(self);
                    const int batch = gout.shape().n;
                    for (int n = 0; n < batch; ++n) {
                      const double* src =
                          &gout.data()[n * (alen + blen)];
                      if (gr.needs_grad(ai)) {
                        double* ga = &gr.grad_accum(ai).data()[n * alen];
                        for (std::size_t i = 0; i < alen; ++i) ga[i] += src[i];
                      }
                      if (gr.needs_grad(bi)) {
                        double* gb = &gr.grad_accum(bi).data()[n * blen];
                        for (std::size_t i = 0; i < blen; ++i) {
                          gb[i] += src[alen + i];
                        }
                      }
                    }
                  });
}

Var slice_channels(Var x, int begin, int count) {
  Graph& g = graph_of(x, "slice_channels");
  const Shape xs = x.shape();
  if (begin < 0 || count < 0 || begin + count > xs.c) {
    throw std::invalid_argument("slice_channels: [" + std::to_string(begin) +
                                ", " + std::to_string(begin + count) +
                                ") outside " + to_string(xs));
  }
  Tensor out({xs.n, count, xs.h, xs.w});
  const std::size_t plane = xs.plane();
  const Tensor& xv = x.value();
  for (int n = 0; n < xs.n; ++n) {
    std::copy_n(&xv.data()[xv.offset(n, begin, 0, 0)], count * plane,
                &out.data()[out.offset(n, 0, 0, 0)]);
  }
  const int xi = x.id();
  return g.record(std::move(out), {xi}, [xi, begin, count](Graph& gr, int self) {
    if (!gr.needs_grad(xi)) return;
    const Tensor& gout = gr.out_grad(self);
    Tensor& gx = gr.grad_accum(xi);
    const std::size_t len = count * gout.shape().plane();
    for (int n = 0; n < gout.shape().n; ++n) {
      const double* src = &gout.data()[gout.offset(n, 0, 0, 0)];
      double* dst = &gx.data()[gx.offset(n, begin, 0, 0)];
      for (std::size_t i = 0; i < len; ++i) dst[i] += src[i];
    }
  });
}

Var upsample_nearest2x(Var x) {
  Graph& g = graph_of(x, "upsample_nearest2x");
  const Shape xs = x.shape();
  Tensor out({xs.n, xs.c, 2 * xs.h, 2 * xs.w});
  const Tensor& xv = x.value();
  for (int n = 0; n < xs.n; ++n)
    for (int c = 0; c < xs.c; ++c)
      for (int y = 0; y < 2 * xs.h; ++y)
        for (int xx = 0; xx < 2 * xs.w; ++xx)
          out.at(n, c, y, xx) = xv.at(n, c, y / 2, xx / 2);
  const int xi = x.id();
  return g.record(std::move(out), {xi}, [xi](Graph& gr, int self) {
    if (!gr.needs_grad(xi)) return;
    const Tensor& gout = gr.out_grad(self);
    Tensor& gx = gr.grad_accum(xi);
    const Shape s = gout.shape();
    for (int n = 0; n < s.n; ++n)
      for (int c = 0; c < s.c; ++c)
        for (int y = 0; y < s.h; ++y)
          for (int xx = 0; xx < s.w; ++xx)
            gx.at(n, c, y / 2, xx / 2) += gout.at(n, c, y, xx);
  });
}

Var avg_pool3x3(Var x) {
  Graph& g = graph_of(x, "avg_pool3x3");
  const Shape s = x.shape();
  // Per-pixel neighbour count depends only on position.
  std::vector<double> inv_count(s.plane());
  for (int y = 0; y < s.h; ++y) {
    for (int xx = 0; xx < s.w; ++xx) {
      const int ny = 1 + (y > 0) + (y + 1 < s.h);
      const int nx = 1 + (xx > 0) + (xx + 1 < s.w);
      inv_count[static_cast<std::size_t>(y) * s.w + xx] = 1.0 / (ny * nx);
    }
  }
  Tensor out(s);
  const Tensor& xv = x.value();
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      for (int y = 0; y < s.h; ++y) {
        for (int xx = 0; xx < s.w; ++xx) {
          double acc = 0.0;
          for (int dy = -1; dy <= 1; ++dy) {
            const int yy = y + dy;
            if (yy < 0 || yy >= s.h) continue;
            for (int dx = -1; dx <= 1; ++dx) {
              const int x2 = xx + dx;
              if (x2 < 0 || x2 >= s.w) continue;
              acc += xv.at(n, c, yy, x2);
            }
          }
          out.at(n, c, y, xx) =
              acc * inv_count[static_cast<std::size_t>(y) * s.w + xx];
        }
      }
    }
  }
  const int xi = x.id();
  return g.record(std::move(out), {xi},
                  [xi, inv_count = std::move(inv_count)](Graph& gr, int self) {
                    if (!gr.needs_grad(xi)) return;
                    const Tensor& gout = gr.out_grad(self);
                    Tensor& gx = gr.grad_accum(xi);
                    const Shape s = gout.shape();
                    for (int n = 0; n < s.n; ++n)
                      for (int c = 0; c < s.c; ++c)
                        for (int y = 0; y < s.h; ++y)
                          for (int xx = 0; xx < s.w; ++xx) {
                            const double gv =
                                gout.at(n, c, y, xx) *
                                inv_count[static_cast<std::size_t>(y) * s.w + xx];
                            for (int dy = -1; dy <= 1; ++dy) {
                              const int yy = y + dy;
                              if (yy < 0 || yy >= s.h) continue;
                              for (int dx = -1; dx <= 1; ++dx) {
                                const int x2 = xx + dx;
                                if (x2 < 0 || x2 >= s.w) continue;
                                gx.at(n, c, yy, x2) += gv;
                              }
                            }
                          }
                  });
}

Var mean_channels(Var x) {
  Graph& g = graph_of(x, "mean_channels");
  const Shape s = x.shape();
  Tensor out({s.n, 1, s.h, s.w});
  const std::size_t plane = s.plane();
  const Tensor& xv = x.value();
  const double inv = 1.0 / s.c;
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      const double* src = &xv.data()[xv.offset(n, c, 0, 0)];
      double* dst = &out.data()[out.offset(n, 0, 0, 0)];
      for (std::size_t i = 0; i < plane; ++i) dst[i] += src[i];
    }
  }
  for (auto& v : out.vec()) v *= inv;
  const int xi = x.id();
  return g.record(std::move(out), {xi}, [xi, inv](Graph& gr, int self) {
    if (!gr.needs_grad(xi)) return;
    const Tensor& gout = gr.out_grad(self);
    Tensor& gx = gr.grad_accum(xi);
    const Shape s = gx.shape();
    const std::size_t plane = s.plane();
    for (int n = 0; n < s.n; ++n) {
      const double* src = &gout.data()[gout.offset(n, 0, 0, 0)];
      for (int c = 0; c < s.c; ++c) {
        double* dst = &gx.data()[gx.offset(n, c, 0, 0)];
        for (std::size_t i = 0; i < plane; ++i) dst[i] += inv * src[i];
      }
    }
  });
}

Var sum(Var x) {
  Graph& g = graph_of(x, "sum");
  double acc = 0.0;
  for (double v : x.value().data()) acc += v;
  const int xi = x.id();
  return g.record(Tensor::scalar(acc), {xi}, [xi](Graph& gr, int self) {
    if (!gr.needs_grad(xi)) return;
    const double gv = gr.out_grad(self)[0];
    for (auto& v : gr.grad_accum(xi).vec()) v += gv;
  });
}

Var power_penalty(Var x, int p, const Tensor* mask) {
  Graph& g = graph_of(x, "power_penalty");
  if (p != 1 && p != 2) {
    throw std::invalid_argument("power_penalty: exponent must be 1 or 2, got " +
                                std::to_string(p));
  }
  const Tensor& xv = x.value();
  if (mask) require_same_shape(xv.shape(), mask->shape(), "power_penalty mask");
  Tensor m = mask ? *mask : Tensor(xv.shape(), 1.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) {
    if (m[i] == 0.0) continue;
    acc += m[i] * (p == 1 ? std::abs(xv[i]) : xv[i] * xv[i]);
  }
  const int xi = x.id();
  return g.record(Tensor::scalar(acc), {xi},
                  [xi, p, m = std::move(m)](Graph& gr, int self) {
                    if (!gr.needs_grad(xi)) return;
                    const double gv = gr.out_grad(self)[0];
                    const Tensor& xv = gr.value(xi);
                    Tensor& gx = gr.grad_accum(xi);
                    for (std::size_t i = 0; i < gx.size(); ++i) {
                      if (m[i] == 0.0) continue;
                      const double v = xv[i];
                      const double d =
                          p == 1 ? (v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0))
                                 : 2.0 * v;
                      gx[i] += gv * m[i] * d;
                    }
                  });
}

WarpResult warp_horizontal(Var image, Var shift, int sign) {
  Graph& g = same_graph(image, shift, "warp_horizontal");
  if (sign != 1 && sign != -1) {
    throw std::invalid_argument("warp_horizontal: sign must be +1 or -1");
  }
  const Shape is = image.shape();
  const Shape ss = shift.shape();
  if (ss.n != is.n || ss.c != 1 || ss.h != is.h || ss.w != is.w) {
    throw std::invalid_argument("warp_horizontal: shift " + to_string(ss) +
                                " incompatible with image " + to_string(is));
  }
  const Tensor& iv = image.value();
  const Tensor& sv = shift.value();
  Tensor in_bounds({is.n, 1, is.h, is.w});
  // Left sample column and interpolation weight per pixel. Out-of-bounds
  // pixels copy the nearest edge column, so SSIM windows straddling the
  // border see image content rather than zeros; they get no shift gradient.
  std::vector<int> left(ss.numel(), 0);
  std::vector<double> frac(ss.numel(), 0.0);
  const double max_x = is.w - 1;
  for (int n = 0; n < is.n; ++n) {
    for (int y = 0; y < is.h; ++y) {
      for (int x = 0; x < is.w; ++x) {
        const std::size_t k = sv.offset(n, 0, y, x);
        const double src = x + sign * sv[k];
        if (!(src >= 0.0 && src <= max_x)) {
          left[k] = src > max_x ? is.w - 1 : 0;
          continue;
        }
        int x0 = static_cast<int>(std::floor(src));
        double a = src - x0;
        if (x0 >= is.w - 1) {
          x0 = is.w - 1;
          a = 0.0;
        }
        left[k] = x0;
        frac[k] = a;
        in_bounds[k] = 1.0;
      }
    }
  }
  Tensor out(is);
  for (int n = 0; n < is.n; ++n) {
    for (int c = 0; c < is.c; ++c) {
      for (int y = 0; y < is.h; ++y) {
        for (int x = 0; x < is.w; ++x) {
          const std::size_t k = sv.offset(n, 0, y, x);
          const int x0 = left[k];
          const double a = frac[k];
          const double v0 = iv.at(n, c, y, x0);
          out.at(n, c, y, x) =
              a == 0.0 ? v0 : (1.0 - a) * v0 + a * iv.at(n, c, y, x0 + 1);
        }
      }
    }
  }
  const int ii = image.id(), si = shift.id();
  Var warped = g.record(
      std::move(out), {ii, si},
      [ii, si, sign, left = std::move(left), frac = std::move(frac),
       inside = in_bounds](Graph& gr, int self) {
        const Tensor& gout = gr.out_grad(self);
        const Tensor& iv = gr.value(ii);
        const Shape s = iv.shape();
        const bool need_i = gr.needs_grad(ii);
        const bool need_s = gr.needs_grad(si);
        Tensor* gi = need_i ? &gr.grad_accum(ii) : nullptr;
        Tensor* gs = need_s ? &gr.grad_accum(si) : nullptr;
        for (int n = 0; n < s.n; ++n) {
          for (int y = 0; y < s.h; ++y) {
            for (int x = 0; x < s.w; ++x) {
              const std::size_t k =
                  (static_cast<std::size_t>(n) * s.h + y) * s.w + x;
              const int x0 = left[k];
              const double a = frac[k];
              const int x1 = x0 + 1 < s.w ? x0 + 1 : x0;
              for (int c = 0; c < s.c; ++c) {
                const double go = gout.at(n, c, y, x);
                if (gi) {
                  gi->at(n, c, y, x0) += (1.0 - a) * go;
                  if (a != 0.0) gi->at(n, c, y, x1) += a * go;
                }
                if (gs && inside[k] != 0.0) {
                  (*gs)[k] += go * sign * (iv.at(n, c, y, x1) - iv.at(n, c, y, x0));
                }
              }
            }
          }
        }
      });
  return {warped, std::move(in_bounds)};
}

}  // namespace depthcomp
