#include "wagi/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "wagi/errors.hpp"

namespace wagi::ad {

std::string_view to_string(OpKind k) {
  switch (k) {
    case OpKind::constant: return "constant";
    case OpKind::parameter: return "parameter";
    case OpKind::add: return "add";
    case OpKind::sub: return "sub";
    case OpKind::scalar_mul: return "scalar_mul";
    case OpKind::hadamard: return "hadamard";
    case OpKind::conv2d: return "conv2d";
    case OpKind::modulate_weight: return "modulate_weight";
    case OpKind::leaky_relu: return "leaky_relu";
    case OpKind::sigmoid: return "sigmoid";
    case OpKind::nearest_upsample: return "nearest_upsample";
    case OpKind::upsample_smooth: return "upsample_smooth";
    case OpKind::avg_pool2: return "avg_pool2";
    case OpKind::haar_analysis: return "haar_analysis";
    case OpKind::haar_synthesis: return "haar_synthesis";
    case OpKind::slice_channels: return "slice_channels";
    case OpKind::concat_channels: return "concat_channels";
    case OpKind::linear: return "linear";
    case OpKind::sum: return "sum";
    case OpKind::mean_square: return "mean_square";
    case OpKind::mean_abs: return "mean_abs";
    case OpKind::spectral_loss: return "spectral_loss";
  }
  return "?";
}

const Tensor& Var::value() const {
  if (graph_ == nullptr) throw ArgumentError("value() on an unbound Var");
  return graph_->value(*this);
}

// ---------------------------------------------------------------------------
// Graph

Var Graph::constant(Tensor value) { return record(OpKind::constant, {}, std::move(value), nullptr); }

Var Graph::parameter(Tensor value, bool trainable) {
  Var v = record(OpKind::parameter, {}, std::move(value), nullptr);
  nodes_.back().requires_grad = trainable;
  return v;
}

const Graph::Node& Graph::node(Var v) const {
  if (v.graph_ != this || v.id_ < 0 || static_cast<std::size_t>(v.id_) >= nodes_.size()) {
    throw ArgumentError("Var does not belong to this graph");
  }
  return nodes_[static_cast<std::size_t>(v.id_)];
}

Var Graph::record(OpKind kind, std::vector<int> inputs, Tensor value, BackwardFn backward) {
  Node n;
  n.kind = kind;
  n.requires_grad = std::any_of(inputs.begin(), inputs.end(), [&](int i) { return needs_grad(i); });
  n.inputs = std::move(inputs);
  n.value = std::move(value);
  n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Tensor& Graph::accumulator(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (!n.grad) n.grad.emplace(n.value.shape());
  return *n.grad;
}

const Tensor* Graph::grad(Var v) const {
  const Node& n = node(v);
  return n.grad ? &*n.grad : nullptr;
}

void Graph::backward(Var root) {
  const Node& r = node(root);
  if (r.value.size() != 1) throw ShapeError("backward: root must be scalar, got " + r.value.shape().str());
  for (Node& n : nodes_) n.grad.reset();
  if (!r.requires_grad) return;
  accumulator(root.id_).fill(1.0);
  for (int id = root.id_; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.grad || !n.requires_grad || !n.backward) continue;
    n.backward(*this, id);
  }
}

// ---------------------------------------------------------------------------
// helpers

namespace {

Graph& graph_of(std::initializer_list<Var> vars) {
  Graph* g = nullptr;
  for (const Var& v : vars) {
    if (!v.valid()) continue;
    if (g != nullptr && v.graph() != g) throw ArgumentError("operands belong to different graphs");
    g = v.graph();
  }
  if (g == nullptr) throw ArgumentError("op recorded without a graph");
  return *g;
}

void require_same(const Var& a, const Var& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape().str() + " vs " + b.shape().str());
  }
}

// dst[y][x] += a * src[y + dy][x + dx] over the overlap of two h×w planes.
void shift_axpy(double* dst, const double* src, int h, int w, int dy, int dx, double a) {
  const int y0 = std::max(0, -dy);
  const int y1 = std::min(h, h - dy);
  const int x0 = std::max(0, -dx);
  const int x1 = std::min(w, w - dx);
  for (int y = y0; y < y1; ++y) {
    double* d = dst + static_cast<std::ptrdiff_t>(y) * w;
    const double* s = src + static_cast<std::ptrdiff_t>(y + dy) * w + dx;
    for (int x = x0; x < x1; ++x) d[x] += a * s[x];
  }
}

// Σ a[y][x] · b[y + dy][x + dx] over the overlap.
double shift_dot(const double* a, const double* b, int h, int w, int dy, int dx) {
  const int y0 = std::max(0, -dy);
  const int y1 = std::min(h, h - dy);
  const int x0 = std::max(0, -dx);
  const int x1 = std::min(w, w - dx);
  double acc = 0.0;
  for (int y = y0; y < y1; ++y) {
    const double* pa = a + static_cast<std::ptrdiff_t>(y) * w;
    const double* pb = b + static_cast<std::ptrdiff_t>(y + dy) * w + dx;
    for (int x = x0; x < x1; ++x) acc += pa[x] * pb[x];
  }
  return acc;
}

int kernel_side(const Shape& weight) {
  if (weight.w == 1) return 1;
  if (weight.w == 9) return 3;
  throw ShapeError("conv weight must be O x I x 1 or O x I x 9, got " + weight.str());
}

// Border-normalised [1,2,1]/4 blur along one axis of a plane, in place into dst.
// stride/count describe the axis; lines/line_stride walk the other axis.
void blur_axis(const double* src, double* dst, int count, int stride, int lines, int line_stride, bool adjoint) {
  for (int l = 0; l < lines; ++l) {
    const double* s = src + static_cast<std::ptrdiff_t>(l) * line_stride;
    double* d = dst + static_cast<std::ptrdiff_t>(l) * line_stride;
    for (int i = 0; i < count; ++i) d[static_cast<std::ptrdiff_t>(i) * stride] = 0.0;
    for (int p = 0; p < count; ++p) {
      const double norm = (p == 0 || p == count - 1) ? (count == 1 ? 2.0 : 3.0) : 4.0;
      for (int q = std::max(0, p - 1); q <= std::min(count - 1, p + 1); ++q) {
        const double k = (q == p ? 2.0 : 1.0) / norm;
        if (adjoint) {
          d[static_cast<std::ptrdiff_t>(q) * stride] += k * s[static_cast<std::ptrdiff_t>(p) * stride];
        } else {
          d[static_cast<std::ptrdiff_t>(p) * stride] += k * s[static_cast<std::ptrdiff_t>(q) * stride];
        }
      }
    }
  }
}

Tensor blur2d(const Tensor& in, bool adjoint) {
  Tensor tmp(in.shape());
  Tensor out(in.shape());
  const int h = in.height();
  const int w = in.width();
  for (int c = 0; c < in.channels(); ++c) {
    const double* src = in.channel(c).data();
    double* mid = tmp.channel(c).data();
    double* dst = out.channel(c).data();
    blur_axis(src, mid, w, 1, h, w, adjoint);
    blur_axis(mid, dst, h, w, w, 1, adjoint);
  }
  return out;
}

Tensor nearest_up(const Tensor& x) {
  Tensor out(x.channels(), 2 * x.height(), 2 * x.width());
  for (int c = 0; c < x.channels(); ++c) {
    for (int y = 0; y < out.height(); ++y) {
      for (int xx = 0; xx < out.width(); ++xx) out(c, y, xx) = x(c, y / 2, xx / 2);
    }
  }
  return out;
}

Tensor sum_2x2(const Tensor& g) {
  Tensor out(g.channels(), g.height() / 2, g.width() / 2);
  for (int c = 0; c < out.channels(); ++c) {
    for (int y = 0; y < out.height(); ++y) {
      for (int x = 0; x < out.width(); ++x) {
        out(c, y, x) = g(c, 2 * y, 2 * x) + g(c, 2 * y, 2 * x + 1) + g(c, 2 * y + 1, 2 * x) + g(c, 2 * y + 1, 2 * x + 1);
      }
    }
  }
  return out;
}

Var scalar_result(Graph& g, OpKind kind, int input, double value, Graph::BackwardFn fn) {
  return g.record(kind, {input}, Tensor::scalar(value), std::move(fn));
}

}  // namespace

// ---------------------------------------------------------------------------
// elementwise

Var add(Var a, Var b) {
  Graph& g = graph_of({a, b});
  require_same(a, b, "add");
  return g.record(OpKind::add, {a.id(), b.id()}, a.value() + b.value(), [ia = a.id(), ib = b.id()](Graph& g, int self) {
    if (g.needs_grad(ia)) g.accumulator(ia) += g.upstream(self);
    if (g.needs_grad(ib)) g.accumulator(ib) += g.upstream(self);
  });
}

Var sub(Var a, Var b) {
  Graph& g = graph_of({a, b});
  require_same(a, b, "sub");
  return g.record(OpKind::sub, {a.id(), b.id()}, a.value() - b.value(), [ia = a.id(), ib = b.id()](Graph& g, int self) {
    if (g.needs_grad(ia)) g.accumulator(ia) += g.upstream(self);
    if (g.needs_grad(ib)) g.accumulator(ib) -= g.upstream(self);
  });
}

Var scalar_mul(Var a, double s) {
  Graph& g = graph_of({a});
  return g.record(OpKind::scalar_mul, {a.id()}, a.value() * s, [ia = a.id(), s](Graph& g, int self) {
    g.accumulator(ia) += g.upstream(self) * s;
  });
}

Var hadamard(Var a, Var b) {
  Graph& g = graph_of({a, b});
  require_same(a, b, "hadamard");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return g.record(OpKind::hadamard, {a.id(), b.id()}, std::move(out), [ia = a.id(), ib = b.id()](Graph& g, int self) {
    const Tensor& up = g.upstream(self);
    if (g.needs_grad(ia)) {
      Tensor& ga = g.accumulator(ia);
      const Tensor& bv = g.value(ib);
      for (std::size_t i = 0; i < up.size(); ++i) ga[i] += up[i] * bv[i];
    }
    if (g.needs_grad(ib)) {
      Tensor& gb = g.accumulator(ib);
      const Tensor& av = g.value(ia);
      for (std::size_t i = 0; i < up.size(); ++i) gb[i] += up[i] * av[i];
    }
  });
}

Var leaky_relu(Var x, double slope) {
  Graph& g = graph_of({x});
  Tensor out = x.value();
  for (double& v : out.values()) v = v > 0.0 ? v : slope * v;
  return g.record(OpKind::leaky_relu, {x.id()}, std::move(out), [ix = x.id(), slope](Graph& g, int self) {
    const Tensor& up = g.upstream(self);
    const Tensor& xv = g.value(ix);
    Tensor& gx = g.accumulator(ix);
    for (std::size_t i = 0; i < up.size(); ++i) gx[i] += xv[i] > 0.0 ? up[i] : slope * up[i];
  });
}

Var sigmoid(Var x) {
  Graph& g = graph_of({x});
  Tensor out = x.value();
  for (double& v : out.values()) v = 1.0 / (1.0 + std::exp(-v));
  return g.record(OpKind::sigmoid, {x.id()}, std::move(out), [ix = x.id()](Graph& g, int self) {
    const Tensor& up = g.upstream(self);
    const Tensor& y = g.value(self);
    Tensor& gx = g.accumulator(ix);
    for (std::size_t i = 0; i < up.size(); ++i) gx[i] += up[i] * y[i] * (1.0 - y[i]);
  });
}

// ---------------------------------------------------------------------------
// convolution

Var conv2d(Var x, Var weight, Var bias) {
  Graph& g = graph_of({x, weight, bias});
  const Shape xs = x.shape();
  const Shape ws = weight.shape();
  const int k = kernel_side(ws);
  if (ws.h != xs.c) {
    throw ShapeError("conv2d: weight expects " + std::to_string(ws.h) + " input channels, input has " +
                     std::to_string(xs.c));
  }
  if (bias.valid() && bias.shape() != Shape{ws.c, 1, 1}) {
    throw ShapeError("conv2d: bias must be " + Shape{ws.c, 1, 1}.str() + ", got " + bias.shape().str());
  }
  const int outc = ws.c;
  const int inc = ws.h;
  const int h = xs.h;
  const int w = xs.w;
  const int r = k / 2;
  const Tensor& xv = x.value();
  const Tensor& wv = weight.value();
  Tensor out(outc, h, w);
  for (int o = 0; o < outc; ++o) {
    double* dst = out.channel(o).data();
    if (bias.valid()) std::fill_n(dst, out.channel(o).size(), bias.value()[static_cast<std::size_t>(o)]);
    for (int i = 0; i < inc; ++i) {
      const double* src = xv.channel(i).data();
      for (int t = 0; t < k * k; ++t) {
        const double a = wv(o, i, t);
        if (a != 0.0) shift_axpy(dst, src, h, w, t / k - r, t % k - r, a);
      }
    }
  }
  std::vector<int> inputs{x.id(), weight.id()};
  if (bias.valid()) inputs.push_back(bias.id());
  return g.record(OpKind::conv2d, std::move(inputs), std::move(out),
                  [ix = x.id(), iw = weight.id(), ib = bias.valid() ? bias.id() : -1, k, r, outc, inc, h, w](Graph& g,
                                                                                                            int self) {
                    const Tensor& up = g.upstream(self);
                    const Tensor& xv = g.value(ix);
                    const Tensor& wv = g.value(iw);
                    if (g.needs_grad(ix)) {
                      Tensor& gx = g.accumulator(ix);
                      for (int o = 0; o < outc; ++o) {
                        const double* src = up.channel(o).data();
                        for (int i = 0; i < inc; ++i) {
                          double* dst = gx.channel(i).data();
                          for (int t = 0; t < k * k; ++t) {
                            const double a = wv(o, i, t);
                            if (a != 0.0) shift_axpy(dst, src, h, w, -(t / k - r), -(t % k - r), a);
                          }
                        }
                      }
                    }
                    if (g.needs_grad(iw)) {
                      Tensor& gw = g.accumulator(iw);
                      for (int o = 0; o < outc; ++o) {
                        const double* go = up.channel(o).data();
                        for (int i = 0; i < inc; ++i) {
                          const double* src = xv.channel(i).data();
                          for (int t = 0; t < k * k; ++t) gw(o, i, t) += shift_dot(go, src, h, w, t / k - r, t % k - r);
                        }
                      }
                    }
                    if (ib >= 0 && g.needs_grad(ib)) {
                      Tensor& gb = g.accumulator(ib);
                      for (int o = 0; o < outc; ++o) {
                        double s = 0.0;
                        for (double v : up.channel(o)) s += v;
                        gb[static_cast<std::size_t>(o)] += s;
                      }
                    }
                  });
}

Var modulate_weight(Var weight, Var style, bool demodulate) {
  Graph& g = graph_of({weight, style});
  const Shape ws = weight.shape();
  if (style.shape() != Shape{ws.h, 1, 1}) {
    throw ShapeError("modulate_weight: style must be " + Shape{ws.h, 1, 1}.str() + ", got " + style.shape().str());
  }
  const Tensor& wv = weight.value();
  const Tensor& sv = style.value();
  Tensor out(ws);
  for (int o = 0; o < ws.c; ++o) {
    for (int i = 0; i < ws.h; ++i) {
      for (int t = 0; t < ws.w; ++t) out(o, i, t) = wv(o, i, t) * sv[static_cast<std::size_t>(i)];
    }
  }
  std::vector<double> demod(static_cast<std::size_t>(ws.c), 1.0);
  if (demodulate) {
    for (int o = 0; o < ws.c; ++o) {
      double ss = 0.0;
      for (double v : out.channel(o)) ss += v * v;
      demod[static_cast<std::size_t>(o)] = 1.0 / std::sqrt(ss + kDemodEpsilon);
      for (double& v : out.channel(o)) v *= demod[static_cast<std::size_t>(o)];
    }
  }
  return g.record(
      OpKind::modulate_weight, {weight.id(), style.id()}, std::move(out),
      [iw = weight.id(), is = style.id(), demodulate, demod = std::move(demod), ws](Graph& g, int self) {
        const Tensor& up = g.upstream(self);
        const Tensor& wv = g.value(iw);
        const Tensor& sv = g.value(is);
        // Gradient with respect to the modulated (pre-demodulation) weight W' = W s.
        Tensor gmod(ws);
        for (int o = 0; o < ws.c; ++o) {
          const double d = demod[static_cast<std::size_t>(o)];
          if (!demodulate) {
            for (std::size_t j = 0; j < ws.plane(); ++j) gmod.channel(o)[j] = up.channel(o)[j];
            continue;
          }
          double dot = 0.0;
          for (int i = 0; i < ws.h; ++i) {
            for (int t = 0; t < ws.w; ++t) dot += up(o, i, t) * wv(o, i, t) * sv[static_cast<std::size_t>(i)];
          }
          for (int i = 0; i < ws.h; ++i) {
            for (int t = 0; t < ws.w; ++t) {
              const double wm = wv(o, i, t) * sv[static_cast<std::size_t>(i)];
              gmod(o, i, t) = d * up(o, i, t) - d * d * d * wm * dot;
            }
          }
        }
        if (g.needs_grad(iw)) {
          Tensor& gw = g.accumulator(iw);
          for (int o = 0; o < ws.c; ++o) {
            for (int i = 0; i < ws.h; ++i) {
              for (int t = 0; t < ws.w; ++t) gw(o, i, t) += gmod(o, i, t) * sv[static_cast<std::size_t>(i)];
            }
          }
        }
        if (g.needs_grad(is)) {
          Tensor& gs = g.accumulator(is);
          for (int o = 0; o < ws.c; ++o) {
            for (int i = 0; i < ws.h; ++i) {
              double s = 0.0;
              for (int t = 0; t < ws.w; ++t) s += gmod(o, i, t) * wv(o, i, t);
              gs[static_cast<std::size_t>(i)] += s;
            }
          }
        }
      });
}

Var modulated_conv2d(Var x, Var weight, Var style, Var bias, bool demodulate) {
  return conv2d(x, modulate_weight(weight, style, demodulate), bias);
}

// ---------------------------------------------------------------------------
// resampling

Var nearest_upsample(Var x) {
  Graph& g = graph_of({x});
  return g.record(OpKind::nearest_upsample, {x.id()}, nearest_up(x.value()), [ix = x.id()](Graph& g, int self) {
    g.accumulator(ix) += sum_2x2(g.upstream(self));
  });
}

Var upsample_smooth(Var x) {
  Graph& g = graph_of({x});
  return g.record(OpKind::upsample_smooth, {x.id()}, blur2d(nearest_up(x.value()), false),
                  [ix = x.id()](Graph& g, int self) { g.accumulator(ix) += sum_2x2(blur2d(g.upstream(self), true)); });
}

Var avg_pool2(Var x) {
  Graph& g = graph_of({x});
  require_divisible(x.shape(), 1, "avg_pool2");
  Tensor out = sum_2x2(x.value()) * 0.25;
  return g.record(OpKind::avg_pool2, {x.id()}, std::move(out), [ix = x.id()](Graph& g, int self) {
    g.accumulator(ix) += nearest_up(g.upstream(self)) * 0.25;
  });
}

// ---------------------------------------------------------------------------
// wavelets

Var haar_analysis(Var x, ScaleMode mode) {
  Graph& g = graph_of({x});
  const FilterBank bank = FilterBank::for_mode(mode);
  BandQuad q = haar_forward(x.value(), bank);
  const std::array<Tensor, 4> parts{std::move(q.ll), std::move(q.lh), std::move(q.hl), std::move(q.hh)};
  const int c = x.shape().c;
  return g.record(OpKind::haar_analysis, {x.id()}, Tensor::concat_channels(parts), [ix = x.id(), bank, c](Graph& g, int self) {
    const Tensor& up = g.upstream(self);
    // Analysis is s·H per window; its adjoint s·H^T is synthesis with a bank of scale 1/(4 s).
    BandQuad gq{up.slice_channels(0, c), up.slice_channels(c, c), up.slice_channels(2 * c, c), up.slice_channels(3 * c, c)};
    g.accumulator(ix) += haar_inverse(gq, FilterBank(1.0 / (4.0 * bank.scale())));
  });
}

Var haar_synthesis(Var ll, Var lh, Var hl, Var hh, ScaleMode mode) {
  Graph& g = graph_of({ll, lh, hl, hh});
  const FilterBank bank = FilterBank::for_mode(mode);
  Tensor out = haar_inverse(BandQuad{ll.value(), lh.value(), hl.value(), hh.value()}, bank);
  return g.record(OpKind::haar_synthesis, {ll.id(), lh.id(), hl.id(), hh.id()}, std::move(out),
                  [ids = std::array<int, 4>{ll.id(), lh.id(), hl.id(), hh.id()}, bank](Graph& g, int self) {
                    // Synthesis is H^T / (4 s); its adjoint H / (4 s) is analysis with scale 1/(4 s).
                    BandQuad gq = haar_forward(g.upstream(self), FilterBank(1.0 / (4.0 * bank.scale())));
                    for (Band b : kAllBands) {
                      const int id = ids[static_cast<std::size_t>(b)];
                      if (g.needs_grad(id)) g.accumulator(id) += gq.band(b);
                    }
                  });
}

// ---------------------------------------------------------------------------
// structural

Var slice_channels(Var x, int begin, int count) {
  Graph& g = graph_of({x});
  return g.record(OpKind::slice_channels, {x.id()}, x.value().slice_channels(begin, count),
                  [ix = x.id(), begin](Graph& g, int self) {
                    const Tensor& up = g.upstream(self);
                    Tensor& gx = g.accumulator(ix);
                    const std::size_t offset = static_cast<std::size_t>(begin) * gx.shape().plane();
                    for (std::size_t i = 0; i < up.size(); ++i) gx[offset + i] += up[i];
                  });
}

Var concat_channels(std::span<const Var> parts) {
  if (parts.empty()) throw ArgumentError("concat_channels: no inputs");
  Graph& g = graph_of({parts[0]});
  std::vector<Tensor> values;
  std::vector<int> ids;
  for (const Var& p : parts) {
    if (p.graph() != &g) throw ArgumentError("concat_channels: operands belong to different graphs");
    values.push_back(p.value());
    ids.push_back(p.id());
  }
  Tensor out = Tensor::concat_channels(values);
  return g.record(OpKind::concat_channels, ids, std::move(out), [ids](Graph& g, int self) {
    const Tensor& up = g.upstream(self);
    std::size_t offset = 0;
    for (int id : ids) {
      const std::size_t n = g.value(id).size();
      if (g.needs_grad(id)) {
        Tensor& gp = g.accumulator(id);
        for (std::size_t i = 0; i < n; ++i) gp[i] += up[offset + i];
      }
      offset += n;
    }
  });
}

Var linear(Var weight, Var x, Var bias) {
  Graph& g = graph_of({weight, x, bias});
  const Shape ws = weight.shape();
  if (ws.c != 1 || x.shape() != Shape{ws.w, 1, 1}) {
    throw ShapeError("linear: weight " + ws.str() + " incompatible with input " + x.shape().str());
  }
  if (bias.valid() && bias.shape() != Shape{ws.h, 1, 1}) throw ShapeError("linear: bias shape " + bias.shape().str());
  const Tensor& wv = weight.value();
  const Tensor& xv = x.value();
  Tensor out(ws.h, 1, 1);
  for (int o = 0; o < ws.h; ++o) {
    double acc = bias.valid() ? bias.value()[static_cast<std::size_t>(o)] : 0.0;
    for (int i = 0; i < ws.w; ++i) acc += wv(0, o, i) * xv[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(o)] = acc;
  }
  std::vector<int> inputs{weight.id(), x.id()};
  if (bias.valid()) inputs.push_back(bias.id());
  return g.record(OpKind::linear, std::move(inputs), std::move(out),
                  [iw = weight.id(), ix = x.id(), ib = bias.valid() ? bias.id() : -1, ws](Graph& g, int self) {
                    const Tensor& up = g.upstream(self);
                    const Tensor& wv = g.value(iw);
                    const Tensor& xv = g.value(ix);
                    if (g.needs_grad(iw)) {
                      Tensor& gw = g.accumulator(iw);
                      for (int o = 0; o < ws.h; ++o) {
                        for (int i = 0; i < ws.w; ++i) gw(0, o, i) += up[static_cast<std::size_t>(o)] * xv[static_cast<std::size_t>(i)];
                      }
                    }
                    if (g.needs_grad(ix)) {
                      Tensor& gx = g.accumulator(ix);
                      for (int o = 0; o < ws.h; ++o) {
                        for (int i = 0; i < ws.w; ++i) gx[static_cast<std::size_t>(i)] += up[static_cast<std::size_t>(o)] * wv(0, o, i);
                      }
                    }
                    if (ib >= 0 && g.needs_grad(ib)) g.accumulator(ib) += up;
                  });
}

// ---------------------------------------------------------------------------
// reductions

Var sum(Var x) {
  Graph& g = graph_of({x});
  return scalar_result(g, OpKind::sum, x.id(), x.value().sum(), [ix = x.id()](Graph& g, int self) {
    const double up = g.upstream(self).item();
    for (double& v : g.accumulator(ix).values()) v += up;
  });
}

Var mean_square(Var x) {
  Graph& g = graph_of({x});
  const Tensor& xv = x.value();
  double acc = 0.0;
  for (double v : xv.values()) acc += v * v;
  const double n = static_cast<double>(xv.size());
  return scalar_result(g, OpKind::mean_square, x.id(), acc / n, [ix = x.id(), n](Graph& g, int self) {
    const double up = g.upstream(self).item();
    const Tensor& xv = g.value(ix);
    Tensor& gx = g.accumulator(ix);
    for (std::size_t i = 0; i < xv.size(); ++i) gx[i] += up * 2.0 * xv[i] / n;
  });
}

Var mean_abs(Var x) {
  Graph& g = graph_of({x});
  const Tensor& xv = x.value();
  double acc = 0.0;
  for (double v : xv.values()) acc += std::abs(v);
  const double n = static_cast<double>(xv.size());
  return scalar_result(g, OpKind::mean_abs, x.id(), acc / n, [ix = x.id(), n](Graph& g, int self) {
    const double up = g.upstream(self).item();
    const Tensor& xv = g.value(ix);
    Tensor& gx = g.accumulator(ix);
    for (std::size_t i = 0; i < xv.size(); ++i) {
      const double s = xv[i] > 0.0 ? 1.0 : (xv[i] < 0.0 ? -1.0 : 0.0);
      gx[i] += up * s / n;
    }
  });
}

Var spectral_loss(Var x, const ReducedSpectrum& target) {
  Graph& g = graph_of({x});
  const Tensor& xv = x.value();
  if (xv.height() != xv.width() || !is_power_of_two(xv.height())) {
    throw DimensionError("spectral_loss: image " + xv.shape().str() + " is not square power-of-two");
  }
  const int side = xv.height();
  auto binning = std::make_shared<const SpectrumBinning>(side);
  if (target.bins.size() != static_cast<std::size_t>(binning->bin_count())) {
    throw ShapeError("spectral_loss: target spectrum has " + std::to_string(target.bins.size()) + " bins, expected " +
                     std::to_string(binning->bin_count()));
  }
  const int channels = xv.channels();
  auto spectra = std::make_shared<std::vector<std::vector<Complex>>>();
  Tensor power(1, side, side);
  for (int c = 0; c < channels; ++c) {
    spectra->push_back(dft2d_real(xv.channel(c), side, side));
    const std::vector<Complex>& f = spectra->back();
    for (int u = 0; u < side; ++u) {
      for (int v = 0; v < side; ++v) {
        power(0, (u + side / 2) % side, (v + side / 2) % side) += std::norm(f[static_cast<std::size_t>(u) * side + v]);
      }
    }
  }
  power *= 1.0 / channels;
  const std::vector<double> bins = binning->reduce(power);
  const std::size_t nb = bins.size();
  std::vector<double> diffs(nb);
  double loss = 0.0;
  for (std::size_t k = 0; k < nb; ++k) {
    diffs[k] = std::log(bins[k] + kSpectralLogFloor) - std::log(target.bins[k] + kSpectralLogFloor);
    loss += diffs[k] * diffs[k];
  }
  loss /= static_cast<double>(nb);

  return scalar_result(
      g, OpKind::spectral_loss, x.id(), loss,
      [ix = x.id(), binning, spectra, bins, diffs, side, channels](Graph& g, int self) {
        const double up = g.upstream(self).item();
        const std::size_t nb = bins.size();
        std::vector<double> gbins(nb);
        for (std::size_t k = 0; k < nb; ++k) {
          gbins[k] = up * 2.0 * diffs[k] / (static_cast<double>(nb) * (bins[k] + kSpectralLogFloor));
        }
        const Tensor gcentred = binning->reduce_adjoint(gbins);
        Tensor& gx = g.accumulator(ix);
        std::vector<Complex> buf(static_cast<std::size_t>(side) * side);
        for (int c = 0; c < channels; ++c) {
          const std::vector<Complex>& f = (*spectra)[static_cast<std::size_t>(c)];
          for (int u = 0; u < side; ++u) {
            for (int v = 0; v < side; ++v) {
              const double gp = gcentred(0, (u + side / 2) % side, (v + side / 2) % side) / channels;
              buf[static_cast<std::size_t>(u) * side + v] = gp * f[static_cast<std::size_t>(u) * side + v];
            }
          }
          // d|X_k|²/dx_n summed against G_k is 2 Re(Σ_k G_k X_k e^{+2πi kn/N}).
          fft2d(buf, side, side, true);
          std::span<double> dst = gx.channel(c);
          for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += 2.0 * buf[i].real();
        }
      });
}

// ---------------------------------------------------------------------------
// composites

Var mse(Var a, Var b) { return mean_square(sub(a, b)); }
Var l1(Var a, Var b) { return mean_abs(sub(a, b)); }

std::array<Var, 4> split_bands(Var quad) {
  const int c = quad.shape().c / 4;
  return {slice_channels(quad, 0, c), slice_channels(quad, c, c), slice_channels(quad, 2 * c, c),
          slice_channels(quad, 3 * c, c)};
}

Var subband_loss(Var a, Var b, Band filter, int level, int p, ScaleMode mode) {
  if (p != 1 && p != 2) throw ArgumentError("subband_loss: p must be 1 or 2");
  require_same(a, b, "subband_loss");
  require_divisible(a.shape(), level + 1, "subband_loss");
  Var la = a;
  Var lb = b;
  for (int i = 0; i < level; ++i) {
    la = split_bands(haar_analysis(la, mode))[0];
    lb = split_bands(haar_analysis(lb, mode))[0];
  }
  const auto idx = static_cast<std::size_t>(filter);
  Var ba = split_bands(haar_analysis(la, mode))[idx];
  Var bb = split_bands(haar_analysis(lb, mode))[idx];
  return p == 1 ? l1(ba, bb) : mse(ba, bb);
}

Var wavelet_loss_k(Var a, Var b, int K, ScaleMode mode) {
  require_same(a, b, "wavelet_loss_k");
  if (K < 0) throw ArgumentError("wavelet_loss_k: K must be >= 0");
  require_divisible(a.shape(), K + 1, "wavelet_loss_k");
  // The transform is linear, so bands of a - b equal the band differences.
  Var diff = sub(a, b);
  Var total;
  for (int i = 0; i <= K; ++i) {
    const std::array<Var, 4> q = split_bands(haar_analysis(diff, mode));
    for (int f = 1; f < 4; ++f) {
      Var term = mean_square(q[static_cast<std::size_t>(f)]);
      total = total.valid() ? add(total, term) : term;
    }
    diff = q[0];
  }
  return total;
}

}  // namespace wagi::ad
