#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wagi/spectrum.hpp"
#include "wagi/tensor.hpp"
#include "wagi/wavelet.hpp"

namespace wagi::ad {

enum class OpKind {
  constant,
  parameter,
  add,
  sub,
  scalar_mul,
  hadamard,
  conv2d,
  modulate_weight,
  leaky_relu,
  sigmoid,
  nearest_upsample,
  upsample_smooth,
  avg_pool2,
  haar_analysis,
  haar_synthesis,
  slice_channels,
  concat_channels,
  linear,
  sum,
  mean_square,
  mean_abs,
  spectral_loss,
};

std::string_view to_string(OpKind k);

class Graph;

/// Handle to a node of a Graph. Cheap to copy; valid while the graph lives.
class Var {
 public:
  Var() = default;

  bool valid() const { return graph_ != nullptr; }
  Graph* graph() const { return graph_; }
  int id() const { return id_; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }

 private:
  friend class Graph;
  Var(Graph* g, int id) : graph_(g), id_(id) {}
  Graph* graph_ = nullptr;
  int id_ = -1;
};

/// Append-only tape. Values are computed eagerly when an op is recorded;
/// insertion order is a topological order. Single owner: not thread-safe.
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, int self)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  Var parameter(Tensor value, bool trainable = true);

  /// Reverse sweep from a 1×1×1 root. Clears gradients of any earlier sweep.
  /// Afterwards every trainable ancestor of the root holds a gradient and no
  /// other leaf does.
  void backward(Var root);

  const Tensor& value(Var v) const { return node(v).value; }
  /// Gradient of the last backward() root with respect to v, if any.
  const Tensor* grad(Var v) const;
  OpKind kind(Var v) const { return node(v).kind; }
  std::size_t size() const { return nodes_.size(); }

  // Op-implementation interface.
  Var record(OpKind kind, std::vector<int> inputs, Tensor value, BackwardFn backward);
  bool needs_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
  const Tensor& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  const Tensor& upstream(int id) const { return *nodes_[static_cast<std::size_t>(id)].grad; }
  /// Gradient accumulator of node `id`, zero-initialised on first access.
  Tensor& accumulator(int id);

 private:
  struct Node {
    OpKind kind = OpKind::constant;
    std::vector<int> inputs;
    Tensor value;
    std::optional<Tensor> grad;
    bool requires_grad = false;
    BackwardFn backward;
  };
  const Node& node(Var v) const;

  std::vector<Node> nodes_;
};

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var scalar_mul(Var a, double s);
Var hadamard(Var a, Var b);

/// Stride-1 zero-padded convolution. `weight` is O × I × k² (k = 1 or 3),
/// `bias` (optional) is O × 1 × 1.
Var conv2d(Var x, Var weight, Var bias = {});

inline constexpr double kDemodEpsilon = 1e-8;

/// Style-modulated weight: W[o,i,t] · s[i], optionally rescaled per output
/// channel by 1 / sqrt(Σ_{i,t} (W s)² + 1e-8). `style` is I × 1 × 1.
Var modulate_weight(Var weight, Var style, bool demodulate);

/// conv2d with a modulated (and optionally demodulated) weight.
Var modulated_conv2d(Var x, Var weight, Var style, Var bias = {}, bool demodulate = true);

Var leaky_relu(Var x, double slope = 0.2);
Var sigmoid(Var x);
Var nearest_upsample(Var x);
/// Nearest ×2 followed by a border-normalised [1,2,1]⊗[1,2,1] blur.
Var upsample_smooth(Var x);
Var avg_pool2(Var x);

/// Haar analysis into 4C channels ordered [LL | LH | HL | HH].
Var haar_analysis(Var x, ScaleMode mode);
Var haar_synthesis(Var ll, Var lh, Var hl, Var hh, ScaleMode mode);

Var slice_channels(Var x, int begin, int count);
Var concat_channels(std::span<const Var> parts);

/// y = W x + b with W stored as 1 × O × I, x as I × 1 × 1.
Var linear(Var weight, Var x, Var bias = {});

Var sum(Var x);
Var mean_square(Var x);
Var mean_abs(Var x);

/// Mean squared log-spectrum difference to a fixed target spectrum.
Var spectral_loss(Var x, const ReducedSpectrum& target);

// Composites built from the primitives above.
Var mse(Var a, Var b);
Var l1(Var a, Var b);
Var subband_loss(Var a, Var b, Band filter, int level, int p, ScaleMode mode = ScaleMode::orthonormal);
Var wavelet_loss_k(Var a, Var b, int K, ScaleMode mode = ScaleMode::orthonormal);
/// Splits a haar_analysis result into its four bands.
std::array<Var, 4> split_bands(Var quad);

}  // namespace wagi::ad
