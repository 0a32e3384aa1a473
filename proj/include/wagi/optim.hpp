#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wagi/autodiff.hpp"
#include "wagi/tensor.hpp"

namespace wagi {

/// Ordered collection of named tensors. Order is insertion order and is the
/// order used by optimizers and checkpoints.
class ParameterSet {
 public:
  void add(std::string name, Tensor value);

  bool contains(std::string_view name) const;
  std::size_t index(std::string_view name) const;
  Tensor& operator[](std::string_view name) { return tensors_[index(name)]; }
  const Tensor& operator[](std::string_view name) const { return tensors_[index(name)]; }

  std::size_t size() const { return tensors_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  std::vector<Tensor>& tensors() { return tensors_; }
  const std::vector<Tensor>& tensors() const { return tensors_; }

  std::size_t scalar_count() const;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> tensors_;
};

/// A ParameterSet recorded as leaves of a graph.
class BoundParameters {
 public:
  BoundParameters(ad::Graph& graph, const ParameterSet& set, bool trainable);

  ad::Var operator[](std::string_view name) const { return vars_[set_->index(name)]; }
  const std::vector<ad::Var>& vars() const { return vars_; }

  /// Gradients after graph.backward(); zeros for leaves that received none.
  std::vector<Tensor> grads() const;

 private:
  const ParameterSet* set_;
  ad::Graph* graph_;
  std::vector<ad::Var> vars_;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::int64_t step = 0;
};

/// One bias-corrected Adam update of every tensor in `params`. The state is
/// lazily sized on the first call.
void adam_step(std::span<Tensor> params, std::span<const Tensor> grads, AdamState& state, const AdamConfig& cfg);

}  // namespace wagi
