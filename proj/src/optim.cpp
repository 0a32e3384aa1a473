#include "wagi/optim.hpp"

#include <algorithm>
#include <cmath>

#include "wagi/errors.hpp"

namespace wagi {

void ParameterSet::add(std::string name, Tensor value) {
  if (contains(name)) throw ArgumentError("duplicate parameter '" + name + "'");
  names_.push_back(std::move(name));
  tensors_.push_back(std::move(value));
}

bool ParameterSet::contains(std::string_view name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::size_t ParameterSet::index(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw ArgumentError("no parameter named '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - names_.begin());
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const Tensor& t : tensors_) n += t.size();
  return n;
}

BoundParameters::BoundParameters(ad::Graph& graph, const ParameterSet& set, bool trainable)
    : set_(&set), graph_(&graph) {
  vars_.reserve(set.size());
  for (const Tensor& t : set.tensors()) vars_.push_back(graph.parameter(t, trainable));
}

std::vector<Tensor> BoundParameters::grads() const {
  std::vector<Tensor> out;
  out.reserve(vars_.size());
  for (const ad::Var& v : vars_) {
    const Tensor* g = graph_->grad(v);
    out.push_back(g ? *g : Tensor(v.shape()));
  }
  return out;
}

void adam_step(std::span<Tensor> params, std::span<const Tensor> grads, AdamState& state, const AdamConfig& cfg) {
  if (params.size() != grads.size()) {
    throw ShapeError("adam_step: " + std::to_string(params.size()) + " parameters but " + std::to_string(grads.size()) +
                     " gradients");
  }
  if (state.m.empty()) {
    for (const Tensor& p : params) {
      state.m.emplace_back(p.shape());
      state.v.emplace_back(p.shape());
    }
  }
  if (state.m.size() != params.size()) throw ShapeError("adam_step: optimizer state sized for a different parameter list");
  for (std::size_t k = 0; k < params.size(); ++k) {
    require_same_shape(params[k], grads[k], "adam_step");
    require_same_shape(params[k], state.m[k], "adam_step state");
  }

  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = params[k];
    const Tensor& g = grads[k];
    Tensor& m = state.m[k];
    Tensor& v = state.v[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

}  // namespace wagi
