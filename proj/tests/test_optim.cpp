#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "wagi/errors.hpp"
#include "wagi/optim.hpp"

using namespace wagi;

TEST_CASE("adam matches a hand-stepped reference") {
  const AdamConfig cfg{0.01, 0.9, 0.999, 1e-8};
  std::vector<Tensor> params{oracle::random_tensor(Shape{1, 2, 3}, 1)};
  std::vector<double> x(params[0].values().begin(), params[0].values().end());
  std::vector<double> m(x.size()), v(x.size());
  AdamState state;
  for (int t = 1; t <= 5; ++t) {
    const Tensor grad = oracle::random_tensor(Shape{1, 2, 3}, 100 + t);
    adam_step(params, std::span<const Tensor>(&grad, 1), state, cfg);
    for (std::size_t i = 0; i < x.size(); ++i) {
      m[i] = 0.9 * m[i] + 0.1 * grad[i];
      v[i] = 0.999 * v[i] + 0.001 * grad[i] * grad[i];
      const double mh = m[i] / (1 - std::pow(0.9, t));
      const double vh = v[i] / (1 - std::pow(0.999, t));
      x[i] -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
      CHECK(params[0][i] == doctest::Approx(x[i]).epsilon(1e-14));
    }
  }
  CHECK(state.step == 5);
}

TEST_CASE("first adam step moves each entry by lr against the gradient sign") {
  std::vector<Tensor> params{Tensor(Shape{1, 1, 3}, 0.0)};
  const Tensor grad(Shape{1, 1, 3}, std::vector<double>{2.0, -0.5, 1e-3});
  AdamState state;
  adam_step(params, std::span<const Tensor>(&grad, 1), state, AdamConfig{0.1});
  CHECK(params[0][0] == doctest::Approx(-0.1).epsilon(1e-6));
  CHECK(params[0][1] == doctest::Approx(0.1).epsilon(1e-6));
  CHECK(params[0][2] == doctest::Approx(-0.1).epsilon(1e-4));
}

TEST_CASE("adam rejects mismatched gradients") {
  std::vector<Tensor> params{Tensor(Shape{1, 1, 3})};
  const Tensor grad(Shape{1, 1, 2});
  AdamState state;
  CHECK_THROWS(adam_step(params, std::span<const Tensor>(&grad, 1), state, AdamConfig{}));
}

TEST_CASE("parameter sets keep insertion order and reject duplicates") {
  ParameterSet p;
  p.add("b", Tensor(Shape{1, 1, 2}));
  p.add("a", Tensor(Shape{2, 1, 1}));
  CHECK(p.names() == std::vector<std::string>{"b", "a"});
  CHECK(p.index("a") == 1);
  CHECK(p.scalar_count() == 4);
  CHECK(p.contains("b"));
  CHECK_FALSE(p.contains("c"));
  CHECK_THROWS(p.add("a", Tensor(Shape{1, 1, 1})));
  CHECK_THROWS(p.index("zz"));
}

TEST_CASE("bound parameters expose graph leaves and zero-filled gradients") {
  ParameterSet p;
  p.add("w", Tensor(Shape{1, 1, 2}, 3.0));
  p.add("unused", Tensor(Shape{1, 1, 1}, 1.0));
  ad::Graph g;
  const BoundParameters b(g, p, true);
  g.backward(ad::sum(ad::hadamard(b["w"], b["w"])));
  const std::vector<Tensor> grads = b.grads();
  CHECK(grads[0][0] == 6.0);
  CHECK(grads[1].shape() == Shape{1, 1, 1});
  CHECK(grads[1][0] == 0.0);
}
