#pragma once

// Scalar test functions covering every differentiable op, shared by the unit
// tests and the acceptance suite.

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "wagi/autodiff.hpp"
#include "wagi/spectrum.hpp"

namespace catalog {

using wagi::Shape;
using wagi::Tensor;
namespace ad = wagi::ad;

struct OpCase {
  std::string name;
  std::vector<Shape> inputs;
  // Builds a scalar from the leaves; `seed` fixes the projection weights.
  std::function<ad::Var(ad::Graph&, const std::vector<ad::Var>&, std::uint64_t seed)> build;
  // Inputs are drawn from [lo, hi].
  double lo = -1;
  double hi = 1;
};

// Σ out ⊙ R for a fixed random R, reducing any tensor to a scalar.
inline ad::Var project(ad::Graph& g, ad::Var v, std::uint64_t seed) {
  return ad::sum(ad::hadamard(v, g.constant(oracle::random_tensor(v.shape(), seed ^ 0xabcdef))));
}

inline std::vector<OpCase> all_ops() {
  using V = const std::vector<ad::Var>&;
  using G = ad::Graph&;
  using S = std::uint64_t;
  std::vector<OpCase> ops;
  ops.push_back({"add", {{2, 4, 4}, {2, 4, 4}}, [](G g, V x, S s) { return project(g, ad::add(x[0], x[1]), s); }});
  ops.push_back({"sub", {{2, 4, 4}, {2, 4, 4}}, [](G g, V x, S s) { return project(g, ad::sub(x[0], x[1]), s); }});
  ops.push_back({"scalar_mul", {{2, 4, 4}}, [](G g, V x, S s) { return project(g, ad::scalar_mul(x[0], -1.7), s); }});
  ops.push_back({"hadamard", {{2, 4, 4}, {2, 4, 4}}, [](G g, V x, S s) { return project(g, ad::hadamard(x[0], x[1]), s); }});
  ops.push_back({"conv2d_3x3", {{3, 6, 5}, {4, 3, 9}, {4, 1, 1}},
                 [](G g, V x, S s) { return project(g, ad::conv2d(x[0], x[1], x[2]), s); }});
  ops.push_back({"conv2d_1x1", {{3, 4, 4}, {5, 3, 1}},
                 [](G g, V x, S s) { return project(g, ad::conv2d(x[0], x[1]), s); }});
  ops.push_back({"modulate_weight", {{3, 2, 9}, {2, 1, 1}},
                 [](G g, V x, S s) { return project(g, ad::modulate_weight(x[0], x[1], true), s); }});
  ops.push_back({"modulate_weight_nodemod", {{3, 2, 9}, {2, 1, 1}},
                 [](G g, V x, S s) { return project(g, ad::modulate_weight(x[0], x[1], false), s); }});
  ops.push_back({"modulated_conv2d", {{2, 5, 5}, {3, 2, 9}, {2, 1, 1}, {3, 1, 1}},
                 [](G g, V x, S s) { return project(g, ad::modulated_conv2d(x[0], x[1], x[2], x[3]), s); }});
  ops.push_back({"leaky_relu", {{2, 4, 4}}, [](G g, V x, S s) { return project(g, ad::leaky_relu(x[0]), s); }});
  ops.push_back({"sigmoid", {{2, 4, 4}}, [](G g, V x, S s) { return project(g, ad::sigmoid(x[0]), s); }});
  ops.push_back({"nearest_upsample", {{2, 3, 4}}, [](G g, V x, S s) { return project(g, ad::nearest_upsample(x[0]), s); }});
  ops.push_back({"upsample_smooth", {{2, 3, 4}}, [](G g, V x, S s) { return project(g, ad::upsample_smooth(x[0]), s); }});
  ops.push_back({"avg_pool2", {{2, 4, 6}}, [](G g, V x, S s) { return project(g, ad::avg_pool2(x[0]), s); }});
  ops.push_back({"haar_analysis_orthonormal", {{2, 4, 6}},
                 [](G g, V x, S s) { return project(g, ad::haar_analysis(x[0], wagi::ScaleMode::orthonormal), s); }});
  ops.push_back({"haar_analysis_raw", {{2, 4, 6}},
                 [](G g, V x, S s) { return project(g, ad::haar_analysis(x[0], wagi::ScaleMode::raw), s); }});
  ops.push_back({"haar_synthesis_orthonormal", {{2, 3, 3}, {2, 3, 3}, {2, 3, 3}, {2, 3, 3}}, [](G g, V x, S s) {
                   return project(g, ad::haar_synthesis(x[0], x[1], x[2], x[3], wagi::ScaleMode::orthonormal), s);
                 }});
  ops.push_back({"haar_synthesis_raw", {{1, 2, 3}, {1, 2, 3}, {1, 2, 3}, {1, 2, 3}}, [](G g, V x, S s) {
                   return project(g, ad::haar_synthesis(x[0], x[1], x[2], x[3], wagi::ScaleMode::raw), s);
                 }});
  ops.push_back({"slice_channels", {{4, 3, 3}}, [](G g, V x, S s) { return project(g, ad::slice_channels(x[0], 1, 2), s); }});
  ops.push_back({"concat_channels", {{1, 3, 3}, {2, 3, 3}}, [](G g, V x, S s) {
                   const std::array<ad::Var, 2> p{x[0], x[1]};
                   return project(g, ad::concat_channels(p), s);
                 }});
  ops.push_back({"linear", {{1, 4, 3}, {3, 1, 1}, {4, 1, 1}},
                 [](G g, V x, S s) { return project(g, ad::linear(x[0], x[1], x[2]), s); }});
  ops.push_back({"sum", {{2, 3, 3}}, [](G, V x, S) { return ad::sum(x[0]); }});
  ops.push_back({"mean_square", {{2, 3, 3}}, [](G, V x, S) { return ad::mean_square(x[0]); }});
  ops.push_back({"mean_abs", {{2, 3, 3}}, [](G, V x, S) { return ad::mean_abs(x[0]); }});
  ops.push_back({"spectral_loss", {{3, 8, 8}},
                 [](G, V x, S s) {
                   const wagi::ReducedSpectrum t = wagi::reduced_spectrum(oracle::random_tensor(Shape{3, 8, 8}, s + 9, 0, 1));
                   return ad::spectral_loss(x[0], t);
                 },
                 0, 1});
  ops.push_back({"mse", {{2, 4, 4}, {2, 4, 4}}, [](G, V x, S) { return ad::mse(x[0], x[1]); }});
  ops.push_back({"l1", {{2, 4, 4}, {2, 4, 4}}, [](G, V x, S) { return ad::l1(x[0], x[1]); }});
  ops.push_back({"subband_loss", {{2, 8, 8}, {2, 8, 8}},
                 [](G, V x, S) { return ad::subband_loss(x[0], x[1], wagi::Band::HL, 1, 2); }});
  ops.push_back({"subband_loss_p1", {{2, 8, 8}, {2, 8, 8}},
                 [](G, V x, S) { return ad::subband_loss(x[0], x[1], wagi::Band::LH, 0, 1); }});
  ops.push_back({"wavelet_loss_k", {{2, 8, 8}, {2, 8, 8}}, [](G, V x, S) { return ad::wavelet_loss_k(x[0], x[1], 2); }});
  return ops;
}

inline oracle::GradCheck check_op(const OpCase& op, std::uint64_t seed) {
  std::vector<Tensor> inputs;
  for (std::size_t i = 0; i < op.inputs.size(); ++i) {
    inputs.push_back(oracle::random_tensor(op.inputs[i], seed * 131 + i, op.lo, op.hi));
  }
  return oracle::grad_check(inputs, [&](ad::Graph& g, const std::vector<ad::Var>& v) { return op.build(g, v, seed); });
}

}  // namespace catalog
