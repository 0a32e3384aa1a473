#pragma once

// Independent reference implementations used only by tests. They follow the
// textbook definitions directly and share no code with the library.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include "wagi/autodiff.hpp"
#include "wagi/rng.hpp"
#include "wagi/tensor.hpp"

namespace oracle {

using wagi::Shape;
using wagi::Tensor;

// The four Haar kernels as printed, used as true convolution kernels:
// out(i, j) = Σ k[a][b] · x(2i + 1 - a, 2j + 1 - b).
inline constexpr double kHaar[4][2][2] = {
    {{1, 1}, {1, 1}},
    {{-1, -1}, {1, 1}},
    {{-1, 1}, {-1, 1}},
    {{1, -1}, {-1, 1}},
};

inline Tensor haar_band(const Tensor& x, int band, double scale) {
  Tensor out(x.channels(), x.height() / 2, x.width() / 2);
  for (int c = 0; c < out.channels(); ++c) {
    for (int i = 0; i < out.height(); ++i) {
      for (int j = 0; j < out.width(); ++j) {
        double s = 0;
        for (int a = 0; a < 2; ++a) {
          for (int b = 0; b < 2; ++b) s += kHaar[band][a][b] * x(c, 2 * i + 1 - a, 2 * j + 1 - b);
        }
        out(c, i, j) = scale * s;
      }
    }
  }
  return out;
}

// O(N^2) per axis direct DFT of one channel.
inline std::vector<std::complex<double>> naive_dft2(const Tensor& x, int c) {
  const int h = x.height();
  const int w = x.width();
  std::vector<std::complex<double>> out(static_cast<std::size_t>(h) * w);
  for (int u = 0; u < h; ++u) {
    for (int v = 0; v < w; ++v) {
      std::complex<double> s = 0;
      for (int y = 0; y < h; ++y) {
        for (int xx = 0; xx < w; ++xx) {
          const double ang = -2 * std::numbers::pi * (static_cast<double>(u) * y / h + static_cast<double>(v) * xx / w);
          s += x(c, y, xx) * std::complex<double>(std::cos(ang), std::sin(ang));
        }
      }
      out[static_cast<std::size_t>(u) * w + v] = s;
    }
  }
  return out;
}

inline Tensor random_tensor(Shape s, std::uint64_t seed, double lo = -1, double hi = 1) {
  wagi::CounterRng rng(seed, 77);
  return wagi::uniform_tensor(s, rng, lo, hi);
}

// Central-difference gradient check. `build` records a scalar function of the
// given leaves on a fresh graph. Per entry the error is
// |g_ad - g_fd| / max(|g_ad|, |g_fd|, 1e-3 · max |g| over the leaf), so
// entries with near-zero gradient are judged against the leaf's scale.
struct GradCheck {
  double max_rel_err = 0;
  double max_abs_grad = 0;
};

using Builder = std::function<wagi::ad::Var(wagi::ad::Graph&, const std::vector<wagi::ad::Var>&)>;

inline GradCheck grad_check(const std::vector<Tensor>& inputs, const Builder& build, double h = 1e-6,
                            std::size_t max_entries = 64) {
  using namespace wagi;
  std::vector<Tensor> analytic;
  {
    ad::Graph g;
    std::vector<ad::Var> vars;
    for (const Tensor& t : inputs) vars.push_back(g.parameter(t));
    const ad::Var out = build(g, vars);
    g.backward(out);
    for (const ad::Var& v : vars) {
      const Tensor* gr = g.grad(v);
      analytic.push_back(gr ? *gr : Tensor(v.shape()));
    }
  }
  const auto eval = [&](const std::vector<Tensor>& xs) {
    ad::Graph g;
    std::vector<ad::Var> vars;
    for (const Tensor& t : xs) vars.push_back(g.constant(t));
    return build(g, vars).value().item();
  };
  GradCheck res;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Tensor& a = analytic[k];
    const std::size_t n = inputs[k].size();
    const std::size_t stride = n > max_entries ? n / max_entries : 1;
    double scale = 0;
    for (double v : a.values()) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < n; i += stride) {
      std::vector<Tensor> plus = inputs;
      std::vector<Tensor> minus = inputs;
      plus[k][i] += h;
      minus[k][i] -= h;
      const double fd = (eval(plus) - eval(minus)) / (2 * h);
      const double denom = std::max({std::abs(fd), std::abs(a[i]), 1e-3 * scale, 1e-8});
      res.max_rel_err = std::max(res.max_rel_err, std::abs(fd - a[i]) / denom);
      scale = std::max(scale, std::abs(fd));
    }
    res.max_abs_grad = std::max(res.max_abs_grad, scale);
  }
  return res;
}

}  // namespace oracle
