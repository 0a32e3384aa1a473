#include <cmath>

#include "doctest.h"
#include "op_catalog.hpp"
#include "oracles.hpp"
#include "wagi/errors.hpp"
#include "wagi/metrics.hpp"
#include "wagi/wavelet.hpp"

using namespace wagi;

TEST_CASE("every op passes the finite-difference check") {
  for (const catalog::OpCase& op : catalog::all_ops()) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const oracle::GradCheck r = catalog::check_op(op, seed);
      INFO(op.name << " seed " << seed);
      CHECK(r.max_rel_err <= 1e-4);
      CHECK(r.max_abs_grad > 0);
    }
  }
}

TEST_CASE("conv2d forward equals direct summation") {
  const Tensor x = oracle::random_tensor(Shape{2, 5, 6}, 1);
  const Tensor w = oracle::random_tensor(Shape{3, 2, 9}, 2);
  const Tensor b = oracle::random_tensor(Shape{3, 1, 1}, 3);
  ad::Graph g;
  const Tensor out = ad::conv2d(g.constant(x), g.constant(w), g.constant(b)).value();
  for (int o = 0; o < 3; ++o) {
    for (int y = 0; y < 5; ++y) {
      for (int xx = 0; xx < 6; ++xx) {
        double s = b[static_cast<std::size_t>(o)];
        for (int i = 0; i < 2; ++i) {
          for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
              const int yy = y + dy, xs = xx + dx;
              if (yy < 0 || yy >= 5 || xs < 0 || xs >= 6) continue;
              s += w(o, i, (dy + 1) * 3 + (dx + 1)) * x(i, yy, xs);
            }
          }
        }
        CHECK(out(o, y, xx) == doctest::Approx(s).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("demodulated weights have unit norm per output channel") {
  const Tensor w = oracle::random_tensor(Shape{4, 3, 9}, 5);
  const Tensor s = oracle::random_tensor(Shape{3, 1, 1}, 6);
  ad::Graph g;
  const Tensor m = ad::modulate_weight(g.constant(w), g.constant(s), true).value();
  for (int o = 0; o < 4; ++o) {
    double ss = 0;
    for (double v : m.channel(o)) ss += v * v;
    CHECK(ss == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("resampling forward laws") {
  ad::Graph g;
  const Tensor c(Shape{2, 3, 5}, 0.25);
  CHECK(max_abs_diff(ad::upsample_smooth(g.constant(c)).value(), Tensor(Shape{2, 6, 10}, 0.25)) <= 1e-15);
  const Tensor x = oracle::random_tensor(Shape{1, 2, 2}, 1);
  const Tensor up = ad::nearest_upsample(g.constant(x)).value();
  CHECK(up(0, 3, 3) == x(0, 1, 1));
  CHECK(up(0, 0, 1) == x(0, 0, 0));
  const Tensor pooled = ad::avg_pool2(g.constant(up)).value();
  CHECK(max_abs_diff(pooled, x) <= 1e-15);
}

TEST_CASE("haar ops agree with the tensor transform") {
  const Tensor x = oracle::random_tensor(Shape{2, 6, 4}, 8);
  ad::Graph g;
  const ad::Var q = ad::haar_analysis(g.constant(x), ScaleMode::orthonormal);
  const BandQuad ref = haar_forward(x, FilterBank::orthonormal());
  const auto bands = ad::split_bands(q);
  CHECK(max_abs_diff(bands[1].value(), ref.lh) == 0);
  const ad::Var back = ad::haar_synthesis(bands[0], bands[1], bands[2], bands[3], ScaleMode::orthonormal);
  CHECK(max_abs_diff(back.value(), x) <= 1e-14);
}

TEST_CASE("composite losses agree with metric functions") {
  const Tensor a = oracle::random_tensor(Shape{3, 8, 8}, 1);
  const Tensor b = oracle::random_tensor(Shape{3, 8, 8}, 2);
  ad::Graph g;
  const ad::Var va = g.constant(a), vb = g.constant(b);
  CHECK(ad::mse(va, vb).value().item() == doctest::Approx(pixel_loss(a, b, 2)));
  CHECK(ad::l1(va, vb).value().item() == doctest::Approx(pixel_loss(a, b, 1)));
  CHECK(ad::wavelet_loss_k(va, vb, 2).value().item() == doctest::Approx(wavelet_loss_k(a, b, 2)).epsilon(1e-12));
  CHECK(ad::subband_loss(va, vb, Band::HH, 1, 1).value().item() ==
        doctest::Approx(subband_loss(a, b, Band::HH, 1, 1)).epsilon(1e-12));
  const ReducedSpectrum t = reduced_spectrum(b);
  CHECK(ad::spectral_loss(va, t).value().item() == doctest::Approx(spectral_loss(a, b)).epsilon(1e-12));
}

TEST_CASE("tape semantics") {
  ad::Graph g;
  const ad::Var x = g.parameter(oracle::random_tensor(Shape{1, 2, 2}, 1));
  const ad::Var frozen = g.parameter(oracle::random_tensor(Shape{1, 2, 2}, 2), false);
  const ad::Var c = g.constant(oracle::random_tensor(Shape{1, 2, 2}, 3));
  const ad::Var y = ad::sum(ad::hadamard(ad::add(x, frozen), c));
  CHECK_THROWS_AS(g.backward(ad::add(x, c)), ShapeError);
  g.backward(y);
  REQUIRE(g.grad(x) != nullptr);
  CHECK(max_abs_diff(*g.grad(x), c.value()) == 0);
  CHECK(g.grad(frozen) == nullptr);
  CHECK(g.grad(c) == nullptr);
  // A second sweep clears the first.
  g.backward(y);
  CHECK(max_abs_diff(*g.grad(x), c.value()) == 0);
  CHECK(g.kind(y) == ad::OpKind::sum);

  ad::Graph other;
  const ad::Var z = other.constant(Tensor(Shape{1, 2, 2}));
  CHECK_THROWS_AS(ad::add(x, z), ArgumentError);
  CHECK_THROWS_AS(ad::add(x, g.constant(Tensor(Shape{1, 2, 3}))), ShapeError);
  CHECK_THROWS_AS(ad::conv2d(x, g.constant(Tensor(Shape{1, 1, 4}))), ShapeError);
}

TEST_CASE("gradient reaches through shared subexpressions") {
  // f(x) = Σ (x ⊙ x) has gradient 2x.
  ad::Graph g;
  const Tensor xv = oracle::random_tensor(Shape{2, 3, 3}, 4);
  const ad::Var x = g.parameter(xv);
  g.backward(ad::sum(ad::hadamard(x, x)));
  CHECK(max_abs_diff(*g.grad(x), xv * 2.0) <= 1e-15);
}
