#include "doctest.h"
#include "oracles.hpp"
#include "wagi/errors.hpp"
#include "wagi/wavelet.hpp"

using namespace wagi;

TEST_CASE("filter bank kernels match the printed matrices") {
  const FilterBank raw = FilterBank::raw();
  for (int b = 0; b < 4; ++b) {
    const Kernel2x2 k = raw.kernel(static_cast<Band>(b));
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) CHECK(k[i][j] == oracle::kHaar[b][i][j]);
    }
  }
  CHECK(FilterBank::orthonormal().kernel(Band::HH)[0][0] == 0.5);
  CHECK(FilterBank::raw().mode() == ScaleMode::raw);
  CHECK(FilterBank::orthonormal().mode() == ScaleMode::orthonormal);
  CHECK_THROWS_AS(FilterBank(0.0), ArgumentError);
  CHECK_THROWS_AS(FilterBank(0.3).mode(), ArgumentError);
}

TEST_CASE("haar_forward equals the direct convolution oracle") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Tensor x = oracle::random_tensor(Shape{3, 8, 12}, seed);
    for (double scale : {1.0, 0.5}) {
      const BandQuad q = haar_forward(x, FilterBank(scale));
      for (int b = 0; b < 4; ++b) {
        CHECK(max_abs_diff(q.band(static_cast<Band>(b)), oracle::haar_band(x, b, scale)) <= 1e-14);
      }
    }
  }
}

TEST_CASE("2x2 window worked example") {
  // a b / c d = 1 2 / 3 4
  const Tensor x(Shape{1, 2, 2}, {1, 2, 3, 4});
  const BandQuad q = haar_forward(x, FilterBank::raw());
  CHECK(q.ll[0] == 10);
  CHECK(q.lh[0] == -4);
  CHECK(q.hl[0] == -2);
  CHECK(q.hh[0] == 0);
}

TEST_CASE("constant image has only LL energy") {
  const Tensor x(Shape{2, 8, 8}, 0.7);
  const BandQuad q = haar_forward(x, FilterBank::orthonormal());
  CHECK(q.lh.max_abs() == 0);
  CHECK(q.hl.max_abs() == 0);
  CHECK(q.hh.max_abs() == 0);
  CHECK(q.ll[0] == doctest::Approx(1.4));
}

TEST_CASE("single level round trip, both scales") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Tensor x = oracle::random_tensor(Shape{3, 16, 10}, seed);
    for (double s : {1.0, 0.5, 0.25}) {
      const FilterBank bank(s);
      CHECK(max_abs_diff(haar_inverse(haar_forward(x, bank), bank), x) <= 1e-13);
    }
  }
}

TEST_CASE("orthonormal bank preserves energy") {
  const Tensor x = oracle::random_tensor(Shape{1, 32, 32}, 3);
  const BandQuad q = haar_forward(x, FilterBank::orthonormal());
  double e = 0;
  for (Band b : kAllBands) {
    for (double v : q.band(b).values()) e += v * v;
  }
  double ex = 0;
  for (double v : x.values()) ex += v * v;
  CHECK(e == doctest::Approx(ex).epsilon(1e-12));
}

TEST_CASE("multi-level decomposition shapes and reconstruction") {
  const Tensor x = oracle::random_tensor(Shape{3, 64, 32}, 9);
  for (int K = 1; K <= 5; ++K) {
    const WaveletPyramid p = decompose(x, K, FilterBank::orthonormal());
    REQUIRE(p.depth() == K);
    for (int i = 0; i < K; ++i) {
      CHECK(p.levels[i].lh.height() == 64 >> (i + 1));
      CHECK(p.levels[i].hh.width() == 32 >> (i + 1));
    }
    CHECK(p.approx.height() == 64 >> K);
    CHECK(max_abs_diff(reconstruct(p, FilterBank::orthonormal()), x) <= 1e-12);
  }
}

TEST_CASE("approximation of a constant image scales by (4s)^K") {
  const double c = 0.3;
  const Tensor x(Shape{1, 16, 16}, c);
  for (double s : {1.0, 0.5}) {
    const WaveletPyramid p = decompose(x, 3, FilterBank(s));
    const double want = c * std::pow(4 * s, 3);
    CHECK(p.approx[0] == doctest::Approx(want).epsilon(1e-14));
  }
  CHECK(max_abs_diff(low_pass(x, 2, FilterBank::orthonormal()), Tensor(Shape{1, 4, 4}, c * 4)) <= 1e-14);
}

TEST_CASE("dimension errors name the axis") {
  const Tensor x(Shape{1, 6, 8});
  CHECK_THROWS_AS(decompose(x, 2, FilterBank::raw()), DimensionError);
  try {
    decompose(x, 2, FilterBank::raw());
  } catch (const DimensionError& e) {
    CHECK(std::string(e.what()).find("height") != std::string::npos);
  }
  try {
    haar_forward(Tensor(Shape{1, 4, 5}), FilterBank::raw());
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    CHECK(std::string(e.what()).find("width") != std::string::npos);
  }
  CHECK_THROWS_AS(decompose(Tensor(Shape{1, 8, 8}), 0, FilterBank::raw()), ArgumentError);
}

TEST_CASE("haar_inverse rejects mismatched bands") {
  BandQuad q{Tensor(Shape{1, 2, 2}), Tensor(Shape{1, 2, 2}), Tensor(Shape{1, 2, 3}), Tensor(Shape{1, 2, 2})};
  CHECK_THROWS_AS(haar_inverse(q, FilterBank::raw()), ShapeError);
}

TEST_CASE("names round-trip") {
  for (Band b : kAllBands) CHECK(parse_band(to_string(b)) == b);
  CHECK(parse_scale_mode("raw") == ScaleMode::raw);
  CHECK_THROWS_AS(parse_scale_mode("unit"), ArgumentError);
}
