#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "oracles.hpp"
#include "wagi/corpus.hpp"
#include "wagi/errors.hpp"
#include "wagi/spectrum.hpp"

using namespace wagi;

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size(); ++i) r[idx[i]] = static_cast<double>(i);
  return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const std::vector<double> ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  double d2 = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d2 += (ra[i] - rb[i]) * (ra[i] - rb[i]);
  return 1 - 6 * d2 / (n * (n * n - 1));
}

}  // namespace

TEST_CASE("fft matches the direct DFT") {
  for (int n : {1, 2, 4, 8, 32}) {
    CounterRng rng(static_cast<std::uint64_t>(n), 1);
    std::vector<Complex> x(static_cast<std::size_t>(n));
    for (auto& v : x) v = Complex(rng.normal(), rng.normal());
    std::vector<Complex> f = x;
    fft(f);
    for (int k = 0; k < n; ++k) {
      Complex s = 0;
      for (int t = 0; t < n; ++t) s += x[t] * std::polar(1.0, -2 * std::numbers::pi * k * t / n);
      CHECK(std::abs(f[k] - s) <= 1e-12 * n);
    }
    fft(f, true);
    for (int k = 0; k < n; ++k) CHECK(std::abs(f[k] / static_cast<double>(n) - x[k]) <= 1e-13);
  }
  std::vector<Complex> bad(6);
  CHECK_THROWS_AS(fft(bad), DimensionError);
}

TEST_CASE("2-D transform matches the direct DFT") {
  const Tensor x = oracle::random_tensor(Shape{1, 8, 16}, 4);
  const std::vector<Complex> f = dft2d_real(x.channel(0), 8, 16);
  const auto want = oracle::naive_dft2(x, 0);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(f[i] - want[i]) <= 1e-11);
}

TEST_CASE("power spectrum: DC placement, Parseval, channel averaging") {
  const Tensor c(Shape{1, 8, 8}, 0.5);
  const Tensor p = power_spectrum(c);
  CHECK(p(0, 4, 4) == doctest::Approx(32.0 * 32.0));
  CHECK(p.sum() == doctest::Approx(p(0, 4, 4)));

  const Tensor x = oracle::random_tensor(Shape{3, 16, 16}, 2);
  const Tensor px = power_spectrum(x);
  double energy = 0;
  for (double v : x.values()) energy += v * v;
  // Σ|X|² = N Σ|x|², averaged over channels.
  CHECK(px.sum() == doctest::Approx(256.0 * energy / 3));
  CHECK_THROWS_AS(power_spectrum(Tensor(Shape{1, 6, 8})), DimensionError);
}

TEST_CASE("binning law") {
  for (int side : {4, 8, 16, 64, 128}) {
    const SpectrumBinning b(side);
    CHECK(b.bin_count() == static_cast<int>(std::floor(side / std::sqrt(2.0))));
    CHECK(b.bin_of(side / 2, side / 2) == 0);
    CHECK(b.bin_of(0, 0) == b.bin_count() - 1);
  }
  const SpectrumBinning b(8);
  Tensor ones(Shape{1, 8, 8}, 1.0);
  for (double v : b.reduce(ones)) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("reduce_adjoint is the adjoint of reduce") {
  const SpectrumBinning b(16);
  const Tensor p = oracle::random_tensor(Shape{1, 16, 16}, 1);
  std::vector<double> g(static_cast<std::size_t>(b.bin_count()));
  CounterRng rng(3);
  for (double& v : g) v = rng.normal();
  const std::vector<double> r = b.reduce(p);
  const Tensor a = b.reduce_adjoint(g);
  double lhs = 0, rhs = 0;
  for (std::size_t k = 0; k < r.size(); ++k) lhs += r[k] * g[k];
  for (std::size_t i = 0; i < p.size(); ++i) rhs += p[i] * a[i];
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("reduced spectrum fields and distances") {
  const Tensor x = procedural_texture(32, 3);
  const ReducedSpectrum r = reduced_spectrum(x);
  CHECK(r.bins.size() == 22);
  CHECK(r.nyquist == doctest::Approx(std::hypot(32.0, 32.0)));
  CHECK(r.bin_radii.front() == 0);
  CHECK(spectral_loss(x, x) == 0);
  CHECK(spectral_loss(x, gaussian_blur(x, 1.0)) > 0);
  CHECK(high_bin_deficit(r, reduced_spectrum(gaussian_blur(x, 1.5))) > 0.5);
  CHECK(high_bin_deficit(r, r) == 0);
  CHECK_THROWS_AS(reduced_spectrum(Tensor(Shape{1, 16, 32})), DimensionError);
}

TEST_CASE("power-law noise has a decaying reduced spectrum") {
  const Tensor x = power_law_noise(64, 8);
  const ReducedSpectrum r = reduced_spectrum(x);
  std::vector<double> radius(r.bins.begin() + 1, r.bins.end());
  std::vector<double> power(r.bins.begin() + 1, r.bins.end());
  for (std::size_t i = 0; i < radius.size(); ++i) radius[i] = static_cast<double>(i);
  CHECK(spearman(radius, power) < -0.9);
}
