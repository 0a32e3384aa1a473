#include "wagi/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wagi/errors.hpp"
#include "wagi/rng.hpp"
#include "wagi/spectrum.hpp"

namespace wagi {

namespace {

int reflect(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

void rescale(Tensor& t, double lo, double hi) {
  double mn = t[0];
  double mx = t[0];
  for (double v : t.values()) {
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  const double span = mx - mn;
  for (double& v : t.values()) v = span > 0 ? lo + (hi - lo) * (v - mn) / span : 0.5 * (lo + hi);
}

}  // namespace

Tensor procedural_texture(int size, std::uint64_t seed, int channels) {
  if (size < 2) throw DimensionError("texture size must be at least 2");
  if (channels < 1) throw ArgumentError("texture needs at least one channel");
  CounterRng rng(seed, 0x7e47);
  Tensor img(channels, size, size);
  const double n = size;

  const int blobs = rng.uniform_int(3, 7);
  for (int b = 0; b < blobs; ++b) {
    const double cy = rng.uniform(0, n);
    const double cx = rng.uniform(0, n);
    const double s = rng.uniform(0.1, 0.25) * n;
    std::vector<double> colour(static_cast<std::size_t>(channels));
    for (double& c : colour) c = rng.uniform(-1, 1);
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        const double r2 = (y - cy) * (y - cy) + (x - cx) * (x - cx);
        const double g = std::exp(-r2 / (2 * s * s));
        for (int c = 0; c < channels; ++c) img(c, y, x) += colour[static_cast<std::size_t>(c)] * g;
      }
    }
  }

  // Rotated checkerboard with soft cell edges.
  const double period = rng.uniform(12, 32);
  const double theta = rng.uniform(0, std::numbers::pi);
  const double amp = rng.uniform(0.1, 0.3);
  std::vector<double> check_colour(static_cast<std::size_t>(channels));
  for (double& c : check_colour) c = rng.uniform(0.3, 1.0);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double u = std::cos(theta) * x + std::sin(theta) * y;
      const double v = -std::sin(theta) * x + std::cos(theta) * y;
      const double s = std::tanh(std::sin(std::numbers::pi * u / period) * 1.5) *
                       std::tanh(std::sin(std::numbers::pi * v / period) * 1.5);
      for (int c = 0; c < channels; ++c) img(c, y, x) += amp * s * check_colour[static_cast<std::size_t>(c)];
    }
  }

  // Pixel-scale line fields and checkerboards inside smooth windows.
  const int patches = rng.uniform_int(3, 5);
  const int first_kind = rng.uniform_int(0, 2);
  for (int p = 0; p < patches; ++p) {
    const int kind = (first_kind + p) % 3;  // rows, columns, checkerboard
    const double cy = rng.uniform(0.2, 0.8) * n;
    const double cx = rng.uniform(0.2, 0.8) * n;
    const double s = rng.uniform(0.15, 0.35) * n;
    const double a = rng.uniform(0.15, 0.35);
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        const double r2 = (y - cy) * (y - cy) + (x - cx) * (x - cx);
        const double window = std::exp(-r2 / (2 * s * s));
        const int parity = kind == 0 ? (y & 1) : kind == 1 ? (x & 1) : ((x + y) & 1);
        for (int c = 0; c < channels; ++c) img(c, y, x) += (parity ? a : -a) * window;
      }
    }
  }

  rescale(img, 0.1, 0.9);
  return img;
}

std::vector<Tensor> texture_corpus(int count, int size, std::uint64_t seed, int channels) {
  std::vector<Tensor> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) out.push_back(procedural_texture(size, mix64(seed ^ (0x51ed27u + i)), channels));
  return out;
}

Tensor power_law_noise(int size, std::uint64_t seed, double alpha, int channels) {
  if (!is_power_of_two(size)) throw DimensionError("noise side must be a power of two");
  CounterRng rng(seed, 0xf0f0);
  Tensor img(channels, size, size);
  std::vector<Complex> grid(static_cast<std::size_t>(size) * size);
  for (int c = 0; c < channels; ++c) {
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        const int fy = y <= size / 2 ? y : y - size;
        const int fx = x <= size / 2 ? x : x - size;
        const double f = std::hypot(fy, fx);
        const double amp = f > 0 ? std::pow(f, -alpha) : 0.0;
        grid[static_cast<std::size_t>(y) * size + x] = Complex(amp * rng.normal(), amp * rng.normal());
      }
    }
    fft2d(grid, size, size, true);
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) img(c, y, x) = grid[static_cast<std::size_t>(y) * size + x].real();
    }
  }
  rescale(img, 0.0, 1.0);
  return img;
}

Tensor gaussian_blur(const Tensor& img, double sigma) {
  if (!(sigma > 0)) throw ArgumentError("blur sigma must be positive");
  const int r = static_cast<int>(std::ceil(3 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * r + 1));
  double total = 0;
  for (int i = -r; i <= r; ++i) total += k[static_cast<std::size_t>(i + r)] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (double& v : k) v /= total;

  Tensor tmp(img.shape());
  Tensor out(img.shape());
  const int h = img.height();
  const int w = img.width();
  for (int c = 0; c < img.channels(); ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double s = 0;
        for (int i = -r; i <= r; ++i) s += k[static_cast<std::size_t>(i + r)] * img(c, y, reflect(x + i, w));
        tmp(c, y, x) = s;
      }
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double s = 0;
        for (int i = -r; i <= r; ++i) s += k[static_cast<std::size_t>(i + r)] * tmp(c, reflect(y + i, h), x);
        out(c, y, x) = s;
      }
    }
  }
  return out;
}

}  // namespace wagi
