#include "wagi/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "wagi/errors.hpp"

namespace wagi {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

void fft(std::span<Complex> data, bool inverse) {
  const std::size_t n = data.size();
  if (n <= 1) return;
  if ((n & (n - 1)) != 0) throw DimensionError("fft: length " + std::to_string(n) + " is not a power of two");

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }

  const double sign = inverse ? 1.0 : -1.0;
  std::vector<Complex> twiddle(n / 2);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const double step = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
    // Direct evaluation rather than a recurrence keeps twiddles exact to rounding.
    for (std::size_t k = 0; k < half; ++k) twiddle[k] = std::polar(1.0, step * static_cast<double>(k));
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const Complex u = data[start + k];
        const Complex v = data[start + k + half] * twiddle[k];
        data[start + k] = u + v;
        data[start + k + half] = u - v;
      }
    }
  }
}

void fft2d(std::span<Complex> data, int h, int w, bool inverse) {
  if (data.size() != static_cast<std::size_t>(h) * static_cast<std::size_t>(w)) {
    throw ShapeError("fft2d: buffer size does not match " + std::to_string(h) + "x" + std::to_string(w));
  }
  for (int y = 0; y < h; ++y) fft(data.subspan(static_cast<std::size_t>(y) * w, static_cast<std::size_t>(w)), inverse);
  std::vector<Complex> column(static_cast<std::size_t>(h));
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) column[static_cast<std::size_t>(y)] = data[static_cast<std::size_t>(y) * w + x];
    fft(column, inverse);
    for (int y = 0; y < h; ++y) data[static_cast<std::size_t>(y) * w + x] = column[static_cast<std::size_t>(y)];
  }
}

std::vector<Complex> dft2d_real(std::span<const double> channel, int h, int w) {
  std::vector<Complex> buf(channel.begin(), channel.end());
  fft2d(buf, h, w, false);
  return buf;
}

namespace {

void require_pow2(const Tensor& img, const char* what) {
  if (!is_power_of_two(img.height())) {
    throw DimensionError(std::string(what) + ": height " + std::to_string(img.height()) + " is not a power of two");
  }
  if (!is_power_of_two(img.width())) {
    throw DimensionError(std::string(what) + ": width " + std::to_string(img.width()) + " is not a power of two");
  }
}

void require_square_pow2(const Tensor& img, const char* what) {
  if (img.height() != img.width()) {
    throw DimensionError(std::string(what) + ": image " + img.shape().str() + " is not square");
  }
  require_pow2(img, what);
}

}  // namespace

Tensor power_spectrum(const Tensor& img) {
  require_pow2(img, "power_spectrum");
  const int h = img.height();
  const int w = img.width();
  Tensor out(1, h, w);
  for (int c = 0; c < img.channels(); ++c) {
    const std::vector<Complex> f = dft2d_real(img.channel(c), h, w);
    for (int u = 0; u < h; ++u) {
      for (int v = 0; v < w; ++v) {
        const int cy = (u + h / 2) % h;
        const int cx = (v + w / 2) % w;
        out(0, cy, cx) += std::norm(f[static_cast<std::size_t>(u) * w + v]);
      }
    }
  }
  out *= 1.0 / img.channels();
  return out;
}

SpectrumBinning::SpectrumBinning(int side) : side_(side) {
  if (!is_power_of_two(side)) throw DimensionError("spectrum binning: side " + std::to_string(side) + " is not a power of two");
  const double max_radius = side / std::numbers::sqrt2;
  const int bins = std::max(1, static_cast<int>(std::floor(max_radius)));
  count_.assign(static_cast<std::size_t>(bins), 0);
  bin_of_.resize(static_cast<std::size_t>(side) * side);
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      const double fy = y - side / 2;
      const double fx = x - side / 2;
      const double r_norm = std::sqrt(fx * fx + fy * fy) / max_radius;
      const int k = std::min(bins - 1, static_cast<int>(std::lround(r_norm * bins)));
      bin_of_[static_cast<std::size_t>(y) * side + x] = k;
      ++count_[static_cast<std::size_t>(k)];
    }
  }
  fill_.resize(count_.size());
  for (int k = 0; k < bins; ++k) {
    if (count_[static_cast<std::size_t>(k)] > 0) continue;
    Fill f;
    for (int j = k - 1; j >= 0; --j) {
      if (count_[static_cast<std::size_t>(j)] > 0) {
        f.lo = j;
        break;
      }
    }
    for (int j = k + 1; j < bins; ++j) {
      if (count_[static_cast<std::size_t>(j)] > 0) {
        f.hi = j;
        break;
      }
    }
    if (f.lo >= 0 && f.hi >= 0) {
      f.t = static_cast<double>(k - f.lo) / static_cast<double>(f.hi - f.lo);
    } else if (f.lo < 0) {
      f.lo = f.hi;
      f.t = 0.0;
    } else {
      f.hi = f.lo;
      f.t = 0.0;
    }
    fill_[static_cast<std::size_t>(k)] = f;
  }
}

std::vector<double> SpectrumBinning::reduce(const Tensor& centred_power) const {
  if (centred_power.height() != side_ || centred_power.width() != side_ || centred_power.channels() != 1) {
    throw ShapeError("reduce: expected 1x" + std::to_string(side_) + "x" + std::to_string(side_) + " spectrum, got " +
                     centred_power.shape().str());
  }
  std::vector<double> bins(count_.size(), 0.0);
  for (std::size_t i = 0; i < bin_of_.size(); ++i) bins[static_cast<std::size_t>(bin_of_[i])] += centred_power[i];
  for (std::size_t k = 0; k < bins.size(); ++k) {
    if (count_[k] > 0) bins[k] /= count_[k];
  }
  for (std::size_t k = 0; k < bins.size(); ++k) {
    if (count_[k] > 0) continue;
    const Fill& f = fill_[k];
    bins[k] = (1.0 - f.t) * bins[static_cast<std::size_t>(f.lo)] + f.t * bins[static_cast<std::size_t>(f.hi)];
  }
  return bins;
}

Tensor SpectrumBinning::reduce_adjoint(std::span<const double> bin_grad) const {
  std::vector<double> g(bin_grad.begin(), bin_grad.end());
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (count_[k] > 0) continue;
    const Fill& f = fill_[k];
    g[static_cast<std::size_t>(f.lo)] += (1.0 - f.t) * g[k];
    g[static_cast<std::size_t>(f.hi)] += f.t * g[k];
  }
  Tensor out(1, side_, side_);
  for (std::size_t i = 0; i < bin_of_.size(); ++i) {
    const auto k = static_cast<std::size_t>(bin_of_[i]);
    out[i] = g[k] / count_[k];
  }
  return out;
}

ReducedSpectrum reduced_spectrum(const Tensor& img) {
  require_square_pow2(img, "reduced_spectrum");
  const SpectrumBinning binning(img.height());
  ReducedSpectrum r;
  r.bins = binning.reduce(power_spectrum(img));
  r.bin_radii.resize(r.bins.size());
  for (std::size_t k = 0; k < r.bins.size(); ++k) r.bin_radii[k] = static_cast<double>(k) / r.bins.size();
  r.nyquist = std::hypot(static_cast<double>(img.height()), static_cast<double>(img.width()));
  return r;
}

double spectral_distance(const ReducedSpectrum& a, const ReducedSpectrum& b) {
  if (a.bins.size() != b.bins.size() || a.bins.empty()) throw ShapeError("spectral_distance: bin count mismatch");
  double acc = 0.0;
  for (std::size_t k = 0; k < a.bins.size(); ++k) {
    const double d = std::log(a.bins[k] + kSpectralLogFloor) - std::log(b.bins[k] + kSpectralLogFloor);
    acc += d * d;
  }
  return acc / static_cast<double>(a.bins.size());
}

double spectral_loss(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "spectral_loss");
  return spectral_distance(reduced_spectrum(a), reduced_spectrum(b));
}

double high_bin_deficit(const ReducedSpectrum& target, const ReducedSpectrum& result) {
  if (target.bins.size() != result.bins.size() || target.bins.empty()) {
    throw ShapeError("high_bin_deficit: bin count mismatch");
  }
  const std::size_t start = target.bins.size() / 2;
  double acc = 0.0;
  for (std::size_t k = start; k < target.bins.size(); ++k) {
    const double d = std::log(target.bins[k] + kSpectralLogFloor) - std::log(result.bins[k] + kSpectralLogFloor);
    acc += std::max(0.0, d);
  }
  return acc / static_cast<double>(target.bins.size() - start);
}

}  // namespace wagi
