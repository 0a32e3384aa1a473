#pragma once

#include <complex>
#include <span>
#include <vector>

#include "wagi/tensor.hpp"

namespace wagi {

using Complex = std::complex<double>;

/// Floor added inside the logarithm of the reduced spectrum.
inline constexpr double kSpectralLogFloor = 1e-12;

bool is_power_of_two(int n);

/// In-place iterative radix-2 FFT (bit-reversal + butterflies). The inverse
/// is unnormalized: fft(fft(x), inverse=true) == n·x.
void fft(std::span<Complex> data, bool inverse = false);

/// 2-D transform of a row-major h×w complex grid, rows then columns.
void fft2d(std::span<Complex> data, int h, int w, bool inverse = false);

/// Unnormalized 2-D DFT of one real channel.
std::vector<Complex> dft2d_real(std::span<const double> channel, int h, int w);

/// |DFT|² averaged over channels, DC moved to (H/2, W/2). Output is 1×H×W.
Tensor power_spectrum(const Tensor& img);

/// Annular binning of a DC-centred H×H power spectrum into floor(H/√2) bins.
/// A frequency at radius r joins bin round(r / (H/√2) · bins), clamped to the
/// last bin. Empty bins are filled by linear interpolation between the nearest
/// non-empty neighbours (or copied from the single neighbour at the ends).
class SpectrumBinning {
 public:
  explicit SpectrumBinning(int side);

  int side() const { return side_; }
  int bin_count() const { return static_cast<int>(count_.size()); }
  int bin_of(int y, int x) const { return bin_of_[static_cast<std::size_t>(y) * side_ + x]; }
  int members(int k) const { return count_[static_cast<std::size_t>(k)]; }

  /// Azimuthal means of a DC-centred spectrum (1×side×side).
  std::vector<double> reduce(const Tensor& centred_power) const;

  /// Adjoint of reduce(): spreads bin gradients back onto the spectrum grid.
  Tensor reduce_adjoint(std::span<const double> bin_grad) const;

 private:
  struct Fill {
    int lo = -1;
    int hi = -1;
    double t = 0.0;  // weight of hi
  };
  int side_;
  std::vector<int> bin_of_;
  std::vector<int> count_;
  std::vector<Fill> fill_;  // only meaningful for empty bins
};

struct ReducedSpectrum {
  std::vector<double> bins;
  /// k / bins, the normalized polar radius at each bin centre.
  std::vector<double> bin_radii;
  /// sqrt(H² + W²) in cycles per image.
  double nyquist = 0.0;
};

/// Requires a square power-of-two image.
ReducedSpectrum reduced_spectrum(const Tensor& img);

/// Mean over bins of (log(S_a + eps) - log(S_b + eps))².
double spectral_loss(const Tensor& a, const Tensor& b);
double spectral_distance(const ReducedSpectrum& a, const ReducedSpectrum& b);

/// Mean over the upper half of the bins of max(0, log S_target - log S_result),
/// i.e. how much high-frequency power the result is missing.
double high_bin_deficit(const ReducedSpectrum& target, const ReducedSpectrum& result);

}  // namespace wagi
