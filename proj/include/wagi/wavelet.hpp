#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "wagi/tensor.hpp"

namespace wagi {

enum class ScaleMode { raw, orthonormal };
enum class Band { LL = 0, LH = 1, HL = 2, HH = 3 };

inline constexpr std::array<Band, 4> kAllBands{Band::LL, Band::LH, Band::HL, Band::HH};
inline constexpr std::array<Band, 3> kHighBands{Band::LH, Band::HL, Band::HH};

std::string_view to_string(Band b);
std::string_view to_string(ScaleMode m);
Band parse_band(std::string_view s);
ScaleMode parse_scale_mode(std::string_view s);

using Kernel2x2 = std::array<std::array<double, 2>, 2>;

/// The four 2×2 Haar filters times a common scale.
///
/// Kernels are convolution kernels: LL = [[1,1],[1,1]], LH = [[-1,-1],[1,1]],
/// HL = [[-1,1],[-1,1]], HH = [[1,-1],[-1,1]]. Applied as a true
/// (kernel-flipped) convolution on a window w[dy][dx] they give
///
///   LL = w00 + w01 + w10 + w11        LH = w00 + w01 - w10 - w11
///   HL = w00 - w01 + w10 - w11        HH = w00 - w01 - w10 + w11
///
/// Scale 1 is the raw bank; scale 1/2 makes the bank orthonormal.
class FilterBank {
 public:
  explicit FilterBank(double scale);

  static FilterBank raw() { return FilterBank(1.0); }
  static FilterBank orthonormal() { return FilterBank(0.5); }
  static FilterBank for_mode(ScaleMode mode) { return mode == ScaleMode::raw ? raw() : orthonormal(); }

  double scale() const { return scale_; }
  /// Kernel entries, scale applied.
  Kernel2x2 kernel(Band b) const;
  /// Weight of window entry (dy, dx) in band b, scale applied.
  double tap(Band b, int dy, int dx) const { return scale_ * kSigns[static_cast<int>(b)][dy][dx]; }

  ScaleMode mode() const;

 private:
  // Correlation-form signs, i.e. the kernels rotated by 180°.
  static constexpr int kSigns[4][2][2] = {
      {{1, 1}, {1, 1}},
      {{1, 1}, {-1, -1}},
      {{1, -1}, {1, -1}},
      {{1, -1}, {-1, 1}},
  };
  double scale_;
};

struct BandQuad {
  Tensor ll, lh, hl, hh;

  const Tensor& band(Band b) const;
  Tensor& band(Band b);
  Shape shape() const { return ll.shape(); }
};

struct BandTriple {
  Tensor lh, hl, hh;

  const Tensor& band(Band b) const;
};

/// K-level decomposition. levels[i] holds the high bands of level i, whose
/// spatial dims are H/2^(i+1) × W/2^(i+1); approx is the K-th LL band.
struct WaveletPyramid {
  std::vector<BandTriple> levels;
  Tensor approx;
  ScaleMode scale_mode = ScaleMode::orthonormal;

  int depth() const { return static_cast<int>(levels.size()); }
};

BandQuad haar_forward(const Tensor& img, const FilterBank& bank);
Tensor haar_inverse(const BandQuad& bands, const FilterBank& bank);

WaveletPyramid decompose(const Tensor& img, int levels, const FilterBank& bank);
Tensor reconstruct(const WaveletPyramid& pyramid, const FilterBank& bank);

/// LL^(i) applied i times, i.e. the approximation band after `level` steps.
Tensor low_pass(const Tensor& img, int level, const FilterBank& bank);

/// Throws DimensionError unless H and W are divisible by 2^levels.
void require_divisible(const Shape& s, int levels, const char* what);

}  // namespace wagi
