#pragma once

#include <cstdint>
#include <vector>

#include "wagi/tensor.hpp"

namespace wagi {

/// Procedural texture in [0.1, 0.9]: coloured Gaussian blobs, a soft-edged
/// rotated checkerboard, and windowed pixel-scale line fields (rows or
/// columns) and checkerboards that carry the near-Nyquist detail.
Tensor procedural_texture(int size, std::uint64_t seed, int channels = 3);

/// `count` textures with seeds derived from `seed`.
std::vector<Tensor> texture_corpus(int count, int size, std::uint64_t seed, int channels = 3);

/// Noise with a 1/f^alpha amplitude spectrum, rescaled to [0, 1]. Side must
/// be a power of two.
Tensor power_law_noise(int size, std::uint64_t seed, double alpha = 1.0, int channels = 3);

/// Separable Gaussian blur (radius ceil(3 sigma), reflected border).
Tensor gaussian_blur(const Tensor& img, double sigma);

}  // namespace wagi
