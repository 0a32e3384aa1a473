#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wagi/autodiff.hpp"
#include "wagi/optim.hpp"
#include "wagi/tensor.hpp"
#include "wagi/wavelet.hpp"

namespace wagi {

enum class GeneratorKind { wavelet, pixel };

std::string_view to_string(GeneratorKind k);
GeneratorKind parse_generator_kind(std::string_view s);

/// Architecture of the toy style generator. Level ℓ works on features of
/// side base_resolution · 2^ℓ and emits an image of twice that side.
struct SynthConfig {
  int base_resolution = 4;
  int levels = 5;
  std::vector<int> channels{64, 64, 32, 16, 8};
  int image_channels = 3;
  int style_dim = 64;
  std::uint64_t seed = 0;
  std::vector<int> fusion_feature_levels{2, 3};
  int fusion_wavelet_level = 4;

  void validate() const;
  int feature_resolution(int level) const { return base_resolution << level; }
  int output_resolution() const { return base_resolution << levels; }

  /// Config producing `resolution`-sided images; widths halve per level from
  /// `width` down to `min_width`. Fusion sites keep the default placement:
  /// feature fusion two and three levels before the last, wavelet fusion last.
  static SynthConfig for_resolution(int resolution, int width = 64, int min_width = 8);
};

/// One style vector (style_dim × 1 × 1) per level.
struct LatentStack {
  std::vector<Tensor> styles;
};

LatentStack zero_latents(const SynthConfig& cfg);
LatentStack random_latents(const SynthConfig& cfg, std::uint64_t seed, double stddev = 1.0);

/// Gaussian weights scaled by 1/sqrt(fan_in), zero biases, modulation bias
/// of one and a constant input of ones.
ParameterSet init_generator(const SynthConfig& cfg, GeneratorKind kind);

enum class FusionTarget { feature, wavelet };

/// Scale/shift maps for one fusion site: x ← g · x + h.
struct FusionParams {
  Tensor g;
  Tensor h;
  FusionTarget target = FusionTarget::feature;
  int level = 0;
};

struct FusionVars {
  ad::Var g;
  ad::Var h;
  FusionTarget target = FusionTarget::feature;
  int level = 0;
};

/// Identity maps (g ≡ 1, h ≡ 0) for every configured fusion site.
std::vector<FusionParams> identity_fusion(const SynthConfig& cfg);

/// Shape that fusion at (target, level) must have.
Shape fusion_shape(const SynthConfig& cfg, FusionTarget target, int level);

struct SynthTrace {
  /// Activated (and fused) features F'_ℓ per level.
  std::vector<Tensor> features;
  /// Wavelet coefficients W_ℓ per level, after wavelet fusion.
  std::vector<BandQuad> coefficients;
  Tensor image;
};

struct SynthGraph {
  std::vector<ad::Var> features;
  /// 4·image_channels maps per level ordered [LL | LH | HL | HH].
  std::vector<ad::Var> coefficients;
  ad::Var image;
};

/// Wavelet-growth generator. For each level:
///   F'  = leaky_relu(ModConv(F, affine(w_ℓ)))        (then g·F' + h at feature sites)
///   W   = tWavelets(F')                               (then g·W + h at the wavelet site)
///   I   = haar_synthesis(2·I + W.ll, W.lh, W.hl, W.hh), orthonormal
///   F   = conv3x3(nearest_upsample(F'))
/// The running image starts at zero, so every high frequency of the output
/// comes from an explicit coefficient band.
SynthGraph synthesize_graph(const SynthConfig& cfg, const BoundParameters& params, std::span<const ad::Var> latents,
                            std::span<const FusionVars> fusion = {});

SynthTrace synthesize(const SynthConfig& cfg, const ParameterSet& params, const LatentStack& latents,
                      std::span<const FusionParams> fusion = {});

/// Pixel-growth baseline with the same feature path; the image grows as
/// I ← upsample_smooth(I + toRGB(F')).
ad::Var pixel_synthesize_graph(const SynthConfig& cfg, const BoundParameters& params, std::span<const ad::Var> latents);
Tensor pixel_synthesize(const SynthConfig& cfg, const ParameterSet& params, const LatentStack& latents);

/// 1×1 convolution of a feature map into 4·(weight rows / 4) maps split into
/// LL, LH, HL, HH. `weight` is (4·C_img) × C_feat × 1, `bias` (4·C_img) × 1 × 1.
BandQuad t_wavelets(const Tensor& feature, const Tensor& weight, const Tensor& bias);

/// Residual-to-fusion extractor: a shared 3×3 trunk with leaky ReLU, then per
/// site 2×2 average pooling down to the site resolution and a 3×3 head whose
/// first half is gated by a sigmoid (g) and second half is the shift (h).
struct ExtractorConfig {
  int width = 16;
};

ParameterSet init_extractor(const SynthConfig& cfg, const ExtractorConfig& ecfg, std::uint64_t seed, bool zero = false);

std::vector<FusionVars> fusion_extract_graph(const SynthConfig& cfg, const BoundParameters& extractor, ad::Var delta_hat);
std::vector<FusionParams> fusion_extract(const SynthConfig& cfg, const ParameterSet& extractor, const Tensor& delta_hat);

/// Versioned little-endian checkpoint: "WGCK", version, config block, then a
/// table of named tensors with f64 payloads. See docs/formats.md.
std::string save_checkpoint(const SynthConfig& cfg, GeneratorKind kind, const ParameterSet& params);
struct Checkpoint {
  SynthConfig cfg;
  GeneratorKind kind = GeneratorKind::wavelet;
  ParameterSet params;
};
Checkpoint load_checkpoint(std::string_view bytes);

}  // namespace wagi
