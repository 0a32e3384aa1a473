#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wagi/autodiff.hpp"
#include "wagi/metrics.hpp"
#include "wagi/optim.hpp"
#include "wagi/spectrum.hpp"
#include "wagi/synthesis.hpp"
#include "wagi/tensor.hpp"

namespace wagi {

// ---------------------------------------------------------------------------
// latent regression

struct LossTerm {
  enum class Kind { l2, wavelet, spectral };
  Kind kind = Kind::l2;
  /// Levels for wavelet terms.
  int K = 0;
  double weight = 1.0;

  std::string name() const;
};

/// Parses "l2,wavelet:2,spectral:0.1" (wavelet takes K, spectral its weight).
std::vector<LossTerm> parse_loss_terms(std::string_view spec);

struct RegressionJob {
  Tensor target;
  GeneratorKind generator = GeneratorKind::wavelet;
  std::vector<LossTerm> loss_terms{LossTerm{}};
  int steps = 2000;
  double lr = 0.05;
  /// Seeds the generator weights.
  std::uint64_t seed = 0;
  SynthConfig synth = SynthConfig::for_resolution(64, 32);
  /// Also update the generator weights (lr scaled by generator_lr_scale).
  bool train_generator = false;
  double generator_lr_scale = 0.1;
  /// Starting point; zero latents when empty.
  LatentStack init_latents;

  void validate() const;
};

struct RegressionResult {
  LatentStack latents;
  Tensor initial_image;
  Tensor final_image;
  /// Column names of `trace`: step, one per loss term, total.
  std::vector<std::string> columns;
  /// One row per step, evaluated before that step's update.
  std::vector<std::vector<double>> trace;
  ReducedSpectrum target_spectrum;
  ReducedSpectrum result_spectrum;
  double final_l2 = 0.0;
  double final_spectral_distance = 0.0;
};

/// Adam over the latent stack of a generator frozen at init_generator(seed).
RegressionResult latent_optimize(const RegressionJob& job);

std::string trace_to_csv(const RegressionResult& r, const std::string& header = {});

/// Best-so-far envelope of a loss trace.
std::vector<double> best_so_far(std::span<const double> values);

/// Steps t at which the envelope has not converged (best > tolerance) yet
/// fails to drop by `rel` over the next `window` steps.
std::vector<int> envelope_violations(std::span<const double> values, int window = 500, double rel = 0.01,
                                     double tolerance = 1e-4);

// ---------------------------------------------------------------------------
// distortion

struct DistortionSpec {
  double max_translate_frac = 0.05;
  double max_rotate_deg = 5.0;
  double scale_min = 0.95;
  double scale_max = 1.05;
  int erase_patches = 1;
  /// Patch sides are drawn from [1, max_erase_frac · side].
  double max_erase_frac = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
  static DistortionSpec identity();
};

/// Similarity warp about the image centre with bilinear sampling and
/// reflected borders: output(p) = input(c + R(-angle)(p - c - t) / scale).
Tensor warp_similarity(const Tensor& img, double dx, double dy, double angle_deg, double scale);

Tensor random_distort(const Tensor& delta, const DistortionSpec& spec);

// ---------------------------------------------------------------------------
// alignment module

/// Three 3×3 convolutions with leaky ReLU between them on concat(X̂₀, Δ̃);
/// the last layer's output is Δ̂ directly.
struct AdaModel {
  ParameterSet params;
  int image_channels = 3;
  int width = 16;
};

AdaModel init_ada(int image_channels, int width, std::uint64_t seed);
ad::Var ada_forward(const BoundParameters& params, ad::Var x_hat0, ad::Var delta_tilde);
Tensor ada_apply(const AdaModel& model, const Tensor& x_hat0, const Tensor& delta_tilde);

struct AdaPair {
  Tensor x_hat0;
  Tensor delta;
};

struct AdaTrainConfig {
  int epochs = 30;
  double lr = 2e-3;
  std::uint64_t seed = 0;
  int width = 16;
  /// The last `holdout` pairs are held out for evaluation.
  int holdout = 4;
  /// Cosine decay of the learning rate from lr to 0 over all steps.
  bool cosine = true;
};

struct AdaMetrics {
  double heldout_l1 = 0.0;
  double heldout_wave = 0.0;
  /// Same metrics for the distorted input itself (Δ̂ = Δ̃).
  double baseline_l1 = 0.0;
  double baseline_wave = 0.0;
  std::vector<double> epoch_loss;
};

struct AdaResult {
  AdaModel model;
  AdaMetrics metrics;
};

/// Minimises L1(Δ, Δ̂) + lambda_wave_ada · L^K_wave(Δ, Δ̂) with Adam, one pair
/// per step and a fresh distortion per draw.
AdaResult ada_train(std::span<const AdaPair> dataset, const DistortionSpec& spec, const LossWeights& weights,
                    const AdaTrainConfig& cfg);

/// Held-out evaluation with one fixed distortion per pair (seeded by spec.seed).
AdaMetrics ada_evaluate(const AdaModel& model, std::span<const AdaPair> pairs, const DistortionSpec& spec,
                        const LossWeights& weights);

/// Synthetic pairs: X̂₀ = blur(X) for procedural textures X, Δ = X - X̂₀.
std::vector<AdaPair> synthetic_ada_pairs(int count, int size, std::uint64_t seed, double blur_sigma = 1.5);

// ---------------------------------------------------------------------------
// fusion pipeline

struct FusionOptions {
  bool feature = true;
  bool wavelet = true;
  /// Replace extracted maps by g = 1, h = 0.
  bool force_identity = false;
};

struct FusionModels {
  SynthConfig cfg;
  ParameterSet generator;
  AdaModel ada;
  ParameterSet extractor;
};

/// L_total = L_ADA + L_Image + lambda_wave · L^K_wave and its parts.
struct FusionReport {
  Tensor x_hat0;
  Tensor delta;
  Tensor delta_tilde;
  Tensor delta_hat;
  Tensor x_hat;

  double l_ada_l1 = 0.0;
  double l_ada_wave = 0.0;
  /// l_ada_l1 + lambda_wave_ada · l_ada_wave.
  double l_ada = 0.0;
  /// lambda_l2 · L2(X, X̂) (perceptual and identity slots unbound).
  double l_image = 0.0;
  double l_wave = 0.0;
  /// lambda_wave · l_wave.
  double wave_term = 0.0;
  double total = 0.0;

  double l2 = 0.0;
  double ssim = 0.0;
};

FusionReport invert_with_fusion(const Tensor& target, const LatentStack& base, const FusionModels& models,
                                const DistortionSpec& spec, const LossWeights& weights, const FusionOptions& opts = {});

struct FuseSample {
  Tensor target;
  LatentStack latents;
};

struct FuseTrainConfig {
  int epochs = 10;
  double lr = 2e-3;
  std::uint64_t seed = 0;
  ExtractorConfig extractor;
  int ada_width = 16;
  bool cosine = true;
  FusionOptions fusion;
};

struct FuseTrainResult {
  AdaModel ada;
  ParameterSet extractor;
  std::vector<double> epoch_loss;
};

/// Trains ADA and the extractor together with one Adam optimizer on
/// L_total, generator frozen.
FuseTrainResult fuse_train(const SynthConfig& cfg, const ParameterSet& generator, std::span<const FuseSample> samples,
                           const DistortionSpec& spec, const LossWeights& weights, const FuseTrainConfig& tcfg);

/// Targets G(w_i) plus the high-pass detail of procedural textures.
std::vector<FuseSample> synthetic_fuse_samples(const SynthConfig& cfg, const ParameterSet& generator, int count,
                                               std::uint64_t seed, double detail_gain = 1.0);

}  // namespace wagi
