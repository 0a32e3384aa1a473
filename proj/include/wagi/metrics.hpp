#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wagi/tensor.hpp"
#include "wagi/wavelet.hpp"

namespace wagi {

/// Mean of |a - b|^p over all entries, p ∈ {1, 2}.
double pixel_loss(const Tensor& a, const Tensor& b, int p);

/// pixel_loss between band `filter` of level `level` of both inputs' pyramids.
/// Level 0 is the first analysis step; the LL band at level i is LL^(i+1).
double subband_loss(const Tensor& a, const Tensor& b, Band filter, int level, int p,
                    ScaleMode mode = ScaleMode::orthonormal);

/// Sum of level-0 high-band L2 losses.
double wavelet_loss(const Tensor& a, const Tensor& b, ScaleMode mode = ScaleMode::orthonormal);

/// High-band L2 losses summed over levels 0..K (K + 1 analysis steps).
double wavelet_loss_k(const Tensor& a, const Tensor& b, int K, ScaleMode mode = ScaleMode::orthonormal);

struct LossWeights {
  double lambda_l2 = 1.0;
  double lambda_lpips = 0.8;
  double lambda_id = 0.1;
  /// Weight of the K-level wavelet loss on the final image. No published
  /// value; 0.1 mirrors lambda_wave_ada.
  double lambda_wave = 0.1;
  double lambda_wave_ada = 0.1;
  int K = 2;

  void validate() const;
};

/// L1(delta, delta_hat) + lambda_wave_ada · L^K_wave(delta, delta_hat).
double ada_loss(const Tensor& delta, const Tensor& delta_hat, const LossWeights& w,
                ScaleMode mode = ScaleMode::orthonormal);

/// Externally supplied image metric (perceptual, identity, ...).
using MetricSlot = std::function<double(const Tensor&, const Tensor&)>;

/// lambda_l2 · L2 + lambda_lpips · perceptual + lambda_id · identity, where
/// an unbound slot contributes 0.
double image_loss(const Tensor& x, const Tensor& x_hat, const LossWeights& w, const MetricSlot& perceptual = {},
                  const MetricSlot& identity = {});

struct SsimResult {
  double value = 0.0;
  /// Some input entry lies outside [0, 1].
  bool out_of_range = false;
};

inline constexpr int kSsimWindow = 8;
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

/// Mean SSIM over all 8×8 windows (stride 1, uniform weights), averaged over
/// channels. Requires H, W >= 8.
SsimResult ssim_checked(const Tensor& a, const Tensor& b);
double ssim(const Tensor& a, const Tensor& b);

struct SubbandLoss {
  Band filter = Band::LL;
  int level = 0;
  int p = 2;
  double value = 0.0;
  ScaleMode scale_mode = ScaleMode::orthonormal;
};

struct LossReport {
  double l1 = 0.0;
  double l2 = 0.0;
  double ssim = 0.0;
  /// L^K_wave with K = `K`.
  double wavelet_k = 0.0;
  int K = 0;
  ScaleMode scale_mode = ScaleMode::orthonormal;
  /// Every (filter, level, p) for levels 0..K, filters LL/LH/HL/HH, p = 1, 2.
  std::vector<SubbandLoss> subbands;
  std::size_t pair_count = 0;
  std::vector<std::string> warnings;

  /// Returns the entry for (filter, level, p); throws if absent.
  double subband(Band filter, int level, int p) const;
};

using ImagePair = std::pair<Tensor, Tensor>;

/// Per-pair metrics averaged over the corpus in input order.
LossReport corpus_report(std::span<const ImagePair> pairs, int K, ScaleMode mode = ScaleMode::orthonormal);

/// One row per (filter, level, p): filter,level,p,value,log10_value. Leading
/// '#' lines carry `header` and the aggregates.
std::string report_to_csv(const LossReport& report, const std::string& header = {});
std::string report_to_json(const LossReport& report, const std::string& header = {});

}  // namespace wagi
