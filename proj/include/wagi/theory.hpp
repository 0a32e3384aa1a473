#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "wagi/tensor.hpp"

namespace wagi {

struct Theorem1Report {
  double l2 = 0.0;
  /// Σ over LL, LH, HL, HH of L_{2,f} with the raw (±1) bank.
  double subband_sum_raw = 0.0;
  /// (1/4) · Σ_f L_{2,f} with the orthonormal bank.
  double subband_sum_orthonormal_quarter = 0.0;
  /// subband_sum_raw / l2; NaN when l2 == 0.
  double ratio_raw = 0.0;
};

/// Evaluates both sides of the sub-band energy identity for one image pair.
Theorem1Report verify_theorem1(const Tensor& a, const Tensor& b);

/// E|p| for p ~ N(mu, sigma²): sigma·sqrt(2/pi)·exp(-mu²/2sigma²) + mu·erf(mu/sqrt(2 sigma²)).
double half_normal_mean(double mu, double sigma);

/// The same expectation by adaptive Simpson quadrature of |x|·N(x; mu, sigma²),
/// split at the kink. Independent of the closed form.
double half_normal_mean_quadrature(double mu, double sigma, double tolerance = 1e-13);

struct GaussianDiffSpec {
  double mu = 0.0;
  double sigma = 1.0;
  /// Number of 2×2 windows (one coefficient per band each) to draw.
  std::int64_t samples = 1'000'000;
  std::uint64_t seed = 0;
};

inline constexpr std::int64_t kMinLemmaSamples = 10'000;

struct LemmaReport {
  GaussianDiffSpec spec;
  int image_size = 0;
  std::int64_t images = 0;
  /// Windows actually drawn (samples rounded up to whole images).
  std::int64_t windows = 0;

  /// Mean-normalized L1 (mean |c| over pixels) and its standard error.
  double e_l1 = 0.0;
  double e_l1_stderr = 0.0;
  /// Mean |band| for LL, LH, HL, HH with the raw bank.
  std::array<double, 4> per_band_means{};
  std::array<double, 4> per_band_stderr{};

  double lhs_log_e_l1 = 0.0;
  double rhs_quarter_sum = 0.0;
  /// rhs - lhs under mean normalization (log 2 at mu = 0).
  double c_estimate = 0.0;
  /// Same constant with L1 carrying a 4/(m'n') window-sum prefactor (-log 8 at mu = 0).
  double c_estimate_printed = 0.0;
  /// Delta-method standard error of c_estimate (shared by both forms).
  double stderr = 0.0;

  /// Closed-form expectations for the same (mu, sigma).
  double expected_e_l1 = 0.0;
  std::array<double, 4> expected_band_means{};
  double expected_c = 0.0;
};

/// Monte Carlo over images whose pixel differences are i.i.d. N(mu, sigma²).
/// `size` is the (even) side of each drawn image.
LemmaReport lemma1_montecarlo(const GaussianDiffSpec& spec, int size = 64);

/// Closed-form constant (1/4)Σ_f log E[L_{1,f}] - log E[L1], mean-normalized.
/// Equals log 2 at mu = 0 and drifts with mu/sigma.
double lemma1_closed_form_c(double mu, double sigma);

enum class VerdictStatus { pass, fail, insufficient_samples };

std::string_view to_string(VerdictStatus s);

struct Verdict {
  std::string check;
  VerdictStatus status = VerdictStatus::pass;
  /// Worst observed value of the checked quantity and the bound it must meet.
  double observed = 0.0;
  double bound = 0.0;
  std::string detail;
};

struct VerifyOptions {
  std::int64_t samples = 1'000'000;
  std::uint64_t seed = 0;
  int theorem_pairs = 100;
};

/// The sub-band energy identity on random pairs, the half-normal closed form
/// against quadrature, and the sub-band Monte Carlo checks. Monte Carlo checks report
/// insufficient_samples instead of running when samples < kMinLemmaSamples.
std::vector<Verdict> verify_suite(const VerifyOptions& opts);

/// True unless some verdict failed.
bool verdicts_pass(const std::vector<Verdict>& v);

}  // namespace wagi
