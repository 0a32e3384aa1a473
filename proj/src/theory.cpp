#include "wagi/theory.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "wagi/errors.hpp"
#include "wagi/metrics.hpp"
#include "wagi/rng.hpp"
#include "wagi/wavelet.hpp"

namespace wagi {

Theorem1Report verify_theorem1(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "verify_theorem1");
  require_divisible(a.shape(), 1, "verify_theorem1");
  Theorem1Report r;
  r.l2 = pixel_loss(a, b, 2);
  double ortho = 0.0;
  for (Band f : kAllBands) {
    r.subband_sum_raw += subband_loss(a, b, f, 0, 2, ScaleMode::raw);
    ortho += subband_loss(a, b, f, 0, 2, ScaleMode::orthonormal);
  }
  r.subband_sum_orthonormal_quarter = 0.25 * ortho;
  r.ratio_raw = r.l2 > 0.0 ? r.subband_sum_raw / r.l2 : std::numeric_limits<double>::quiet_NaN();
  return r;
}

double half_normal_mean(double mu, double sigma) {
  if (!(sigma > 0.0)) throw ArgumentError("half_normal_mean: sigma must be positive");
  const double z = mu / sigma;
  return sigma * std::sqrt(2.0 / std::numbers::pi) * std::exp(-0.5 * z * z) + mu * std::erf(mu / (std::sqrt(2.0) * sigma));
}

namespace {

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <typename F>
double adaptive_simpson(F& f, double a, double b, double fa, double fm, double fb, double whole, double tol,
                        int depth) {
  const double m = 0.5 * (a + b);
  const double lm = f(0.5 * (a + m));
  const double rm = f(0.5 * (m + b));
  const double left = simpson(a, m, fa, lm, fm);
  const double right = simpson(m, b, fm, rm, fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, lm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, rm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
double integrate(F f, double a, double b, double tol) {
  if (b <= a) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  return adaptive_simpson(f, a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, 48);
}

}  // namespace

double half_normal_mean_quadrature(double mu, double sigma, double tolerance) {
  if (!(sigma > 0.0)) throw ArgumentError("half_normal_mean_quadrature: sigma must be positive");
  const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
  auto density = [&](double x) {
    const double z = (x - mu) / sigma;
    return std::abs(x) * norm * std::exp(-0.5 * z * z);
  };
  // Mass beyond 14 sigma is below 1e-40.
  const double lo = mu - 14.0 * sigma;
  const double hi = mu + 14.0 * sigma;
  if (hi <= 0.0 || lo >= 0.0) return integrate(density, lo, hi, tolerance);
  return integrate(density, lo, 0.0, tolerance) + integrate(density, 0.0, hi, tolerance);
}

double lemma1_closed_form_c(double mu, double sigma) {
  const double e_l1 = half_normal_mean(mu, sigma);
  const double e_ll = half_normal_mean(4.0 * mu, 2.0 * sigma);
  const double e_high = half_normal_mean(0.0, 2.0 * sigma);
  return 0.25 * (std::log(e_ll) + 3.0 * std::log(e_high)) - std::log(e_l1);
}

LemmaReport lemma1_montecarlo(const GaussianDiffSpec& spec, int size) {
  if (!(spec.sigma > 0.0)) throw ArgumentError("lemma1_montecarlo: sigma must be positive");
  if (spec.samples < kMinLemmaSamples) {
    throw ArgumentError("lemma1_montecarlo: insufficient samples (" + std::to_string(spec.samples) + " < " +
                        std::to_string(kMinLemmaSamples) + ")");
  }
  if (size < 2 || size % 2 != 0) throw DimensionError("lemma1_montecarlo: image size " + std::to_string(size) + " is odd");

  const std::int64_t per_image = static_cast<std::int64_t>(size / 2) * (size / 2);
  const std::int64_t images = (spec.samples + per_image - 1) / per_image;

  // Running first and second moments of v = (window mean |c|, |LL|, |LH|, |HL|, |HH|).
  constexpr int kVars = 5;
  std::array<double, kVars> sum{};
  std::array<std::array<double, kVars>, kVars> cross{};

  const CounterRng root(spec.seed);
  for (std::int64_t img = 0; img < images; ++img) {
    CounterRng rng = root.split(static_cast<std::uint64_t>(img));
    for (std::int64_t w = 0; w < per_image; ++w) {
      // Window order (2i,2j), (2i,2j+1), (2i+1,2j), (2i+1,2j+1).
      const double a = spec.mu + spec.sigma * rng.normal();
      const double b = spec.mu + spec.sigma * rng.normal();
      const double c = spec.mu + spec.sigma * rng.normal();
      const double d = spec.mu + spec.sigma * rng.normal();
      const std::array<double, kVars> v{
          0.25 * (std::abs(a) + std::abs(b) + std::abs(c) + std::abs(d)),
          std::abs(a + b + c + d),
          std::abs(a + b - c - d),
          std::abs(a - b + c - d),
          std::abs(a - b - c + d),
      };
      for (int i = 0; i < kVars; ++i) {
        sum[i] += v[i];
        for (int j = i; j < kVars; ++j) cross[i][j] += v[i] * v[j];
      }
    }
  }

  const double n = static_cast<double>(images * per_image);
  std::array<double, kVars> mean{};
  for (int i = 0; i < kVars; ++i) mean[i] = sum[i] / n;
  std::array<std::array<double, kVars>, kVars> cov{};
  for (int i = 0; i < kVars; ++i) {
    for (int j = i; j < kVars; ++j) {
      cov[i][j] = cov[j][i] = (cross[i][j] - n * mean[i] * mean[j]) / (n - 1.0);
    }
  }

  LemmaReport r;
  r.spec = spec;
  r.image_size = size;
  r.images = images;
  r.windows = images * per_image;
  r.e_l1 = mean[0];
  r.e_l1_stderr = std::sqrt(cov[0][0] / n);
  for (int f = 0; f < 4; ++f) {
    r.per_band_means[f] = mean[f + 1];
    r.per_band_stderr[f] = std::sqrt(cov[f + 1][f + 1] / n);
  }
  r.lhs_log_e_l1 = std::log(r.e_l1);
  r.rhs_quarter_sum = 0.0;
  for (int f = 0; f < 4; ++f) r.rhs_quarter_sum += 0.25 * std::log(r.per_band_means[f]);
  r.c_estimate = r.rhs_quarter_sum - r.lhs_log_e_l1;
  // With a 4/(m'n') prefactor on L1 the loss is 16 × the pixel mean.
  r.c_estimate_printed = r.c_estimate - std::log(16.0);

  // Gradient of C with respect to the five means.
  std::array<double, kVars> g{-1.0 / mean[0]};
  for (int f = 1; f < kVars; ++f) g[f] = 0.25 / mean[f];
  double var_c = 0.0;
  for (int i = 0; i < kVars; ++i) {
    for (int j = 0; j < kVars; ++j) var_c += g[i] * cov[i][j] * g[j];
  }
  r.stderr = std::sqrt(var_c / n);

  r.expected_e_l1 = half_normal_mean(spec.mu, spec.sigma);
  r.expected_band_means = {half_normal_mean(4.0 * spec.mu, 2.0 * spec.sigma), half_normal_mean(0.0, 2.0 * spec.sigma),
                           half_normal_mean(0.0, 2.0 * spec.sigma), half_normal_mean(0.0, 2.0 * spec.sigma)};
  r.expected_c = lemma1_closed_form_c(spec.mu, spec.sigma);
  return r;
}

}  // namespace wagi

namespace wagi {

std::string_view to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::pass:
      return "pass";
    case VerdictStatus::fail:
      return "fail";
    case VerdictStatus::insufficient_samples:
      return "insufficient samples";
  }
  return "?";
}

namespace {

Verdict bounded(std::string check, double observed, double bound, std::string detail = {}) {
  Verdict v{std::move(check), observed <= bound ? VerdictStatus::pass : VerdictStatus::fail, observed, bound,
            std::move(detail)};
  if (std::isnan(observed)) v.status = VerdictStatus::fail;
  return v;
}

}  // namespace

std::vector<Verdict> verify_suite(const VerifyOptions& opts) {
  std::vector<Verdict> out;

  // Sub-band energy identity on random even-sized pairs.
  double worst_raw = 0.0;
  double worst_ortho = 0.0;
  const CounterRng root(opts.seed, 0x7e01);
  for (int i = 0; i < opts.theorem_pairs; ++i) {
    CounterRng rng = root.split(static_cast<std::uint64_t>(i));
    const int c = rng.uniform_int(1, 3);
    const int h = 2 * rng.uniform_int(1, 32);
    const int w = 2 * rng.uniform_int(1, 32);
    const Tensor a = uniform_tensor(Shape{c, h, w}, rng, -1.0, 1.0);
    const Tensor b = uniform_tensor(Shape{c, h, w}, rng, -1.0, 1.0);
    const Theorem1Report r = verify_theorem1(a, b);
    worst_raw = std::max(worst_raw, std::abs(r.ratio_raw - 16.0) / 16.0);
    worst_ortho = std::max(worst_ortho, std::abs(r.subband_sum_orthonormal_quarter - r.l2) / r.l2);
  }
  const std::string pairs = std::to_string(opts.theorem_pairs) + " random pairs";
  out.push_back(bounded("theorem1.ratio_raw", worst_raw, 1e-9, "max |ratio/16 - 1| over " + pairs));
  out.push_back(bounded("theorem1.orthonormal_quarter_sum", worst_ortho, 1e-9, "max rel err vs L2 over " + pairs));

  // Closed form against quadrature over mu/sigma in [-5, 5].
  double worst_hn = 0.0;
  for (double sigma : {0.25, 1.0, 3.0}) {
    for (int k = -50; k <= 50; ++k) {
      const double mu = 0.1 * k * sigma;
      worst_hn = std::max(worst_hn, std::abs(half_normal_mean(mu, sigma) - half_normal_mean_quadrature(mu, sigma)));
    }
  }
  out.push_back(bounded("half_normal.closed_form_vs_quadrature", worst_hn, 1e-8, "303 points, mu/sigma in [-5, 5]"));

  if (opts.samples < kMinLemmaSamples) {
    const std::string why = "needs at least " + std::to_string(kMinLemmaSamples) + " samples, got " + std::to_string(opts.samples);
    for (const char* name : {"lemma1.band_means", "lemma1.c_sigma_invariance"}) {
      out.push_back({name, VerdictStatus::insufficient_samples, 0.0, 0.0, why});
    }
    return out;
  }

  // Per-band means at mu = 0, sigma = 1 against the half-normal closed forms, in standard errors.
  GaussianDiffSpec spec;
  spec.samples = opts.samples;
  spec.seed = opts.seed;
  const LemmaReport unit = lemma1_montecarlo(spec);
  double worst_z = std::abs(unit.e_l1 - unit.expected_e_l1) / unit.e_l1_stderr;
  for (int f = 0; f < 4; ++f) {
    worst_z = std::max(worst_z, std::abs(unit.per_band_means[f] - unit.expected_band_means[f]) / unit.per_band_stderr[f]);
  }
  out.push_back(bounded("lemma1.band_means", worst_z, 4.0, "max |estimate - closed form| / stderr, mu=0 sigma=1"));

  // C is sigma-independent at mu = 0.
  spec.sigma = 0.5;
  const LemmaReport lo = lemma1_montecarlo(spec);
  spec.sigma = 2.0;
  spec.seed = mix64(opts.seed ^ 0x5157);
  const LemmaReport hi = lemma1_montecarlo(spec);
  const double z = std::abs(lo.c_estimate - hi.c_estimate) / std::hypot(lo.stderr, hi.stderr);
  out.push_back(bounded("lemma1.c_sigma_invariance", z, 4.0,
                        "C(0.5)=" + std::to_string(lo.c_estimate) + " C(2.0)=" + std::to_string(hi.c_estimate) +
                            " log2=" + std::to_string(std::log(2.0))));
  return out;
}

bool verdicts_pass(const std::vector<Verdict>& v) {
  for (const Verdict& x : v) {
    if (x.status == VerdictStatus::fail) return false;
  }
  return true;
}

}  // namespace wagi
