#include "wagi/metrics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "wagi/errors.hpp"

namespace wagi {

namespace {

void require_p(int p) {
  if (p != 1 && p != 2) throw ArgumentError("loss exponent p must be 1 or 2, got " + std::to_string(p));
}

}  // namespace

double pixel_loss(const Tensor& a, const Tensor& b, int p) {
  require_p(p);
  require_same_shape(a, b, "pixel_loss");
  if (a.size() == 0) throw ShapeError("pixel_loss: empty tensors");
  double acc = 0.0;
  if (p == 1) {
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  } else {
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = a[i] - b[i];
      acc += d * d;
    }
  }
  return acc / static_cast<double>(a.size());
}

double subband_loss(const Tensor& a, const Tensor& b, Band filter, int level, int p, ScaleMode mode) {
  require_p(p);
  require_same_shape(a, b, "subband_loss");
  if (level < 0) throw ArgumentError("subband_loss: negative level");
  require_divisible(a.shape(), level + 1, "subband_loss");
  const FilterBank bank = FilterBank::for_mode(mode);
  const BandQuad qa = haar_forward(low_pass(a, level, bank), bank);
  const BandQuad qb = haar_forward(low_pass(b, level, bank), bank);
  return pixel_loss(qa.band(filter), qb.band(filter), p);
}

double wavelet_loss(const Tensor& a, const Tensor& b, ScaleMode mode) { return wavelet_loss_k(a, b, 0, mode); }

double wavelet_loss_k(const Tensor& a, const Tensor& b, int K, ScaleMode mode) {
  require_same_shape(a, b, "wavelet_loss_k");
  if (K < 0) throw ArgumentError("wavelet_loss_k: K must be >= 0");
  require_divisible(a.shape(), K + 1, "wavelet_loss_k");
  const FilterBank bank = FilterBank::for_mode(mode);
  Tensor la = a;
  Tensor lb = b;
  double total = 0.0;
  for (int i = 0; i <= K; ++i) {
    BandQuad qa = haar_forward(la, bank);
    BandQuad qb = haar_forward(lb, bank);
    for (Band f : kHighBands) total += pixel_loss(qa.band(f), qb.band(f), 2);
    la = std::move(qa.ll);
    lb = std::move(qb.ll);
  }
  return total;
}

void LossWeights::validate() const {
  for (double v : {lambda_l2, lambda_lpips, lambda_id, lambda_wave, lambda_wave_ada}) {
    if (!std::isfinite(v) || v < 0.0) throw ArgumentError("loss weights must be finite and nonnegative");
  }
  if (K < 0) throw ArgumentError("wavelet level K must be >= 0");
}

double ada_loss(const Tensor& delta, const Tensor& delta_hat, const LossWeights& w, ScaleMode mode) {
  w.validate();
  const double l1 = pixel_loss(delta, delta_hat, 1);
  if (w.lambda_wave_ada == 0.0) return l1;
  return l1 + w.lambda_wave_ada * wavelet_loss_k(delta, delta_hat, w.K, mode);
}

double image_loss(const Tensor& x, const Tensor& x_hat, const LossWeights& w, const MetricSlot& perceptual,
                  const MetricSlot& identity) {
  w.validate();
  double total = w.lambda_l2 * pixel_loss(x, x_hat, 2);
  if (perceptual) total += w.lambda_lpips * perceptual(x, x_hat);
  if (identity) total += w.lambda_id * identity(x, x_hat);
  return total;
}

SsimResult ssim_checked(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "ssim");
  const int h = a.height();
  const int w = a.width();
  if (h < kSsimWindow || w < kSsimWindow) {
    throw DimensionError("ssim: image " + a.shape().str() + " is smaller than the 8x8 window");
  }
  SsimResult result;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < 0.0 || a[i] > 1.0 || b[i] < 0.0 || b[i] > 1.0) {
      result.out_of_range = true;
      break;
    }
  }

  // Summed-area tables of x, y, x², y², xy make every window O(1).
  const int sw = w + 1;
  const std::size_t table = static_cast<std::size_t>(h + 1) * static_cast<std::size_t>(sw);
  std::vector<double> sx(table), sy(table), sxx(table), syy(table), sxy(table);
  const double n = kSsimWindow * kSsimWindow;
  double total = 0.0;
  for (int ch = 0; ch < a.channels(); ++ch) {
    for (int y = 0; y < h; ++y) {
      double rx = 0, ry = 0, rxx = 0, ryy = 0, rxy = 0;
      for (int x = 0; x < w; ++x) {
        const double va = a(ch, y, x);
        const double vb = b(ch, y, x);
        rx += va;
        ry += vb;
        rxx += va * va;
        ryy += vb * vb;
        rxy += va * vb;
        const std::size_t k = static_cast<std::size_t>(y + 1) * sw + (x + 1);
        const std::size_t up = static_cast<std::size_t>(y) * sw + (x + 1);
        sx[k] = sx[up] + rx;
        sy[k] = sy[up] + ry;
        sxx[k] = sxx[up] + rxx;
        syy[k] = syy[up] + ryy;
        sxy[k] = sxy[up] + rxy;
      }
    }
    auto box = [&](const std::vector<double>& t, int y0, int x0) {
      const int y1 = y0 + kSsimWindow;
      const int x1 = x0 + kSsimWindow;
      return t[static_cast<std::size_t>(y1) * sw + x1] - t[static_cast<std::size_t>(y0) * sw + x1] -
             t[static_cast<std::size_t>(y1) * sw + x0] + t[static_cast<std::size_t>(y0) * sw + x0];
    };
    double acc = 0.0;
    for (int y = 0; y + kSsimWindow <= h; ++y) {
      for (int x = 0; x + kSsimWindow <= w; ++x) {
        const double mx = box(sx, y, x) / n;
        const double my = box(sy, y, x) / n;
        const double vx = box(sxx, y, x) / n - mx * mx;
        const double vy = box(syy, y, x) / n - my * my;
        const double cxy = box(sxy, y, x) / n - mx * my;
        acc += ((2.0 * mx * my + kSsimC1) * (2.0 * cxy + kSsimC2)) /
               ((mx * mx + my * my + kSsimC1) * (vx + vy + kSsimC2));
      }
    }
    total += acc / static_cast<double>((h - kSsimWindow + 1) * (w - kSsimWindow + 1));
  }
  result.value = total / a.channels();
  return result;
}

double ssim(const Tensor& a, const Tensor& b) { return ssim_checked(a, b).value; }

double LossReport::subband(Band filter, int level, int p) const {
  for (const SubbandLoss& s : subbands) {
    if (s.filter == filter && s.level == level && s.p == p) return s.value;
  }
  throw ArgumentError("report has no entry for " + std::string(to_string(filter)) + " level " +
                      std::to_string(level) + " p=" + std::to_string(p));
}

LossReport corpus_report(std::span<const ImagePair> pairs, int K, ScaleMode mode) {
  if (pairs.empty()) throw ArgumentError("corpus_report: empty pair sequence");
  if (K < 0) throw ArgumentError("corpus_report: K must be >= 0");
  const FilterBank bank = FilterBank::for_mode(mode);

  LossReport report;
  report.K = K;
  report.scale_mode = mode;
  report.pair_count = pairs.size();
  for (int level = 0; level <= K; ++level) {
    for (Band f : kAllBands) {
      for (int p : {1, 2}) report.subbands.push_back(SubbandLoss{f, level, p, 0.0, mode});
    }
  }

  // Sequential accumulation in input order keeps the reduction deterministic.
  for (std::size_t idx = 0; idx < pairs.size(); ++idx) {
    const Tensor& a = pairs[idx].first;
    const Tensor& b = pairs[idx].second;
    require_same_shape(a, b, "corpus_report");
    require_divisible(a.shape(), K + 1, "corpus_report");
    report.l1 += pixel_loss(a, b, 1);
    report.l2 += pixel_loss(a, b, 2);
    const SsimResult s = ssim_checked(a, b);
    if (s.out_of_range) report.warnings.push_back("pair " + std::to_string(idx) + ": values outside [0,1] in SSIM");
    report.ssim += s.value;

    Tensor la = a;
    Tensor lb = b;
    std::size_t slot = 0;
    for (int level = 0; level <= K; ++level) {
      BandQuad qa = haar_forward(la, bank);
      BandQuad qb = haar_forward(lb, bank);
      for (Band f : kAllBands) {
        for (int p : {1, 2}) {
          const double v = pixel_loss(qa.band(f), qb.band(f), p);
          report.subbands[slot++].value += v;
          if (p == 2 && f != Band::LL) report.wavelet_k += v;
        }
      }
      la = std::move(qa.ll);
      lb = std::move(qb.ll);
    }
  }

  const double n = static_cast<double>(pairs.size());
  report.l1 /= n;
  report.l2 /= n;
  report.ssim /= n;
  report.wavelet_k /= n;
  for (SubbandLoss& s : report.subbands) s.value /= n;
  return report;
}

namespace {

double safe_log10(double v) {
  return v > 0.0 ? std::log10(v) : -std::numeric_limits<double>::infinity();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string report_to_csv(const LossReport& report, const std::string& header) {
  std::ostringstream os;
  if (!header.empty()) os << "# " << header << "\n";
  os << "# pairs=" << report.pair_count << " K=" << report.K << " mode=" << to_string(report.scale_mode)
     << " l1=" << fmt(report.l1) << " l2=" << fmt(report.l2) << " ssim=" << fmt(report.ssim)
     << " wavelet_k=" << fmt(report.wavelet_k) << "\n";
  for (const std::string& w : report.warnings) os << "# warning: " << w << "\n";
  os << "filter,level,p,value,log10_value\n";
  for (const SubbandLoss& s : report.subbands) {
    os << to_string(s.filter) << "," << s.level << "," << s.p << "," << fmt(s.value) << "," << fmt(safe_log10(s.value))
       << "\n";
  }
  return os.str();
}

std::string report_to_json(const LossReport& report, const std::string& header) {
  nlohmann::json j;
  if (!header.empty()) j["header"] = header;
  j["pair_count"] = report.pair_count;
  j["K"] = report.K;
  j["scale_mode"] = std::string(to_string(report.scale_mode));
  j["aggregate"] = {{"l1", report.l1}, {"l2", report.l2}, {"ssim", report.ssim}, {"wavelet_k", report.wavelet_k}};
  nlohmann::json rows = nlohmann::json::array();
  for (const SubbandLoss& s : report.subbands) {
    nlohmann::json row = {{"filter", std::string(to_string(s.filter))}, {"level", s.level}, {"p", s.p},
                          {"value", s.value}};
    // JSON has no -inf; zero losses carry a null log value.
    row["log10_value"] = s.value > 0.0 ? nlohmann::json(std::log10(s.value)) : nlohmann::json(nullptr);
    rows.push_back(std::move(row));
  }
  j["subbands"] = std::move(rows);
  j["warnings"] = report.warnings;
  return j.dump(2) + "\n";
}

}  // namespace wagi
