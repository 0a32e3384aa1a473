#include "wagi/wavelet.hpp"

#include <cmath>
#include <string>

#include "wagi/errors.hpp"

namespace wagi {

std::string_view to_string(Band b) {
  switch (b) {
    case Band::LL: return "LL";
    case Band::LH: return "LH";
    case Band::HL: return "HL";
    case Band::HH: return "HH";
  }
  return "?";
}

std::string_view to_string(ScaleMode m) { return m == ScaleMode::raw ? "raw" : "orthonormal"; }

Band parse_band(std::string_view s) {
  for (Band b : kAllBands) {
    if (s == to_string(b)) return b;
  }
  throw ArgumentError("unknown band '" + std::string(s) + "'");
}

ScaleMode parse_scale_mode(std::string_view s) {
  if (s == "raw") return ScaleMode::raw;
  if (s == "orthonormal") return ScaleMode::orthonormal;
  throw ArgumentError("unknown scale mode '" + std::string(s) + "' (expected raw|orthonormal)");
}

FilterBank::FilterBank(double scale) : scale_(scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ArgumentError("filter bank scale must be positive and finite");
}

Kernel2x2 FilterBank::kernel(Band b) const {
  Kernel2x2 k{};
  for (int dy = 0; dy < 2; ++dy) {
    for (int dx = 0; dx < 2; ++dx) k[dy][dx] = tap(b, 1 - dy, 1 - dx);
  }
  return k;
}

ScaleMode FilterBank::mode() const {
  if (scale_ == 1.0) return ScaleMode::raw;
  if (scale_ == 0.5) return ScaleMode::orthonormal;
  throw ArgumentError("filter bank scale " + std::to_string(scale_) + " is neither raw nor orthonormal");
}

const Tensor& BandQuad::band(Band b) const {
  switch (b) {
    case Band::LL: return ll;
    case Band::LH: return lh;
    case Band::HL: return hl;
    case Band::HH: return hh;
  }
  return ll;
}

Tensor& BandQuad::band(Band b) { return const_cast<Tensor&>(std::as_const(*this).band(b)); }

const Tensor& BandTriple::band(Band b) const {
  switch (b) {
    case Band::LH: return lh;
    case Band::HL: return hl;
    case Band::HH: return hh;
    case Band::LL: break;
  }
  throw ArgumentError("BandTriple holds no LL band");
}

void require_divisible(const Shape& s, int levels, const char* what) {
  const int factor = 1 << levels;
  if (s.h < factor || s.h % factor != 0) {
    throw DimensionError(std::string(what) + ": height " + std::to_string(s.h) + " is not divisible by " +
                         std::to_string(factor));
  }
  if (s.w < factor || s.w % factor != 0) {
    throw DimensionError(std::string(what) + ": width " + std::to_string(s.w) + " is not divisible by " +
                         std::to_string(factor));
  }
}

BandQuad haar_forward(const Tensor& img, const FilterBank& bank) {
  require_divisible(img.shape(), 1, "haar_forward");
  const int c = img.channels();
  const int h2 = img.height() / 2;
  const int w2 = img.width() / 2;
  const double s = bank.scale();
  BandQuad q{Tensor(c, h2, w2), Tensor(c, h2, w2), Tensor(c, h2, w2), Tensor(c, h2, w2)};
  for (int ch = 0; ch < c; ++ch) {
    for (int i = 0; i < h2; ++i) {
      for (int j = 0; j < w2; ++j) {
        const double a = img(ch, 2 * i, 2 * j);
        const double b = img(ch, 2 * i, 2 * j + 1);
        const double cc = img(ch, 2 * i + 1, 2 * j);
        const double d = img(ch, 2 * i + 1, 2 * j + 1);
        q.ll(ch, i, j) = s * (a + b + cc + d);
        q.lh(ch, i, j) = s * (a + b - cc - d);
        q.hl(ch, i, j) = s * (a - b + cc - d);
        q.hh(ch, i, j) = s * (a - b - cc + d);
      }
    }
  }
  return q;
}

Tensor haar_inverse(const BandQuad& bands, const FilterBank& bank) {
  const Shape s = bands.ll.shape();
  if (bands.lh.shape() != s || bands.hl.shape() != s || bands.hh.shape() != s) {
    throw ShapeError("haar_inverse: band shapes differ (ll " + s.str() + ", lh " + bands.lh.shape().str() + ", hl " +
                     bands.hl.shape().str() + ", hh " + bands.hh.shape().str() + ")");
  }
  // The raw analysis matrix H satisfies H^T H = 4 I, so the inverse of s·H is H^T / (4 s).
  const double k = 1.0 / (4.0 * bank.scale());
  Tensor out(s.c, 2 * s.h, 2 * s.w);
  for (int ch = 0; ch < s.c; ++ch) {
    for (int i = 0; i < s.h; ++i) {
      for (int j = 0; j < s.w; ++j) {
        const double ll = bands.ll(ch, i, j);
        const double lh = bands.lh(ch, i, j);
        const double hl = bands.hl(ch, i, j);
        const double hh = bands.hh(ch, i, j);
        out(ch, 2 * i, 2 * j) = k * (ll + lh + hl + hh);
        out(ch, 2 * i, 2 * j + 1) = k * (ll + lh - hl - hh);
        out(ch, 2 * i + 1, 2 * j) = k * (ll - lh + hl - hh);
        out(ch, 2 * i + 1, 2 * j + 1) = k * (ll - lh - hl + hh);
      }
    }
  }
  return out;
}

WaveletPyramid decompose(const Tensor& img, int levels, const FilterBank& bank) {
  if (levels < 1) throw ArgumentError("decompose: level count must be >= 1, got " + std::to_string(levels));
  require_divisible(img.shape(), levels, "decompose");
  WaveletPyramid pyr;
  pyr.scale_mode = bank.mode();
  pyr.levels.reserve(static_cast<std::size_t>(levels));
  Tensor current = img;
  for (int i = 0; i < levels; ++i) {
    BandQuad q = haar_forward(current, bank);
    pyr.levels.push_back(BandTriple{std::move(q.lh), std::move(q.hl), std::move(q.hh)});
    current = std::move(q.ll);
  }
  pyr.approx = std::move(current);
  return pyr;
}

Tensor reconstruct(const WaveletPyramid& pyramid, const FilterBank& bank) {
  if (pyramid.levels.empty()) throw ArgumentError("reconstruct: pyramid has no levels");
  Tensor current = pyramid.approx;
  for (int i = pyramid.depth() - 1; i >= 0; --i) {
    const BandTriple& t = pyramid.levels[static_cast<std::size_t>(i)];
    if (t.lh.shape() != current.shape()) {
      throw ShapeError("reconstruct: level " + std::to_string(i) + " bands are " + t.lh.shape().str() +
                       " but the running approximation is " + current.shape().str());
    }
    current = haar_inverse(BandQuad{std::move(current), t.lh, t.hl, t.hh}, bank);
  }
  return current;
}

Tensor low_pass(const Tensor& img, int level, const FilterBank& bank) {
  if (level < 0) throw ArgumentError("low_pass: negative level");
  require_divisible(img.shape(), level, "low_pass");
  Tensor current = img;
  for (int i = 0; i < level; ++i) current = haar_forward(current, bank).ll;
  return current;
}

}  // namespace wagi
