#include "wagi/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "wagi/errors.hpp"

namespace wagi {

std::string Shape::str() const {
  return std::to_string(c) + "x" + std::to_string(h) + "x" + std::to_string(w);
}

Tensor::Tensor(Shape shape, double fill) : shape_(shape), data_(shape.size(), fill) {
  if (shape.c < 0 || shape.h < 0 || shape.w < 0) throw ShapeError("negative tensor dimension");
}

Tensor::Tensor(Shape shape, std::vector<double> values) : shape_(shape), data_(std::move(values)) {
  if (data_.size() != shape.size()) {
    throw ShapeError("value count " + std::to_string(data_.size()) + " does not match shape " + shape.str());
  }
}

double Tensor::item() const {
  if (data_.size() != 1) throw ShapeError("item() on non-scalar tensor " + shape_.str());
  return data_[0];
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Tensor& Tensor::operator+=(const Tensor& o) {
  require_same_shape(*this, o, "add");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

Tensor& Tensor::operator-=(const Tensor& o) {
  require_same_shape(*this, o, "sub");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

Tensor& Tensor::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Tensor Tensor::slice_channels(int begin, int count) const {
  if (begin < 0 || count < 0 || begin + count > shape_.c) {
    throw ShapeError("channel slice [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                     ") out of range for " + shape_.str());
  }
  Tensor out(count, shape_.h, shape_.w);
  std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(begin * shape_.plane()), out.size(), out.data_.begin());
  return out;
}

Tensor Tensor::concat_channels(std::span<const Tensor> parts) {
  if (parts.empty()) return {};
  int channels = 0;
  for (const Tensor& p : parts) {
    if (p.height() != parts[0].height() || p.width() != parts[0].width()) {
      throw ShapeError("concat_channels: spatial mismatch " + p.shape().str() + " vs " + parts[0].shape().str());
    }
    channels += p.channels();
  }
  Tensor out(channels, parts[0].height(), parts[0].width());
  auto it = out.data_.begin();
  for (const Tensor& p : parts) it = std::copy(p.data_.begin(), p.data_.end(), it);
  return out;
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double Tensor::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double Tensor::sum() const {
  double s = 0.0;
  for (double v : data_) s += v;
  return s;
}

Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
Tensor operator*(Tensor a, double s) { return a *= s; }
Tensor operator*(double s, Tensor a) { return a *= s; }

double max_abs_diff(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) return false;
  return a.size() == 0 || std::memcmp(a.values().data(), b.values().data(), a.size() * sizeof(double)) == 0;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": shape mismatch " + a.shape().str() + " vs " + b.shape().str());
  }
}

}  // namespace wagi
