#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace wagi {

struct Shape {
  int c = 0;
  int h = 0;
  int w = 0;

  std::size_t size() const {
    return static_cast<std::size_t>(c) * static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
  }
  std::size_t plane() const { return static_cast<std::size_t>(h) * static_cast<std::size_t>(w); }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

/// Dense C×H×W raster of doubles, channel-major and row-major within a
/// channel. Vectors and matrices used by the generator are stored as
/// degenerate tensors (D×1×1 and 1×rows×cols).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(int c, int h, int w, double fill = 0.0) : Tensor(Shape{c, h, w}, fill) {}
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double v) { return Tensor(1, 1, 1, v); }

  const Shape& shape() const { return shape_; }
  int channels() const { return shape_.c; }
  int height() const { return shape_.h; }
  int width() const { return shape_.w; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(int c, int y, int x) {
    return data_[(static_cast<std::size_t>(c) * shape_.h + y) * shape_.w + x];
  }
  double operator()(int c, int y, int x) const {
    return data_[(static_cast<std::size_t>(c) * shape_.h + y) * shape_.w + x];
  }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::span<double> channel(int c) { return std::span<double>(data_).subspan(c * shape_.plane(), shape_.plane()); }
  std::span<const double> channel(int c) const {
    return std::span<const double>(data_).subspan(c * shape_.plane(), shape_.plane());
  }

  /// Scalar value of a 1×1×1 tensor.
  double item() const;

  void fill(double v);
  Tensor& operator+=(const Tensor& o);
  Tensor& operator-=(const Tensor& o);
  Tensor& operator*=(double s);

  /// Copy of channels [begin, begin + count).
  Tensor slice_channels(int begin, int count) const;
  static Tensor concat_channels(std::span<const Tensor> parts);

  bool all_finite() const;
  double max_abs() const;
  double sum() const;

 private:
  Shape shape_{};
  std::vector<double> data_;
};

Tensor operator+(Tensor a, const Tensor& b);
Tensor operator-(Tensor a, const Tensor& b);
Tensor operator*(Tensor a, double s);
Tensor operator*(double s, Tensor a);

/// Largest absolute elementwise difference; throws ShapeError on mismatch.
double max_abs_diff(const Tensor& a, const Tensor& b);

/// Byte-wise equality of the payloads (distinguishes -0.0 from +0.0).
bool bitwise_equal(const Tensor& a, const Tensor& b);

void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

}  // namespace wagi
