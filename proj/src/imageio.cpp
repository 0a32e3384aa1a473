#include "wagi/imageio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "binio.hpp"
#include "wagi/errors.hpp"

namespace wagi {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

class PnmHeader {
 public:
  explicit PnmHeader(std::string_view bytes) : bytes_(bytes) {}

  // Unsigned decimal token preceded by whitespace and comments.
  std::uint64_t number(const char* what) {
    skip_space_and_comments();
    if (pos_ >= bytes_.size()) throw MalformedHeaderError(std::string("PNM header ends before ") + what);
    if (bytes_[pos_] < '0' || bytes_[pos_] > '9') throw MalformedHeaderError(std::string("PNM ") + what + " is not a number");
    std::uint64_t v = 0;
    while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
      v = v * 10 + static_cast<std::uint64_t>(bytes_[pos_] - '0');
      if (v > (std::uint64_t{1} << 32)) throw DimensionOverflowError(std::string("PNM ") + what + " overflows");
      ++pos_;
    }
    return v;
  }

  // The single whitespace byte separating maxval from the raster.
  std::size_t raster_start() {
    if (pos_ >= bytes_.size() || !is_space(bytes_[pos_])) throw MalformedHeaderError("PNM maxval not followed by whitespace");
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (is_space(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 2;
};

}  // namespace

Tensor read_pnm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P') throw MalformedHeaderError("not a PNM file (missing 'P' magic)");
  const char kind = bytes[1];
  if (kind == '1' || kind == '2' || kind == '3' || kind == '4' || kind == '7') {
    throw UnsupportedFormatError(std::string("PNM variant P") + kind + " is not supported (binary P5/P6 only)");
  }
  if (kind != '5' && kind != '6') throw MalformedHeaderError("unknown PNM magic");
  const int channels = kind == '5' ? 1 : 3;

  PnmHeader header(bytes);
  const std::uint64_t w = header.number("width");
  const std::uint64_t h = header.number("height");
  const std::uint64_t maxval = header.number("maxval");
  if (w == 0 || h == 0) throw MalformedHeaderError("PNM width and height must be positive");
  if (maxval == 0 || maxval > 255) {
    throw UnsupportedMaxvalError("PNM maxval " + std::to_string(maxval) + " unsupported (1..255 only)");
  }
  if (w > kMaxElements || h > kMaxElements || w * h * static_cast<std::uint64_t>(channels) > kMaxElements) throw DimensionOverflowError("PNM dimensions too large");
  const std::size_t start = header.raster_start();

  const std::size_t count = static_cast<std::size_t>(w * h) * static_cast<std::size_t>(channels);
  if (bytes.size() - std::min(start, bytes.size()) < count) {
    throw TruncatedPayloadError("PNM raster has " + std::to_string(bytes.size() - std::min(start, bytes.size())) +
                                " bytes, expected " + std::to_string(count));
  }
  Tensor img(channels, static_cast<int>(h), static_cast<int>(w));
  const double scale = static_cast<double>(maxval);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < channels; ++c) {
        const std::size_t at = start + (static_cast<std::size_t>(y) * img.width() + x) * channels + c;
        const auto v = static_cast<unsigned char>(bytes[at]);
        if (v > maxval) throw MalformedHeaderError("PNM sample exceeds maxval");
        img(c, y, x) = v / scale;
      }
    }
  }
  return img;
}

std::string write_pnm(const Tensor& img, int maxval) {
  if (img.channels() != 1 && img.channels() != 3) {
    throw ShapeError("PNM needs 1 or 3 channels, got " + std::to_string(img.channels()));
  }
  if (maxval < 1 || maxval > 255) throw UnsupportedMaxvalError("PNM maxval must be in 1..255");
  std::string out = (img.channels() == 1 ? "P5\n" : "P6\n") + std::to_string(img.width()) + " " +
                    std::to_string(img.height()) + "\n" + std::to_string(maxval) + "\n";
  out.reserve(out.size() + img.size());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < img.channels(); ++c) {
        double v = img(c, y, x);
        v = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
        out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v * maxval))));
      }
    }
  }
  return out;
}

Tensor read_raw(std::string_view bytes) {
  if (bytes.size() < 4 || bytes.substr(0, 4) != "WGT1") throw BadMagicError("not a raw tensor file (magic 'WGT1' missing)");
  detail::ByteReader in(bytes.substr(4));
  const std::uint32_t dtype = in.u32("dtype code");
  if (dtype != kRawDtypeF32) throw UnsupportedFormatError("raw dtype code " + std::to_string(dtype) + " unsupported");
  const std::uint64_t c = in.u32("dims");
  const std::uint64_t h = in.u32("dims");
  const std::uint64_t w = in.u32("dims");
  if (c == 0 || h == 0 || w == 0) throw MalformedHeaderError("raw dims must be positive");
  if (c > kMaxElements || h > kMaxElements || w > kMaxElements || c * h * w > kMaxElements) {
    throw DimensionOverflowError("raw dims " + std::to_string(c) + "x" + std::to_string(h) + "x" + std::to_string(w) +
                                 " overflow");
  }
  const std::uint64_t n = c * h * w;
  if (in.remaining() < 4 * n) {
    throw TruncatedPayloadError("raw payload has " + std::to_string(in.remaining()) + " bytes, expected " +
                                std::to_string(4 * n));
  }
  if (in.remaining() > 4 * n) throw DimensionOverflowError("raw payload longer than its dims");
  Tensor t(static_cast<int>(c), static_cast<int>(h), static_cast<int>(w));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(in.f32("payload"));
  return t;
}

std::string write_raw(const Tensor& t) {
  std::string out = "WGT1";
  detail::put_u32(out, kRawDtypeF32);
  detail::put_u32(out, static_cast<std::uint32_t>(t.channels()));
  detail::put_u32(out, static_cast<std::uint32_t>(t.height()));
  detail::put_u32(out, static_cast<std::uint32_t>(t.width()));
  out.reserve(out.size() + 4 * t.size());
  for (double v : t.values()) detail::put_f32(out, static_cast<float>(v));
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path + "'");
  return ss.str();
}

void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("error writing '" + path + "'");
}

Tensor load_image(const std::string& path) {
  const std::string bytes = read_file(path);
  if (bytes.rfind("WGT1", 0) == 0) return read_raw(bytes);
  return read_pnm(bytes);
}

}  // namespace wagi
