#include <cstring>
#include <filesystem>

#include "doctest.h"
#include "oracles.hpp"
#include "wagi/errors.hpp"
#include "wagi/imageio.hpp"
#include "wagi/rng.hpp"

using namespace wagi;

namespace {

std::string bytes_of(std::initializer_list<int> v) {
  std::string s;
  for (int b : v) s.push_back(static_cast<char>(b));
  return s;
}

Tensor quantized(Shape s, std::uint64_t seed, int maxval = 255) {
  CounterRng rng(seed);
  Tensor t(s);
  for (double& v : t.values()) v = rng.uniform_int(0, maxval) / static_cast<double>(maxval);
  return t;
}

}  // namespace

TEST_CASE("hand-encoded 2x2 P6 decodes to the known tensor") {
  const std::string file = "P6\n# comment\n2 2\n255\n" + bytes_of({255, 0, 0, 0, 255, 0, 0, 0, 255, 51, 102, 204});
  const Tensor t = read_pnm(file);
  CHECK(t.shape() == Shape{3, 2, 2});
  CHECK(t(0, 0, 0) == 1.0);
  CHECK(t(1, 0, 0) == 0.0);
  CHECK(t(1, 0, 1) == 1.0);
  CHECK(t(2, 1, 0) == 1.0);
  CHECK(t(0, 1, 1) == doctest::Approx(0.2));
  CHECK(t(1, 1, 1) == doctest::Approx(0.4));
  CHECK(t(2, 1, 1) == doctest::Approx(0.8));

  const Tensor g = read_pnm("P5 3 1 15 " + bytes_of({0, 5, 15}));
  CHECK(g.shape() == Shape{1, 1, 3});
  CHECK(g(0, 0, 1) == doctest::Approx(1.0 / 3));
}

TEST_CASE("PNM round trips are byte identical") {
  for (int c : {1, 3}) {
    const Tensor t = quantized(Shape{c, 5, 7}, static_cast<std::uint64_t>(c));
    const std::string a = write_pnm(t);
    CHECK(a.rfind(c == 1 ? "P5\n7 5\n255\n" : "P6\n7 5\n255\n", 0) == 0);
    const Tensor back = read_pnm(a);
    CHECK(bitwise_equal(back, t));
    CHECK(write_pnm(back) == a);
  }
  const Tensor t = quantized(Shape{3, 2, 3}, 9, 7);
  CHECK(write_pnm(read_pnm(write_pnm(t, 7)), 7) == write_pnm(t, 7));
}

TEST_CASE("PNM writer clamps and rejects bad shapes") {
  Tensor t(Shape{1, 1, 3}, std::vector<double>{-1.0, 2.0, std::nan("")});
  const std::string b = write_pnm(t);
  CHECK(b.substr(b.size() - 3) == bytes_of({0, 255, 0}));
  CHECK_THROWS_AS(write_pnm(Tensor(Shape{2, 2, 2})), ShapeError);
  CHECK_THROWS_AS(write_pnm(Tensor(Shape{1, 2, 2}), 256), UnsupportedMaxvalError);
}

TEST_CASE("PNM error kinds are distinct") {
  CHECK_THROWS_AS(read_pnm("P4\n1 1\n" + bytes_of({0})), UnsupportedFormatError);
  CHECK_THROWS_AS(read_pnm("P3\n1 1\n255\n0 0 0\n"), UnsupportedFormatError);
  CHECK_THROWS_AS(read_pnm("GIF89a"), MalformedHeaderError);
  CHECK_THROWS_AS(read_pnm("P6\n2 x\n255\n"), MalformedHeaderError);
  CHECK_THROWS_AS(read_pnm("P6\n0 2\n255\n"), MalformedHeaderError);
  CHECK_THROWS_AS(read_pnm("P6\n2 2\n"), MalformedHeaderError);
  CHECK_THROWS_AS(read_pnm("P6\n2 2\n65535\n"), UnsupportedMaxvalError);
  CHECK_THROWS_AS(read_pnm("P6\n2 2\n0\n"), UnsupportedMaxvalError);
  CHECK_THROWS_AS(read_pnm("P6\n2 2\n255\n" + std::string(11, 'a')), TruncatedPayloadError);
  CHECK_THROWS_AS(read_pnm("P6\n4294967296 4294967296\n255\n"), DimensionOverflowError);
  CHECK_THROWS_AS(read_pnm("P6\n99999999999 1\n255\n"), DimensionOverflowError);
  CHECK_THROWS_AS(read_pnm("P5\n1 1\n7\n" + bytes_of({9})), MalformedHeaderError);
}

TEST_CASE("raw tensors round trip bit-exactly") {
  Tensor t = oracle::random_tensor(Shape{2, 3, 4}, 1);
  for (double& v : t.values()) v = static_cast<float>(v);
  const std::string a = write_raw(t);
  CHECK(a.size() == 20 + 4 * t.size());
  CHECK(a.substr(0, 8) == std::string("WGT1\x01\0\0\0", 8));
  const Tensor back = read_raw(a);
  CHECK(bitwise_equal(back, t));
  CHECK(write_raw(back) == a);

  // PNM -> raw -> PNM keeps the bytes.
  const std::string pnm = write_pnm(quantized(Shape{3, 4, 4}, 5));
  CHECK(write_pnm(read_raw(write_raw(read_pnm(pnm)))) == pnm);
}

TEST_CASE("raw error kinds") {
  const std::string good = write_raw(Tensor(Shape{1, 2, 2}, 0.5));
  CHECK_THROWS_AS(read_raw("WGT2" + good.substr(4)), BadMagicError);
  CHECK_THROWS_AS(read_raw(""), BadMagicError);
  std::string dtype = good;
  dtype[4] = 2;
  CHECK_THROWS_AS(read_raw(dtype), UnsupportedFormatError);
  std::string zero = good;
  std::memset(zero.data() + 8, 0, 4);
  CHECK_THROWS_AS(read_raw(zero), MalformedHeaderError);
  std::string huge = good;
  std::memset(huge.data() + 12, 0xff, 8);
  CHECK_THROWS_AS(read_raw(huge), DimensionOverflowError);
  CHECK_THROWS_AS(read_raw(good.substr(0, good.size() - 1)), TruncatedPayloadError);
  CHECK_THROWS_AS(read_raw(good.substr(0, 10)), TruncatedPayloadError);
  CHECK_THROWS_AS(read_raw(good + "x"), DimensionOverflowError);
}

TEST_CASE("parsers are total on random bytes") {
  CounterRng rng(42);
  int ok = 0;
  for (int i = 0; i < 5000; ++i) {
    const int n = rng.uniform_int(0, 64);
    std::string s;
    // Half the inputs start with a valid magic to reach deeper states.
    if (i % 4 == 0) s = "P6";
    if (i % 4 == 1) s = "P5 2 2 255 ";
    if (i % 4 == 2) s = std::string("WGT1\x01\0\0\0", 8);
    for (int k = 0; k < n; ++k) s.push_back(static_cast<char>(rng.uniform_int(0, 255)));
    for (auto* parse : {&read_pnm, &read_raw}) {
      try {
        parse(s);
        ++ok;
      } catch (const FormatError&) {
      }
    }
  }
  CHECK(ok >= 0);
}

TEST_CASE("file helpers") {
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "wagi_imageio_test";
  std::filesystem::create_directories(dir);
  const Tensor t = quantized(Shape{3, 2, 2}, 3);
  write_file((dir / "a.ppm").string(), write_pnm(t));
  write_file((dir / "a.wgt").string(), write_raw(t));
  CHECK(bitwise_equal(load_image((dir / "a.ppm").string()), t));
  CHECK(max_abs_diff(load_image((dir / "a.wgt").string()), t) <= 1e-7);
  CHECK_THROWS_AS(read_file((dir / "missing").string()), IoError);
  CHECK_THROWS_AS(write_file((dir / "no" / "such" / "x").string(), "x"), IoError);
  std::filesystem::remove_all(dir);
}
