#include "doctest.h"
#include "wagi/config.hpp"
#include "wagi/errors.hpp"

using namespace wagi;

TEST_CASE("key-value config parsing") {
  const KeyValueConfig c = KeyValueConfig::parse(
      "# job\n"
      "steps = 200\n"
      "lr = 0.05   # trailing comment\n"
      "name = \"a # b\"\n"
      "\n"
      "[regress]\n"
      "gen = pixel\n"
      "train = true\n");
  CHECK(c.get_int("steps", 0) == 200);
  CHECK(c.get_double("lr", 0) == 0.05);
  CHECK(c.get_string("name", "") == "a # b");
  CHECK(c.get_string("regress.gen", "") == "pixel");
  CHECK(c.get_bool("regress.train", false));
  CHECK(c.get_int("missing", 7) == 7);
  CHECK(c.keys() == std::vector<std::string>{"lr", "name", "regress.gen", "regress.train", "steps"});
  CHECK_FALSE(c.get("gen").has_value());
}

TEST_CASE("config errors name the line") {
  CHECK_THROWS_WITH_AS(KeyValueConfig::parse("a = 1\nb\n"), doctest::Contains("line 2"), ArgumentError);
  CHECK_THROWS_WITH_AS(KeyValueConfig::parse("a = 1\na = 2\n"), doctest::Contains("duplicate"), ArgumentError);
  CHECK_THROWS_AS(KeyValueConfig::parse("[sec\n"), ArgumentError);
  CHECK_THROWS_AS(KeyValueConfig::parse("x = \"open\n"), ArgumentError);
  CHECK_THROWS_AS(KeyValueConfig::parse("bad key = 1\n"), ArgumentError);
  const KeyValueConfig c = KeyValueConfig::parse("n = 1.5\nb = yes\n");
  CHECK_THROWS_AS(c.get_int("n", 0), ArgumentError);
  CHECK_THROWS_AS(c.get_bool("b", false), ArgumentError);
  CHECK_THROWS_AS(c.get_double("b", 0), ArgumentError);
}
