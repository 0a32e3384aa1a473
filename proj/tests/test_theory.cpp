#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "wagi/errors.hpp"
#include "wagi/theory.hpp"

using namespace wagi;

TEST_CASE("sub-band energy identity on random pairs") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    wagi::CounterRng rng(seed, 3);
    const int h = 2 * rng.uniform_int(1, 12);
    const int w = 2 * rng.uniform_int(1, 12);
    const int c = rng.uniform_int(1, 3);
    const Tensor a = oracle::random_tensor(Shape{c, h, w}, seed);
    const Tensor b = oracle::random_tensor(Shape{c, h, w}, seed + 1000);
    const Theorem1Report r = verify_theorem1(a, b);
    CHECK(r.ratio_raw == doctest::Approx(16.0).epsilon(1e-12));
    CHECK(r.subband_sum_orthonormal_quarter == doctest::Approx(r.l2).epsilon(1e-12));
  }
}

TEST_CASE("identity pair gives NaN ratio, zero sums") {
  const Tensor a = oracle::random_tensor(Shape{1, 4, 4}, 1);
  const Theorem1Report r = verify_theorem1(a, a);
  CHECK(r.l2 == 0);
  CHECK(std::isnan(r.ratio_raw));
  CHECK(r.subband_sum_raw == 0);
}

TEST_CASE("half-normal closed form against quadrature and special cases") {
  CHECK(half_normal_mean(0, 1) == doctest::Approx(std::sqrt(2 / std::numbers::pi)).epsilon(1e-15));
  CHECK(half_normal_mean(0, 3) == doctest::Approx(3 * std::sqrt(2 / std::numbers::pi)).epsilon(1e-15));
  // Large |mu| / sigma: E|p| -> |mu|.
  CHECK(half_normal_mean(50, 1) == doctest::Approx(50).epsilon(1e-15));
  CHECK(half_normal_mean(-50, 1) == doctest::Approx(50).epsilon(1e-15));
  for (double mu = -5; mu <= 5; mu += 0.5) {
    for (double sigma : {0.2, 1.0, 2.5}) {
      CHECK(std::abs(half_normal_mean(mu, sigma) - half_normal_mean_quadrature(mu, sigma)) <= 1e-8);
    }
  }
  CHECK_THROWS_AS(half_normal_mean(0, 0), ArgumentError);
}

TEST_CASE("closed-form constant is log 2 at mu = 0 for every sigma") {
  for (double sigma : {0.1, 0.5, 1.0, 2.0, 10.0}) CHECK(lemma1_closed_form_c(0, sigma) == doctest::Approx(std::log(2.0)));
  CHECK(lemma1_closed_form_c(1.0, 1.0) != doctest::Approx(std::log(2.0)));
}

TEST_CASE("Monte Carlo agrees with the closed forms") {
  GaussianDiffSpec spec;
  spec.sigma = 1.0;
  spec.samples = 200'000;
  spec.seed = 11;
  const LemmaReport r = lemma1_montecarlo(spec, 32);
  CHECK(r.windows >= spec.samples);
  CHECK(std::abs(r.e_l1 - r.expected_e_l1) <= 4 * r.e_l1_stderr);
  for (int f = 0; f < 4; ++f) CHECK(std::abs(r.per_band_means[f] - r.expected_band_means[f]) <= 4 * r.per_band_stderr[f]);
  CHECK(std::abs(r.c_estimate - std::log(2.0)) <= 4 * r.stderr);
  CHECK(r.c_estimate_printed == doctest::Approx(r.c_estimate - std::log(16.0)));
}

TEST_CASE("Monte Carlo is deterministic and guards its preconditions") {
  GaussianDiffSpec spec;
  spec.samples = 20'000;
  spec.seed = 5;
  const LemmaReport a = lemma1_montecarlo(spec, 16);
  const LemmaReport b = lemma1_montecarlo(spec, 16);
  CHECK(a.c_estimate == b.c_estimate);
  spec.samples = 100;
  try {
    lemma1_montecarlo(spec);
    FAIL("expected ArgumentError");
  } catch (const ArgumentError& e) {
    CHECK(std::string(e.what()).find("insufficient samples") != std::string::npos);
  }
  spec.samples = 20'000;
  CHECK_THROWS_AS(lemma1_montecarlo(spec, 15), DimensionError);
}

TEST_CASE("verify suite verdicts") {
  VerifyOptions o;
  o.samples = 100;
  o.theorem_pairs = 10;
  const std::vector<Verdict> few = verify_suite(o);
  REQUIRE(few.size() == 5);
  CHECK(few[3].status == VerdictStatus::insufficient_samples);
  CHECK(to_string(few[3].status) == "insufficient samples");
  CHECK(verdicts_pass(few));

  o.samples = 40'000;
  const std::vector<Verdict> v = verify_suite(o);
  for (const Verdict& x : v) {
    INFO(x.check << " " << x.observed);
    CHECK(x.status == VerdictStatus::pass);
  }
  const std::vector<Verdict> again = verify_suite(o);
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i].observed == again[i].observed);
}
