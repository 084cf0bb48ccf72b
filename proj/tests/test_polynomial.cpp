#include <catch_amalgamated.hpp>

#include "ergolab/polynomial.hpp"
#include "ergolab/random.hpp"
#include "oracles.hpp"

using namespace ergolab;

TEST_CASE("polynomial construction and parsing", "[polynomial]") {
  const auto p = IntPolynomial::parse("0,0,1");
  CHECK(p.degree() == 2);
  CHECK(p.to_string() == "0,0,1");
  CHECK(IntPolynomial::parse(" 3, -2 ,0").degree() == 1);
  CHECK(IntPolynomial::parse("0,-1") == IntPolynomial({0, -1}));
  CHECK_THROWS_AS(IntPolynomial::parse("5"), domain_error);
  CHECK_THROWS_AS(IntPolynomial::parse("1,0,0"), domain_error);
  CHECK_THROWS_AS(IntPolynomial::parse("1,x"), domain_error);
  CHECK_THROWS_AS(IntPolynomial::parse("1,,2"), domain_error);
  CHECK_THROWS_AS(IntPolynomial::parse(""), domain_error);
  CHECK_THROWS_AS(IntPolynomial::parse("0,0,0,0,0,0,0,0,0,1"), domain_error);
  CHECK(IntPolynomial::parse("0,0,0,0,0,0,0,0,1").degree() == 8);
}

TEST_CASE("eval_mod examples", "[polynomial]") {
  const IntPolynomial square({0, 0, 1});
  CHECK(eval_mod(square, 5, 7) == 4);
  const IntPolynomial identity({0, 1});
  const std::uint64_t j = 1000;
  CHECK(eval_mod(identity, j + 3, j) == 3);
  // Big-integer oracle: (10^9)^3 + 2 * 10^9 mod (2^32 - 5), computed offline.
  const IntPolynomial cubic({0, 2, 0, 1});
  CHECK(eval_mod(cubic, 1'000'000'000ULL, 4294967291ULL) == 3473905948ULL);
  CHECK(eval_mod(cubic, 1'000'000'000ULL, 4294967291ULL) ==
        oracle::poly_mod({0, 2, 0, 1}, 1'000'000'000ULL, 4294967291ULL));
  CHECK_THROWS_AS(eval_mod(square, 3, 0), domain_error);
  CHECK(eval_mod(square, 3, 1) == 0);
}

TEST_CASE("eval_mod negative values reduce into [0, m)", "[polynomial]") {
  const IntPolynomial neg({0, -1});
  CHECK(eval_mod(neg, 3, 10) == 7);
  CHECK(eval_mod(neg, 0, 10) == 0);
  CHECK(eval_mod(IntPolynomial({-5, 0, 1}), 1, 7) == 3);
}

TEST_CASE("eval_mod agrees with big-integer evaluation", "[polynomial][property]") {
  const CounterRng rng(77);
  std::uint32_t idx = 0;
  for (int trial = 0; trial < 10'000; ++trial) {
    const std::size_t deg = 1 + rng.below(idx++, 8);
    std::vector<std::int64_t> coeffs(deg + 1);
    for (auto& c : coeffs) {
      c = static_cast<std::int64_t>(rng.bits(idx++));
    }
    if (coeffs.back() == 0) {
      coeffs.back() = 1;
    }
    const IntPolynomial p(coeffs);
    const std::uint64_t n = rng.bits(idx++) >> rng.below(idx++, 64);
    std::uint64_t m = (rng.bits(idx++) >> 1) >> rng.below(idx++, 62);
    if (m == 0) {
      m = 1;
    }
    REQUIRE(eval_mod(p, n, m) == oracle::poly_mod(coeffs, n, m));
  }
}

TEST_CASE("linear polynomials are periodic mod m", "[polynomial][property]") {
  const CounterRng rng(5);
  for (std::uint32_t i = 0; i < 1000; ++i) {
    const IntPolynomial p({static_cast<std::int64_t>(rng.bits(4 * i) >> 8),
                           static_cast<std::int64_t>(rng.bits(4 * i + 1) >> 8) - (1LL << 54)});
    const std::uint64_t m = 1 + rng.below(4 * i + 2, 1ULL << 40);
    const std::uint64_t n = rng.below(4 * i + 3, 1ULL << 60);
    REQUIRE(eval_mod(p, n + m, m) == eval_mod(p, n, m));
  }
}

TEST_CASE("natural-mapping predicate", "[polynomial]") {
  CHECK(maps_naturals_to_naturals(IntPolynomial({0, 0, 1}), 100));
  CHECK_FALSE(maps_naturals_to_naturals(IntPolynomial({0, -1}), 100));
  CHECK_FALSE(maps_naturals_to_naturals(IntPolynomial({0, -3, 1}), 2));
  CHECK(maps_naturals_to_naturals(IntPolynomial({0, -3, 1}), 0));
  CHECK(maps_naturals_to_naturals(IntPolynomial({0, 1, 0, 1}), 1000));
}

TEST_CASE("residue tables", "[polynomial]") {
  const auto r = residues(IntPolynomial({0, 0, 1}), 6, 5);
  CHECK(r == std::vector<std::uint64_t>{1, 4, 4, 1, 0, 1});
}
