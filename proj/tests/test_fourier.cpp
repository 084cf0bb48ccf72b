#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "ergolab/fourier.hpp"
#include "ergolab/random.hpp"
#include "ergolab/summation.hpp"
#include "oracles.hpp"

using namespace ergolab;

namespace {

PeriodicSignal random_signal(std::uint64_t period, std::uint64_t seed) {
  const CounterRng rng(seed, 1);
  std::vector<cplx> v(period);
  for (std::uint32_t i = 0; i < period; ++i) {
    v[i] = {2.0 * rng.uniform(2 * i) - 1.0, 2.0 * rng.uniform(2 * i + 1) - 1.0};
  }
  return PeriodicSignal(std::move(v));
}

double max_abs_diff(std::span<const cplx> a, std::span<const cplx> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

} // namespace

TEST_CASE("generator test vectors", "[random]") {
  const CounterRng rng(0);
  CHECK(rng.bits(0) == 0xE220A8397B1DCDAFULL);
  CHECK(rng.bits(1) == 0x6E789E6AA1B965F4ULL);
  CHECK(rng.bits(2) == 0x06C45D188009454FULL);
  CHECK(CounterRng(0, 1).bits(0) != rng.bits(0));
  for (std::uint32_t i = 0; i < 100; ++i) {
    CHECK(rng.uniform(i) >= 0.0);
    CHECK(rng.uniform(i) < 1.0);
    CHECK(rng.below(i, 7) < 7);
  }
}

TEST_CASE("pairwise summation", "[summation]") {
  PairwiseSum<double> acc;
  for (int i = 0; i < 1'000'000; ++i) {
    acc.add(0.1);
  }
  CHECK(acc.count() == 1'000'000);
  CHECK(std::abs(acc.total() - 100'000.0) < 1e-8);
  std::vector<double> xs(1000, 1.0);
  CHECK(pairwise_sum<double>(xs) == 1000.0);
}

TEST_CASE("dft of constants and deltas", "[fourier]") {
  for (const std::uint64_t j : {1ULL, 2ULL, 31ULL, 64ULL, 97ULL, 120ULL}) {
    const auto c = dft(PeriodicSignal::constant(j, 1.0));
    CHECK(std::abs(c[0] - cplx(1.0)) < 1e-14);
    for (std::uint64_t k = 1; k < j; ++k) {
      CHECK(std::abs(c[k]) < 1e-14);
    }
    const auto d = dft(PeriodicSignal::delta(j, 0));
    for (std::uint64_t k = 0; k < j; ++k) {
      CHECK(std::abs(d[k] - cplx(1.0 / static_cast<double>(j))) < 1e-15);
    }
  }
}

TEST_CASE("fft matches the direct transform", "[fourier]") {
  for (const std::uint64_t j : {4ULL, 12ULL, 60ULL, 64ULL, 210ULL, 256ULL, 343ULL, 1000ULL}) {
    const auto f = random_signal(j, j);
    const auto fast = dft(f);
    REQUIRE(FourierPlan::get(j)->smooth());
    std::vector<cplx> slow(j);
    for (std::uint64_t k = 0; k < j; ++k) {
      cplx acc = 0.0;
      for (std::uint64_t n = 0; n < j; ++n) {
        acc += f[n] * std::conj(oracle::unit(k * n, j));
      }
      slow[k] = acc / static_cast<double>(j);
    }
    CHECK(max_abs_diff(fast.coefficients(), slow) < 1e-13);
  }
  CHECK_FALSE(FourierPlan::get(97)->smooth());
  CHECK_FALSE(FourierPlan::get(22)->smooth());
}

TEST_CASE("round trip and Parseval", "[fourier][property]") {
  for (const std::uint64_t j : {31ULL, 64ULL, 97ULL, 1024ULL}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto f = random_signal(j, 1000 * j + seed);
      const auto c = dft(f);
      const auto back = idft(c);
      const double scale = std::max(1.0, f.sup_norm());
      REQUIRE(max_abs_diff(back.values(), f.values()) <= 1e-12 * scale);
      const double lhs = f.norm(2.0) * f.norm(2.0);
      REQUIRE(std::abs(lhs - c.energy()) <= 1e-12 * std::max(1.0, lhs));
    }
  }
}

TEST_CASE("2-D transform is separable", "[fourier]") {
  constexpr std::uint64_t j = 6;
  std::vector<cplx> a(j * j);
  const CounterRng rng(3);
  for (std::uint32_t i = 0; i < a.size(); ++i) {
    a[i] = rng.uniform(i);
  }
  std::vector<cplx> b = a;
  transform_2d(b, j, +1);
  for (std::uint64_t k = 0; k < j; ++k) {
    for (std::uint64_t s = 0; s < j; ++s) {
      cplx acc = 0.0;
      for (std::uint64_t x = 0; x < j; ++x) {
        for (std::uint64_t y = 0; y < j; ++y) {
          acc += a[x * j + y] * oracle::unit(k * x + s * y, j);
        }
      }
      CHECK(std::abs(acc - b[k * j + s]) < 1e-13);
    }
  }
  CHECK_THROWS_AS(transform_2d(b, 5, +1), shape_error);
}

TEST_CASE("signal norms", "[fourier]") {
  const PeriodicSignal f(std::vector<cplx>{1.0, -1.0, 2.0, 0.0});
  CHECK(f.norm(2.0) == Catch::Approx(std::sqrt(6.0 / 4.0)));
  CHECK(f.counting_norm(2.0) == Catch::Approx(std::sqrt(6.0)));
  CHECK(f.norm(INFINITY) == 2.0);
  CHECK(f(-1) == cplx(0.0));
  CHECK(f(5) == cplx(-1.0));
  CHECK_THROWS_AS(PeriodicSignal(std::vector<cplx>{}), shape_error);
}
