#include <catch_amalgamated.hpp>

#include <cmath>

#include "ergolab/exp_sums.hpp"
#include "ergolab/random.hpp"
#include "oracles.hpp"

using namespace ergolab;

namespace {

const WeightTable& mobius_table() {
  static const WeightTable t = sieve(WeightKind::Mobius, 1 << 20);
  return t;
}

const WeightTable& liouville_table() {
  static const WeightTable t = sieve(WeightKind::Liouville, 1 << 20);
  return t;
}

const IntPolynomial identity({0, 1});
const IntPolynomial square({0, 0, 1});
const IntPolynomial cubic({0, 1, 0, 1});

} // namespace

TEST_CASE("weighted sum: trivial cases", "[exp_sums]") {
  for (const auto* p : {&identity, &square, &cubic}) {
    for (const double theta : {0.0, 0.3, 1.7, 6.0}) {
      const auto v = weighted_poly_sum(mobius_table(), *p, theta, 1);
      CHECK(std::abs(v) == Catch::Approx(1.0).epsilon(1e-15));
      CHECK(std::abs(v - std::polar(1.0, theta * static_cast<double>(p->coefficients()[1]) +
                                             theta * (p->degree() >= 3 ? 1.0 : 0.0) +
                                             (p->degree() == 2 ? theta : 0.0))) < 1e-12);
    }
  }
  for (const std::uint64_t n : {1ULL, 10ULL, 1000ULL, 65536ULL}) {
    const double expected = static_cast<double>(partial_sum(mobius_table(), n)) / static_cast<double>(n);
    const auto v = weighted_poly_sum(mobius_table(), square, 0.0, n);
    CHECK(v.real() == Catch::Approx(expected).margin(1e-15));
    CHECK(v.imag() == 0.0);
  }
  CHECK_THROWS_AS(weighted_poly_sum(mobius_table(), identity, 0.1, 0), domain_error);
  CHECK_THROWS_AS(weighted_poly_sum(mobius_table(), identity, 7.0, 10), domain_error);
  CHECK_THROWS_AS(weighted_poly_sum(mobius_table(), identity, 0.1, (1 << 20) + 1), bounds_error);
}

TEST_CASE("weighted sum: Liouville, n^2, theta = 2 pi / 5, N = 1000", "[exp_sums]") {
  // Direct summation with exact big-integer phases, computed offline.
  const cplx expected(0.0067294901687515842, 0.1046162167924669);
  const auto exact = weighted_poly_sum_rational(liouville_table(), square, 1, 5, 1000);
  CHECK(std::abs(exact - expected) < 1e-13);
  // Same oracle recomputed here.
  cplx acc = 0.0;
  for (std::uint64_t n = 1; n <= 1000; ++n) {
    acc += static_cast<double>(oracle::liouville(n)) * oracle::unit(oracle::poly_mod({0, 0, 1}, n, 5), 5);
  }
  CHECK(std::abs(exact - acc / 1000.0) < 1e-13);
  // Floating theta carries a representation error of ~1e-17 per unit of P(n).
  const auto floating = weighted_poly_sum(liouville_table(), square, two_pi / 5.0, 1000);
  CHECK(std::abs(floating - expected) < 1e-9);
}

TEST_CASE("weighted sum invariants", "[exp_sums][property]") {
  const CounterRng rng(11);
  for (std::uint32_t i = 0; i < 200; ++i) {
    const std::uint64_t q = 2 + rng.below(3 * i, 5000);
    const std::uint64_t a = rng.below(3 * i + 1, q);
    const std::uint64_t n = 1 + rng.below(3 * i + 2, 5000);
    for (const auto* p : {&identity, &square, &cubic}) {
      const auto v = weighted_poly_sum_rational(mobius_table(), *p, a, q, n);
      REQUIRE(std::abs(v) <= 1.0 + 1e-15);
      const auto w = weighted_poly_sum_rational(mobius_table(), *p, (q - a) % q, q, n);
      REQUIRE(std::abs(v - std::conj(w)) < 1e-13);
    }
  }
}

TEST_CASE("rational and floating phase paths agree", "[exp_sums][property]") {
  // Dyadic frequencies a / 2^k are exact doubles, so the two paths differ
  // only by cos/sin rounding, for every degree.
  const CounterRng rng(12);
  for (std::uint32_t i = 0; i < 30; ++i) {
    const std::uint64_t q = std::uint64_t{1} << (1 + rng.below(2 * i, 16));
    const std::uint64_t a = rng.below(2 * i + 1, q);
    const double theta = two_pi * static_cast<double>(a) / static_cast<double>(q);
    for (const auto* p : {&identity, &square, &cubic}) {
      const auto exact = weighted_poly_sum_rational(liouville_table(), *p, a, q, 100'000);
      const auto floating = weighted_poly_sum(liouville_table(), *p, theta, 100'000);
      REQUIRE(std::abs(exact - floating) < 1e-10);
    }
  }
  // Linear phases for arbitrary q <= 2^16.
  for (std::uint32_t i = 0; i < 30; ++i) {
    const std::uint64_t q = 2 + rng.below(100 + 2 * i, (1 << 16) - 1);
    const std::uint64_t a = rng.below(101 + 2 * i, q);
    const double theta = two_pi * static_cast<double>(a) / static_cast<double>(q);
    const auto exact = weighted_poly_sum_rational(mobius_table(), identity, a, q, 100'000);
    const auto floating = weighted_poly_sum(mobius_table(), identity, theta, 100'000);
    REQUIRE(std::abs(exact - floating) < 1e-10);
  }
}

TEST_CASE("grid maximum", "[exp_sums]") {
  SECTION("N = 1 ties break to the first grid point") {
    for (const auto grid : {FrequencyGrid::rational(4096), FrequencyGrid::uniform(64)}) {
      const auto best = max_over_grid(mobius_table(), square, grid, 1);
      CHECK(best.index == 0);
      CHECK(best.theta == 0.0);
      CHECK(best.modulus == Catch::Approx(1.0).epsilon(1e-15));
    }
  }
  SECTION("Mobius, P(n) = n, N = 10^4, rational grid 2048") {
    const auto grid = FrequencyGrid::rational(2048);
    const auto best = max_over_grid(mobius_table(), identity, grid, 10'000);
    double scan = 0.0;
    std::uint64_t arg = 0;
    for (std::uint64_t a = 0; a < 2048; ++a) {
      const double m = std::abs(weighted_poly_sum_rational(mobius_table(), identity, a, 2048, 10'000));
      if (m > scan) {
        scan = m;
        arg = a;
      }
    }
    CHECK(best.modulus == Catch::Approx(scan).epsilon(1e-12));
    CHECK(best.index == arg);
    CHECK(best.modulus < 0.05);
  }
  SECTION("uniform grid equals an exact-phase rescan") {
    const auto grid = FrequencyGrid::uniform(64);
    const auto values = grid_values(liouville_table(), cubic, grid, 100);
    double scan = 0.0;
    std::uint64_t arg = 0;
    for (std::uint64_t i = 0; i < 64; ++i) {
      cplx acc = 0.0;
      for (std::uint64_t n = 1; n <= 100; ++n) {
        acc += static_cast<double>(oracle::liouville(n)) * oracle::unit(oracle::poly_mod({0, 1, 0, 1}, n, 64) * i, 64);
      }
      acc /= 100.0;
      REQUIRE(std::abs(acc - values[i]) < 1e-13);
      if (std::abs(acc) > scan * (1.0 + 1e-12)) {
        scan = std::abs(acc);
        arg = i;
      }
    }
    const auto best = max_over_grid(liouville_table(), cubic, grid, 100);
    CHECK(best.index == arg);
    CHECK(best.modulus == Catch::Approx(scan).epsilon(1e-12));
  }
  SECTION("refining a grid never lowers the maximum") {
    for (const std::uint64_t q : {16ULL, 64ULL, 256ULL}) {
      for (const auto* p : {&identity, &square, &cubic}) {
        const auto coarse = max_over_grid(mobius_table(), *p, FrequencyGrid::rational(q), 5000);
        const auto fine = max_over_grid(mobius_table(), *p, FrequencyGrid::rational(4 * q), 5000);
        REQUIRE(coarse.modulus <= fine.modulus * (1.0 + 1e-12));
      }
    }
  }
}

TEST_CASE("decay profiles", "[exp_sums]") {
  std::vector<std::uint64_t> ns;
  for (int e = 10; e <= 20; ++e) {
    ns.push_back(std::uint64_t{1} << e);
  }
  const auto grid = FrequencyGrid::rational(4096);
  const auto mob = decay_profile(mobius_table(), identity, grid, ns);
  REQUIRE(mob.rows.size() == ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const auto direct = max_over_grid(mobius_table(), identity, grid, ns[i]);
    REQUIRE(mob.rows[i].max_abs == Catch::Approx(direct.modulus).epsilon(1e-12));
    REQUIRE(mob.rows[i].max_abs <= 1.0);
  }
  // Measured: nonincreasing from N = 2^12 on.
  for (std::size_t i = 3; i < ns.size(); ++i) {
    CHECK(mob.rows[i].max_abs <= mob.rows[i - 1].max_abs);
  }
  REQUIRE(mob.fit.has_value());
  CHECK(mob.fit->points == ns.size());
  CHECK(std::isfinite(mob.fit->exponent));
  CHECK(std::isfinite(mob.fit->exponent_stderr));
  CHECK(mob.fit->residuals.size() == ns.size());

  const auto lio = decay_profile(liouville_table(), identity, grid, ns);
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (ns[i] >= (1U << 14)) {
      CHECK(std::abs(lio.rows[i].max_abs - mob.rows[i].max_abs) < 0.02);
    }
  }

  // Constant weight: no decay at theta = 0.
  const auto ones = WeightTable::constant(1 << 20, 1);
  const auto flat = decay_profile(ones, identity, grid, ns);
  for (const auto& row : flat.rows) {
    CHECK(row.max_abs == Catch::Approx(1.0).epsilon(1e-14));
    CHECK(row.theta_star == 0.0);
  }
  REQUIRE(flat.fit.has_value());
  CHECK(std::abs(flat.fit->exponent) < 1e-12);

  const std::vector<std::uint64_t> short_list{100, 200};
  CHECK_THROWS_AS(decay_profile(mobius_table(), identity, grid, short_list), fit_error);
  const std::vector<std::uint64_t> unsorted{100, 50, 200};
  CHECK_THROWS_AS(decay_profile(mobius_table(), identity, grid, unsorted), domain_error);
}

TEST_CASE("decay fit recovers an exact power of log", "[exp_sums]") {
  std::vector<DecayRow> rows;
  for (const std::uint64_t n : {100ULL, 1000ULL, 10'000ULL, 100'000ULL}) {
    rows.push_back({n, 3.0 / std::pow(std::log(static_cast<double>(n)), 2.5), 0.0});
  }
  const auto fit = fit_log_decay(rows);
  REQUIRE(fit.has_value());
  CHECK(fit->exponent == Catch::Approx(2.5).epsilon(1e-10));
  CHECK(fit->constant == Catch::Approx(3.0).epsilon(1e-10));
  CHECK(fit->exponent_stderr < 1e-10);
  rows.resize(2);
  CHECK_FALSE(fit_log_decay(rows).has_value());
}

TEST_CASE("short-interval sums", "[exp_sums]") {
  const auto& lam = liouville_table();
  SECTION("M = 1 covers n = N and n = N + 1") {
    const std::uint64_t n0 = 1000;
    const double theta = 0.7;
    const auto v = short_interval_sum(lam, theta, n0, 1);
    const cplx expected = static_cast<double>(lam[n0]) * std::polar(1.0, theta * 1000.0) +
                          static_cast<double>(lam[n0 + 1]) * std::polar(1.0, theta * 1001.0);
    CHECK(std::abs(v.value - expected) < 1e-12);
  }
  SECTION("theta = 0 reduces to partial sums") {
    const auto v = short_interval_sum(lam, 0.0, 10'000, 10'000);
    const double expected =
        static_cast<double>(partial_sum(lam, 20'000) - partial_sum(lam, 9'999)) / 10'000.0;
    CHECK(v.value.real() == Catch::Approx(expected).margin(1e-15));
    CHECK(v.value.imag() == 0.0);
    const auto mu = sieve(WeightKind::Mobius, 20'000);
    const auto w = short_interval_sum(mu, 0.0, 10'000, 10'000);
    CHECK(w.value.real() == Catch::Approx(static_cast<double>(partial_sum(mu, 20'000) - partial_sum(mu, 9'999)) / 10'000.0).margin(1e-15));
  }
  SECTION("N = 10^5, M = ceil(N^0.7), theta = 2 pi 3/7") {
    const std::uint64_t n0 = 100'000;
    const auto span = static_cast<std::uint64_t>(std::ceil(std::pow(1e5, 0.7)));
    REQUIRE(span == 3163);
    // Direct summation with exact phases, computed offline.
    const cplx expected(0.0046014439244658912, 0.012058646294106395);
    const auto v = short_interval_sum_rational(lam, 3, 7, n0, span);
    CHECK(std::abs(v.value - expected) < 1e-13);
    CHECK(v.zhan_range);
    const auto f = short_interval_sum(lam, two_pi * 3.0 / 7.0, n0, span);
    CHECK(std::abs(f.value - expected) < 1e-9);
  }
  SECTION("Zhan flag and errors") {
    CHECK_FALSE(short_interval_sum(lam, 0.0, 100'000, 100).zhan_range);
    CHECK(short_interval_sum(lam, 0.0, 100'000, 1400).zhan_range);
    CHECK_THROWS_AS(short_interval_sum(lam, 0.0, (1 << 20) - 5, 10), bounds_error);
    CHECK_THROWS_AS(short_interval_sum(lam, 0.0, 0, 10), domain_error);
  }
}
