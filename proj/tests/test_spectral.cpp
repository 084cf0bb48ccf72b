#include <catch_amalgamated.hpp>

#include <cmath>

#include "ergolab/exp_sums.hpp"
#include "ergolab/random.hpp"
#include "ergolab/spectral.hpp"
#include "oracles.hpp"

using namespace ergolab;

namespace {

const WeightTable& mobius_table() {
  static const WeightTable t = sieve(WeightKind::Mobius, 1 << 16);
  return t;
}

const WeightTable& liouville_table() {
  static const WeightTable t = sieve(WeightKind::Liouville, 1 << 16);
  return t;
}

const std::vector<int>& mobius_oracle() {
  static const auto w = oracle::mobius_table(1 << 16);
  return w;
}

PeriodicSignal random_signal(std::uint64_t period, std::uint64_t seed) {
  const CounterRng rng(seed);
  std::vector<cplx> v(period);
  for (std::uint64_t j = 0; j < period; ++j) {
    v[j] = {2.0 * rng.uniform(2 * j) - 1.0, 2.0 * rng.uniform(2 * j + 1) - 1.0};
  }
  return PeriodicSignal(std::move(v));
}

PeriodicSignal sign_signal(std::uint64_t period, std::uint64_t seed) {
  const CounterRng rng(seed);
  std::vector<cplx> v(period);
  for (std::uint64_t j = 0; j < period; ++j) {
    v[j] = rng.sign(j);
  }
  return PeriodicSignal(std::move(v));
}

std::vector<cplx> as_vector(const PeriodicSignal& s) { return {s.values().begin(), s.values().end()}; }

const IntPolynomial lin({0, 1});
const IntPolynomial neg({0, -1});
const IntPolynomial square({0, 0, 1});

} // namespace

TEST_CASE("D coefficients: closed forms", "[spectral]") {
  SECTION("N = 1") {
    const IntPolynomial p({1, 2, 1});
    const IntPolynomial q({3, 1});
    const auto d = d_coefficients(mobius_table(), p, q, 1, 16);
    for (std::uint64_t k = 0; k < 16; ++k) {
      for (std::uint64_t l = 0; l < 16; ++l) {
        REQUIRE(std::abs(d(k, l) - oracle::unit(k * 4 + l * 4, 16)) < 1e-14);
      }
    }
  }
  SECTION("D_{N,0,0} = M(N)/N") {
    for (const std::uint64_t n : {10ULL, 100ULL, 1000ULL, 4096ULL}) {
      const auto d = d_coefficients(mobius_table(), square, lin, n, 24);
      const double expected = static_cast<double>(partial_sum(mobius_table(), n)) / static_cast<double>(n);
      CHECK(std::abs(d(0, 0) - expected) < 1e-14);
    }
  }
  SECTION("J = 64, N = 1000 against naive sums") {
    const auto d = d_coefficients(mobius_table(), square, lin, 1000, 64);
    for (std::uint64_t k = 0; k < 64; k += 3) {
      for (std::uint64_t l = 0; l < 64; l += 5) {
        REQUIRE(std::abs(d(k, l) - oracle::d_entry(mobius_oracle(), {0, 0, 1}, {0, 1}, 1000, 64, k, l)) < 1e-12);
      }
    }
  }
  SECTION("non-smooth period") {
    const auto d = d_coefficients(mobius_table(), IntPolynomial({0, 1, 0, 1}), neg, 500, 31);
    for (std::uint64_t k = 0; k < 31; ++k) {
      for (std::uint64_t l = 0; l < 31; l += 2) {
        REQUIRE(std::abs(d(k, l) - oracle::d_entry(mobius_oracle(), {0, 1, 0, 1}, {0, -1}, 500, 31, k, l)) <
                1e-12);
      }
    }
  }
  SECTION("|D| <= total variation <= 1") {
    const CounterRng rng(5);
    for (std::uint32_t i = 0; i < 10; ++i) {
      const std::uint64_t jp = 2 + rng.below(2 * i, 200);
      const std::uint64_t n = 1 + rng.below(2 * i + 1, 5000);
      const auto d = d_coefficients(liouville_table(), square, neg, n, jp);
      REQUIRE(d.max_modulus() <= 1.0 + 1e-12);
    }
  }
  SECTION("errors") {
    CHECK_THROWS_AS(d_coefficients(mobius_table(), lin, lin, 0, 8), domain_error);
    CHECK_THROWS_AS(d_coefficients(mobius_table(), lin, lin, 10, (1 << 14) + 1), capacity_error);
    CHECK_THROWS_AS(d_coefficients(mobius_table(), lin, lin, (1 << 16) + 1, 8), bounds_error);
  }
}

TEST_CASE("kernels", "[spectral]") {
  SECTION("N = 1 is a point mass") {
    const auto k = build_kernels(mobius_table(), square, IntPolynomial({2, 1}), 1, 10);
    CHECK(k.k_p.mass(1) == 1.0);
    CHECK(k.k_q.mass(3) == 1.0);
    CHECK(k.off_diagonal.mass(1, 3) == 1.0);
    CHECK(k.l_n.mass(8, 3) == 1.0);
    CHECK(k.l_n.counts().size() == 1);
  }
  SECTION("masses") {
    for (const std::uint64_t n : {100ULL, 1000ULL, 10'000ULL}) {
      const auto k = build_kernels(mobius_table(), square, lin, n, 37);
      const double m = static_cast<double>(partial_sum(mobius_table(), n)) / static_cast<double>(n);
      CHECK(k.k_p.total_mass() == Catch::Approx(m).margin(1e-15));
      CHECK(k.k_q.total_mass() == Catch::Approx(m).margin(1e-15));
      CHECK(k.off_diagonal.total_mass() == Catch::Approx(m).margin(1e-15));
      CHECK(k.l_n.total_mass() == Catch::Approx(m).margin(1e-15));
      CHECK(k.l_n.total_variation() <= 1.0);
      CHECK(k.k_p.total_variation() <= 1.0);
    }
  }
  SECTION("F(L_N) reproduces D, J = 32, N = 500") {
    const auto k = build_kernels(liouville_table(), square, lin, 500, 32);
    const auto d = d_coefficients(liouville_table(), square, lin, 500, 32);
    const auto table = k.l_n.transform_all();
    double worst = 0.0;
    for (std::uint64_t a = 0; a < 32; ++a) {
      for (std::uint64_t s = 0; s < 32; ++s) {
        worst = std::max(worst, std::abs(k.l_n.transform(a, s) - d(a, (s + 32 - a) % 32)));
        worst = std::max(worst, std::abs(table[a * 32 + s] - d.slice(a, s)));
        worst = std::max(worst, std::abs(k.off_diagonal.transform(a, s) - d(a, s)));
      }
    }
    CHECK(worst < 1e-12);
  }
  SECTION("1-D kernel transform is the rational exponential sum") {
    const auto k = build_kernels(mobius_table(), square, lin, 2000, 50);
    for (std::uint64_t a = 0; a < 50; ++a) {
      REQUIRE(std::abs(k.k_p.transform(a) - weighted_poly_sum_rational(mobius_table(), square, a, 50, 2000)) <
              1e-13);
    }
  }
}

TEST_CASE("averages: spectral and direct routes", "[spectral]") {
  SECTION("f = g = 1 gives M(N)/N") {
    const auto one = PeriodicSignal::constant(20, 1.0);
    const auto d = d_coefficients(mobius_table(), square, lin, 1000, 20);
    const double m = static_cast<double>(partial_sum(mobius_table(), 1000)) / 1000.0;
    const auto all = spectral_average_all(dft(one), dft(one), d);
    for (std::uint64_t j = 0; j < 20; ++j) {
      REQUIRE(std::abs(all[j] - m) < 1e-14);
      REQUIRE(std::abs(direct_average(mobius_table(), square, lin, one, one, 1000, j) - m) < 1e-14);
    }
  }
  SECTION("zero weights give zero") {
    const auto zeros = WeightTable::constant(1000, 0);
    const auto f = random_signal(16, 1);
    const auto g = random_signal(16, 2);
    const auto d = d_coefficients(zeros, square, lin, 1000, 16);
    CHECK(d.max_modulus() == 0.0);
    const auto all = spectral_average_all(dft(f), dft(g), d);
    for (const auto& v : all.values()) {
      CHECK(v == cplx(0.0, 0.0));
    }
  }
  SECTION("J = 256, N = 1000, P = n^2, Q = n, random f, g") {
    const auto f = random_signal(256, 3);
    const auto g = random_signal(256, 4);
    const auto d = d_coefficients(mobius_table(), square, lin, 1000, 256);
    const auto fs = dft(f);
    const auto gs = dft(g);
    const auto all = spectral_average_all(fs, gs, d);
    const auto direct = direct_average_all(mobius_table(), square, lin, f, g, 1000);
    double worst = 0.0;
    for (std::uint64_t j = 0; j < 256; ++j) {
      const cplx naive = oracle::average(mobius_oracle(), {0, 0, 1}, {0, 1}, as_vector(f), as_vector(g), 1000, j);
      worst = std::max(worst, std::abs(all[j] - naive));
      worst = std::max(worst, std::abs(direct[j] - naive));
    }
    CHECK(worst < 1e-9);
    for (const std::int64_t j : {0, 17, 255, -1, 300}) {
      CHECK(std::abs(spectral_average(fs, gs, d, j) - direct_average(mobius_table(), square, lin, f, g, 1000, j)) <
            1e-9);
    }
  }
  SECTION("squared L2 norm: closed forms") {
    const auto one = PeriodicSignal::constant(12, 1.0);
    const auto d = d_coefficients(mobius_table(), square, lin, 777, 12);
    const double m = static_cast<double>(partial_sum(mobius_table(), 777)) / 777.0;
    CHECK(l2_norm_of_average(dft(one), dft(one), d) == Catch::Approx(m * m).epsilon(1e-13));
    const auto zeros = WeightTable::constant(777, 0);
    const auto f = random_signal(12, 5);
    CHECK(l2_norm_of_average(dft(f), dft(f), d_coefficients(zeros, square, lin, 777, 12)) == 0.0);
  }
  SECTION("square of the L2 norm, J = 512, N = 2000") {
    const auto f = random_signal(512, 6);
    const auto g = random_signal(512, 7);
    const auto d = d_coefficients(liouville_table(), square, neg, 2000, 512);
    const double spectral = l2_norm_of_average(dft(f), dft(g), d);
    const double direct = direct_mean_square(direct_average_all(liouville_table(), square, neg, f, g, 2000));
    CHECK(std::abs(spectral - direct) <= 1e-9 * std::max(1.0, direct));
  }
  SECTION("period mismatch") {
    const auto f = random_signal(16, 1);
    const auto g = random_signal(17, 2);
    const auto d = d_coefficients(mobius_table(), square, lin, 10, 16);
    CHECK_THROWS_AS(average_spectrum(dft(f), dft(g), d), shape_error);
    CHECK_THROWS_AS(average_spectrum(dft(g), dft(g), d), shape_error);
    CHECK_THROWS_AS(direct_average(mobius_table(), square, lin, f, g, 10, 0), shape_error);
  }
}

TEST_CASE("L4 bound report", "[spectral]") {
  const std::vector<std::uint64_t> ns{16, 64, 256, 1024, 4096};
  SECTION("zero weights") {
    const auto zeros = WeightTable::constant(4096, 0);
    const auto f = random_signal(32, 8);
    const auto rows = l4_bound_report(f, f, zeros, square, lin, ns);
    REQUIRE(rows.size() == ns.size());
    for (const auto& r : rows) {
      CHECK(r.average_norm == 0.0);
      CHECK(r.ratio == 0.0);
      CHECK(std::isnan(r.average_norm_spectral));
    }
  }
  SECTION("delta signals, both routes") {
    const auto f = PeriodicSignal::delta(64, 0);
    const auto rows = l4_bound_report(f, f, mobius_table(), square, lin, ns, true);
    for (const auto& r : rows) {
      CHECK(std::abs(r.average_norm - r.average_norm_spectral) < 1e-12);
      CHECK(r.l4_product == Catch::Approx(1.0 / 8.0).epsilon(1e-14));
      CHECK(r.ratio == Catch::Approx(r.average_norm / r.l4_product).epsilon(1e-14));
    }
  }
  SECTION("incremental rows equal one-shot evaluations") {
    const auto f = random_signal(128, 9);
    const auto g = random_signal(128, 10);
    const auto rows = l4_bound_report(f, g, liouville_table(), square, lin, ns);
    for (std::size_t i = 0; i < ns.size(); ++i) {
      const auto direct = direct_average_all(liouville_table(), square, lin, f, g, ns[i]);
      CHECK(rows[i].average_norm == Catch::Approx(direct.norm(2.0)).epsilon(1e-12));
    }
  }
  SECTION("Mobius weights on J = 2^12 shrink relative to the L4 product") {
    const auto f = sign_signal(4096, 11);
    const auto g = sign_signal(4096, 12);
    const std::vector<std::uint64_t> long_list{1 << 10, 1 << 12, 1 << 14, 1 << 16, 1 << 18};
    const auto mu = sieve(WeightKind::Mobius, 1 << 18);
    const auto rows = l4_bound_report(f, g, mu, square, lin, long_list);
    CHECK(rows.back().ratio < rows.front().ratio);
    for (const auto& r : rows) {
      CHECK(r.ratio <= 1.0);
    }
  }
  SECTION("N list must increase") {
    const auto f = random_signal(8, 1);
    const std::vector<std::uint64_t> bad{10, 10};
    CHECK_THROWS_AS(l4_bound_report(f, f, mobius_table(), lin, lin, bad), domain_error);
  }
}
