#pragma once

// Möbius and Liouville weight tables, their partial sums, and the classical
// identities linking them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ergolab/error.hpp"
#include "ergolab/summation.hpp"

namespace ergolab {

enum class WeightKind { Mobius, Liouville, Custom };

inline std::string_view to_string(WeightKind kind) {
  switch (kind) {
  case WeightKind::Mobius:
    return "mobius";
  case WeightKind::Liouville:
    return "liouville";
  case WeightKind::Custom:
    return "custom";
  }
  return "custom";
}

// Immutable table of weights nu(n) in {-1, 0, +1} for n = 1..limit.
class WeightTable {
public:
  WeightTable(WeightKind kind, std::vector<std::int8_t> values_from_one)
      : kind_(kind), values_(values_from_one.size() + 1, 0) {
    if (values_from_one.empty()) {
      throw capacity_error("weight table needs at least one entry");
    }
    for (std::size_t i = 0; i < values_from_one.size(); ++i) {
      const auto v = values_from_one[i];
      if (v < -1 || v > 1) {
        throw domain_error("weights must lie in {-1, 0, 1}");
      }
      values_[i + 1] = v;
    }
  }

  // Control table with every weight equal to `value`.
  static WeightTable constant(std::uint64_t limit, std::int8_t value) {
    if (limit == 0) {
      throw capacity_error("weight table needs at least one entry");
    }
    return {WeightKind::Custom, std::vector<std::int8_t>(limit, value)};
  }

  [[nodiscard]] WeightKind kind() const noexcept { return kind_; }
  [[nodiscard]] std::uint64_t limit() const noexcept { return values_.size() - 1; }

  [[nodiscard]] int operator[](std::uint64_t n) const noexcept { return values_[n]; }

  [[nodiscard]] int at(std::uint64_t n) const {
    if (n == 0 || n > limit()) {
      throw bounds_error("weight index " + std::to_string(n) + " outside [1, " +
                         std::to_string(limit()) + "]");
    }
    return values_[n];
  }

  // values()[n] is nu(n); values()[0] is an unused zero slot.
  [[nodiscard]] std::span<const std::int8_t> values() const noexcept { return values_; }

  void require_covers(std::uint64_t n) const {
    if (n > limit()) {
      throw bounds_error("N = " + std::to_string(n) + " exceeds table limit " +
                         std::to_string(limit()));
    }
  }

private:
  WeightKind kind_;
  std::vector<std::int8_t> values_;
};

struct SieveOptions {
  // Limits up to this bound use one smallest-prime-factor block.
  std::uint64_t single_block_limit = 10'000'000;
  std::uint64_t segment_size = std::uint64_t{1} << 18;
  // Maximum number of table entries.
  std::uint64_t memory_budget = std::uint64_t{1} << 31;
};

namespace detail {

inline std::vector<std::uint32_t> primes_up_to(std::uint64_t bound) {
  std::vector<std::uint32_t> primes;
  if (bound < 2) {
    return primes;
  }
  std::vector<bool> composite(bound + 1, false);
  for (std::uint64_t i = 2; i <= bound; ++i) {
    if (!composite[i]) {
      primes.push_back(static_cast<std::uint32_t>(i));
      for (std::uint64_t j = i * i; j <= bound; j += i) {
        composite[j] = true;
      }
    }
  }
  return primes;
}

inline std::uint64_t isqrt(std::uint64_t n) {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(n)));
  while (r * r > n) {
    --r;
  }
  while ((r + 1) * (r + 1) <= n) {
    ++r;
  }
  return r;
}

inline std::int8_t weight_from(WeightKind kind, bool odd_omega, bool squarefree) {
  const std::int8_t lambda = odd_omega ? -1 : 1;
  if (kind == WeightKind::Liouville) {
    return lambda;
  }
  return squarefree ? lambda : 0;
}

inline std::vector<std::int8_t> sieve_single_block(WeightKind kind, std::uint64_t limit) {
  std::vector<std::uint32_t> spf(limit + 1, 0);
  for (std::uint64_t i = 2; i <= limit; ++i) {
    if (spf[i] == 0) {
      spf[i] = static_cast<std::uint32_t>(i);
      for (std::uint64_t j = i * i; j <= limit; j += i) {
        if (spf[j] == 0) {
          spf[j] = static_cast<std::uint32_t>(i);
        }
      }
    }
  }
  std::vector<std::int8_t> out(limit + 1, 0);
  out[1] = 1;
  for (std::uint64_t n = 2; n <= limit; ++n) {
    const std::uint64_t p = spf[n];
    const std::uint64_t m = n / p;
    if (kind == WeightKind::Liouville) {
      out[n] = static_cast<std::int8_t>(-out[m]);
    } else {
      out[n] = (m % p == 0) ? 0 : static_cast<std::int8_t>(-out[m]);
    }
  }
  return out;
}

inline void sieve_segment(WeightKind kind, std::uint64_t lo, std::uint64_t hi,
                          std::span<const std::uint32_t> primes, std::span<std::int8_t> out) {
  const std::uint64_t len = hi - lo;
  std::vector<std::uint64_t> rest(len);
  std::vector<std::uint8_t> odd(len, 0);
  std::vector<std::uint8_t> squarefree(len, 1);
  for (std::uint64_t i = 0; i < len; ++i) {
    rest[i] = lo + i;
  }
  for (const std::uint64_t p : primes) {
    if (p * p >= hi) {
      break;
    }
    for (std::uint64_t n = ((lo + p - 1) / p) * p; n < hi; n += p) {
      const std::uint64_t i = n - lo;
      unsigned e = 0;
      while (rest[i] % p == 0) {
        rest[i] /= p;
        ++e;
      }
      odd[i] ^= static_cast<std::uint8_t>(e & 1U);
      if (e >= 2) {
        squarefree[i] = 0;
      }
    }
  }
  for (std::uint64_t i = 0; i < len; ++i) {
    if (rest[i] > 1) {
      odd[i] ^= 1U;
    }
    out[i] = weight_from(kind, odd[i] != 0, squarefree[i] != 0);
  }
}

} // namespace detail

// Sieve nu(n) for n = 1..limit. Limits up to options.single_block_limit use
// a smallest-prime-factor sieve; the range above is filled by a segmented
// sieve over primes up to sqrt(limit).
inline WeightTable sieve(WeightKind kind, std::uint64_t limit, const SieveOptions& options = {}) {
  if (kind == WeightKind::Custom) {
    throw domain_error("only Mobius and Liouville weights can be sieved");
  }
  if (limit == 0) {
    throw capacity_error("sieve limit must be at least 1");
  }
  if (limit > options.memory_budget) {
    throw capacity_error("sieve limit " + std::to_string(limit) + " exceeds memory budget " +
                         std::to_string(options.memory_budget));
  }
  const std::uint64_t block = std::min(limit, std::max<std::uint64_t>(options.single_block_limit, 1));
  std::vector<std::int8_t> all = detail::sieve_single_block(kind, block);
  if (limit > block) {
    all.resize(limit + 1, 0);
    const auto primes = detail::primes_up_to(detail::isqrt(limit));
    const std::uint64_t seg = std::max<std::uint64_t>(options.segment_size, 1);
    for (std::uint64_t lo = block + 1; lo <= limit; lo += seg) {
      const std::uint64_t hi = std::min(limit + 1, lo + seg);
      detail::sieve_segment(kind, lo, hi, primes,
                            std::span<std::int8_t>(all).subspan(lo, hi - lo));
    }
  }
  all.erase(all.begin());
  return {kind, std::move(all)};
}

// Sum of nu(n) over 1 <= n <= N, exact.
inline std::int64_t partial_sum(const WeightTable& table, std::uint64_t n_max) {
  if (n_max == 0 || n_max > table.limit()) {
    throw bounds_error("partial sum length " + std::to_string(n_max) + " outside [1, " +
                       std::to_string(table.limit()) + "]");
  }
  std::int64_t acc = 0;
  const auto v = table.values();
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    acc += v[n];
  }
  return acc;
}

// Running sums: result[n] = sum_{m <= n} nu(m), result[0] = 0.
inline std::vector<std::int64_t> running_sums(const WeightTable& table) {
  const auto v = table.values();
  std::vector<std::int64_t> out(v.size(), 0);
  for (std::size_t n = 1; n < v.size(); ++n) {
    out[n] = out[n - 1] + v[n];
  }
  return out;
}

struct IdentityCheck {
  bool holds = true;
  std::optional<std::uint64_t> first_counterexample;
};

// Checks lambda(n) = sum_{d^2 | n} mu(n / d^2) for all n <= N.
inline IdentityCheck check_lambda_mu_identity(const WeightTable& mu, const WeightTable& lambda,
                                              std::uint64_t n_max) {
  if (mu.kind() != WeightKind::Mobius || lambda.kind() != WeightKind::Liouville) {
    throw domain_error("identity check needs a Mobius and a Liouville table");
  }
  if (n_max > mu.limit() || n_max > lambda.limit()) {
    throw bounds_error("identity check length exceeds a table limit");
  }
  std::vector<std::int32_t> acc(n_max + 1, 0);
  for (std::uint64_t d = 1; d * d <= n_max; ++d) {
    const std::uint64_t sq = d * d;
    for (std::uint64_t m = 1; m * sq <= n_max; ++m) {
      acc[m * sq] += mu[m];
    }
  }
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    if (acc[n] != lambda[n]) {
      return {false, n};
    }
  }
  return {};
}

// Partial Dirichlet series sum_{n <= N} mu(n) / n^s of 1/zeta(s).
inline double zeta_reciprocal_partial(const WeightTable& mu, double s, std::uint64_t n_max) {
  if (!(s > 1.0)) {
    throw domain_error("Dirichlet series needs s > 1");
  }
  mu.require_covers(n_max);
  PairwiseSum<double> acc;
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    if (const int w = mu[n]; w != 0) {
      acc.add(w * std::pow(static_cast<double>(n), -s));
    }
  }
  return acc.total();
}

struct PartialSumRow {
  std::uint64_t n = 0;
  std::int64_t sum = 0;
  double ratio = 0.0;         // |sum| / N
  double scaled_ratio = 0.0;  // |sum| / N^exponent
};

struct PartialSumProfile {
  double exponent = 0.6;
  std::vector<PartialSumRow> rows;
  double max_scaled_ratio = 0.0;
};

// |M(N)|/N and |M(N)|/N^exponent along an increasing list of N. The scaled
// column is a reported profile, not a bound.
inline PartialSumProfile partial_sum_profile(const WeightTable& table,
                                             std::span<const std::uint64_t> n_list,
                                             double exponent = 0.6) {
  PartialSumProfile profile;
  profile.exponent = exponent;
  std::int64_t acc = 0;
  std::uint64_t done = 0;
  const auto v = table.values();
  for (const auto n : n_list) {
    if (n == 0 || n > table.limit() || n <= done) {
      throw bounds_error("profile lengths must be increasing and inside the table");
    }
    for (std::uint64_t m = done + 1; m <= n; ++m) {
      acc += v[m];
    }
    done = n;
    const double mag = std::abs(static_cast<double>(acc));
    PartialSumRow row{n, acc, mag / static_cast<double>(n),
                      mag / std::pow(static_cast<double>(n), exponent)};
    profile.max_scaled_ratio = std::max(profile.max_scaled_ratio, row.scaled_ratio);
    profile.rows.push_back(row);
  }
  return profile;
}

} // namespace ergolab
