#pragma once

// Weighted polynomial exponential sums (1/N) sum_{n<=N} nu(n) e^{i P(n) theta},
// their maxima over frequency grids, decay profiles, and short-interval sums.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ergolab/error.hpp"
#include "ergolab/fourier.hpp"
#include "ergolab/parallel.hpp"
#include "ergolab/polynomial.hpp"
#include "ergolab/summation.hpp"
#include "ergolab/weights.hpp"

namespace ergolab {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Two moduli closer than this (relative) count as a tie in grid maxima.
inline constexpr double grid_tie_tolerance = 1e-12;

// e^{i P(n) theta} for a floating-point theta.
//
// t = theta / (2 pi) is a dyadic rational M / 2^k, so frac(P(n) t) is
// computed exactly from P(n) mod 2^k whenever k <= 63. The only rounding is
// in t itself and in the final cos/sin.
class FloatingPhase {
public:
  explicit FloatingPhase(double theta) {
    if (!(theta >= 0.0 && theta < two_pi)) {
      throw domain_error("theta must lie in [0, 2 pi)");
    }
    if (theta == 0.0) {
      zero_ = true;
      return;
    }
    // Of the few doubles t near theta / 2pi with fl(2pi t) == theta, take the
    // one with the shortest binary expansion, so that 2pi a/2^k round-trips.
    const double t0 = theta / two_pi;
    double lo = t0;
    double hi = t0;
    for (int i = 0; i < 4; ++i) {
      lo = std::nextafter(lo, 0.0);
      hi = std::nextafter(hi, 1.0);
    }
    turns_ = t0;
    int best = dyadic_length(t0).second;
    for (double t = lo; t <= hi; t = std::nextafter(t, 1.0)) {
      if (t > 0.0 && t < 1.0 && two_pi * t == theta) {
        if (const int k = dyadic_length(t).second; k < best) {
          best = k;
          turns_ = t;
        }
      }
    }
    const auto [mant, k] = dyadic_length(turns_);
    if (k <= 63) {
      exact_ = true;
      mantissa_ = mant;
      shift_ = k;
    }
  }

  [[nodiscard]] double turns() const noexcept { return turns_; }

  [[nodiscard]] cplx operator()(const IntPolynomial& p, std::uint64_t n) const {
    if (zero_) {
      return {1.0, 0.0};
    }
    long double frac = 0.0L;
    if (exact_) {
      if (shift_ == 0) {
        return {1.0, 0.0};
      }
      const std::uint64_t modulus = std::uint64_t{1} << shift_;
      const auto r = static_cast<unsigned __int128>(eval_mod(p, n, modulus));
      const auto prod = static_cast<std::uint64_t>((r * mantissa_) & (modulus - 1));
      frac = std::ldexp(static_cast<long double>(prod), -shift_);
    } else {
      long double value = 0.0L;
      const auto c = p.coefficients();
      for (std::size_t i = c.size(); i-- > 0;) {
        value = value * static_cast<long double>(n) + static_cast<long double>(c[i]);
      }
      frac = value * static_cast<long double>(turns_);
      frac -= std::floor(frac);
    }
    const long double angle = 2.0L * std::numbers::pi_v<long double> * frac;
    return {static_cast<double>(std::cos(angle)), static_cast<double>(std::sin(angle))};
  }

private:
  // t = mant / 2^k with mant odd (or t = 0).
  static std::pair<std::uint64_t, int> dyadic_length(double t) {
    int e = 0;
    const double f = std::frexp(t, &e);
    auto mant = static_cast<std::uint64_t>(std::ldexp(f, 53));
    int k = 53 - e;
    while (k > 0 && (mant & 1U) == 0) {
      mant >>= 1;
      --k;
    }
    return {mant, k};
  }

  double turns_ = 0.0;
  bool zero_ = false;
  bool exact_ = false;
  std::uint64_t mantissa_ = 0;
  int shift_ = 0;
};

// (1/N) sum_{n<=N} nu(n) e^{i P(n) theta}, floating-phase path.
inline cplx weighted_poly_sum(const WeightTable& table, const IntPolynomial& p, double theta,
                              std::uint64_t n_max) {
  if (n_max == 0) {
    throw domain_error("N must be positive");
  }
  table.require_covers(n_max);
  const FloatingPhase phase(theta);
  PairwiseSum<cplx> acc;
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    if (const int w = table[n]; w != 0) {
      acc.add(static_cast<double>(w) * phase(p, n));
    }
  }
  return acc.total() / static_cast<double>(n_max);
}

// Same sum at theta = 2 pi a / q with exact phases: P(n) mod q, then one
// lookup into the q-th roots of unity.
inline cplx weighted_poly_sum_rational(const WeightTable& table, const IntPolynomial& p,
                                       std::uint64_t a, std::uint64_t q, std::uint64_t n_max) {
  if (n_max == 0) {
    throw domain_error("N must be positive");
  }
  if (q == 0) {
    throw domain_error("frequency denominator must be positive");
  }
  table.require_covers(n_max);
  const auto plan = FourierPlan::get(q);
  const auto a_mod = static_cast<unsigned __int128>(a % q);
  PairwiseSum<cplx> acc;
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    if (const int w = table[n]; w != 0) {
      const auto e = static_cast<std::uint64_t>((a_mod * eval_mod(p, n, q)) % q);
      acc.add(static_cast<double>(w) * plan->root(e, +1));
    }
  }
  return acc.total() / static_cast<double>(n_max);
}

// Frequencies theta in [0, 2 pi). A rational grid enumerates 2 pi a / Q and
// is evaluated with exact phases; a uniform grid enumerates the same points
// as doubles and goes through the floating-phase path.
class FrequencyGrid {
public:
  enum class Mode { Rational, Uniform };

  static FrequencyGrid rational(std::uint64_t denominator) {
    return FrequencyGrid(Mode::Rational, denominator);
  }
  static FrequencyGrid uniform(std::uint64_t points) { return FrequencyGrid(Mode::Uniform, points); }

  [[nodiscard]] Mode mode() const noexcept { return mode_; }
  [[nodiscard]] std::uint64_t size() const noexcept { return size_; }
  [[nodiscard]] double theta(std::uint64_t i) const noexcept {
    return two_pi * static_cast<double>(i) / static_cast<double>(size_);
  }

private:
  FrequencyGrid(Mode mode, std::uint64_t size) : mode_(mode), size_(size) {
    if (size == 0) {
      throw domain_error("frequency grid must be nonempty");
    }
  }

  Mode mode_;
  std::uint64_t size_;
};

struct GridMax {
  std::uint64_t index = 0;
  double theta = 0.0;
  cplx value{};
  double modulus = 0.0;
};

namespace detail {

inline GridMax pick_max(const FrequencyGrid& grid, std::span<const cplx> values) {
  GridMax best{0, grid.theta(0), values[0], std::abs(values[0])};
  for (std::uint64_t i = 1; i < values.size(); ++i) {
    const double m = std::abs(values[i]);
    if (m > best.modulus * (1.0 + grid_tie_tolerance)) {
      best = {i, grid.theta(i), values[i], m};
    }
  }
  return best;
}

// All grid values from a residue histogram h[r] = sum_{P(n) = r mod q} nu(n).
inline std::vector<cplx> rational_grid_values(std::span<const std::int64_t> histogram,
                                              std::uint64_t n_max) {
  const std::uint64_t q = histogram.size();
  const auto plan = FourierPlan::get(q);
  std::vector<std::uint64_t> support;
  for (std::uint64_t r = 0; r < q; ++r) {
    if (histogram[r] != 0) {
      support.push_back(r);
    }
  }
  std::vector<cplx> values(q);
  const double inv_n = 1.0 / static_cast<double>(n_max);
  parallel_for(q, [&](std::size_t a) {
    PairwiseSum<cplx> acc;
    for (const auto r : support) {
      const auto e = static_cast<std::uint64_t>(
          (static_cast<unsigned __int128>(a) * r) % q);
      acc.add(static_cast<double>(histogram[r]) * plan->root(e, +1));
    }
    values[a] = acc.total() * inv_n;
  });
  return values;
}

} // namespace detail

// Every grid value of the weighted sum at length N, in grid order.
inline std::vector<cplx> grid_values(const WeightTable& table, const IntPolynomial& p,
                                     const FrequencyGrid& grid, std::uint64_t n_max) {
  if (n_max == 0) {
    throw domain_error("N must be positive");
  }
  table.require_covers(n_max);
  if (grid.mode() == FrequencyGrid::Mode::Rational) {
    std::vector<std::int64_t> histogram(grid.size(), 0);
    for (std::uint64_t n = 1; n <= n_max; ++n) {
      if (const int w = table[n]; w != 0) {
        histogram[eval_mod(p, n, grid.size())] += w;
      }
    }
    return detail::rational_grid_values(histogram, n_max);
  }
  std::vector<cplx> values(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    values[i] = weighted_poly_sum(table, p, grid.theta(i), n_max);
  });
  return values;
}

// Grid point maximizing |weighted sum|; ties go to the smallest theta.
inline GridMax max_over_grid(const WeightTable& table, const IntPolynomial& p,
                             const FrequencyGrid& grid, std::uint64_t n_max) {
  const auto values = grid_values(table, p, grid, n_max);
  return detail::pick_max(grid, values);
}

struct DecayRow {
  std::uint64_t n = 0;
  double max_abs = 0.0;
  double theta_star = 0.0;
};

// Least-squares fit of log(max_abs) = log(C) - A log(log N).
struct DecayFit {
  double exponent = 0.0;         // A
  double exponent_stderr = 0.0;
  double constant = 0.0;         // C
  std::vector<double> residuals; // one per fitted row
  std::size_t points = 0;
};

struct DecayProfile {
  std::vector<DecayRow> rows;
  std::optional<DecayFit> fit; // empty when fewer than three rows are fittable
};

inline std::optional<DecayFit> fit_log_decay(std::span<const DecayRow> rows) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& r : rows) {
    if (r.n >= 3 && r.max_abs > 0.0) {
      xs.push_back(std::log(std::log(static_cast<double>(r.n))));
      ys.push_back(std::log(r.max_abs));
    }
  }
  const std::size_t m = xs.size();
  if (m < 3) {
    return std::nullopt;
  }
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) {
    return std::nullopt;
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  DecayFit fit;
  fit.points = m;
  fit.exponent = -slope;
  fit.constant = std::exp(intercept);
  double ssr = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double res = ys[i] - (intercept + slope * xs[i]);
    fit.residuals.push_back(res);
    ssr += res * res;
  }
  fit.exponent_stderr = std::sqrt(ssr / static_cast<double>(m - 2) / sxx);
  return fit;
}

// max_over_grid along an increasing list of N, plus the C / log^A N fit.
inline DecayProfile decay_profile(const WeightTable& table, const IntPolynomial& p,
                                  const FrequencyGrid& grid, std::span<const std::uint64_t> n_list) {
  if (n_list.size() < 3) {
    throw fit_error("decay profile needs at least three lengths");
  }
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] == 0 || (i > 0 && n_list[i] <= n_list[i - 1])) {
      throw domain_error("decay profile lengths must be positive and strictly increasing");
    }
  }
  table.require_covers(n_list.back());
  DecayProfile profile;
  if (grid.mode() == FrequencyGrid::Mode::Rational) {
    std::vector<std::int64_t> histogram(grid.size(), 0);
    std::uint64_t done = 0;
    for (const auto n_max : n_list) {
      for (std::uint64_t n = done + 1; n <= n_max; ++n) {
        if (const int w = table[n]; w != 0) {
          histogram[eval_mod(p, n, grid.size())] += w;
        }
      }
      done = n_max;
      const auto values = detail::rational_grid_values(histogram, n_max);
      const auto best = detail::pick_max(grid, values);
      profile.rows.push_back({n_max, best.modulus, best.theta});
    }
  } else {
    for (const auto n_max : n_list) {
      const auto best = max_over_grid(table, p, grid, n_max);
      profile.rows.push_back({n_max, best.modulus, best.theta});
    }
  }
  profile.fit = fit_log_decay(profile.rows);
  return profile;
}

struct ShortIntervalSum {
  cplx value{};
  bool zhan_range = false; // M >= N^{5/8}
};

namespace detail {

inline void check_short_interval(const WeightTable& table, std::uint64_t start, std::uint64_t span) {
  if (start == 0 || span == 0) {
    throw domain_error("short interval needs N >= 1 and M >= 1");
  }
  if (start + span > table.limit()) {
    throw bounds_error("short interval [" + std::to_string(start) + ", " +
                       std::to_string(start + span) + "] exceeds table limit " +
                       std::to_string(table.limit()));
  }
}

inline bool zhan_range(std::uint64_t start, std::uint64_t span) {
  return static_cast<double>(span) >= std::pow(static_cast<double>(start), 0.625);
}

} // namespace detail

// (1/M) sum_{N <= n <= N+M} nu(n) e^{i n theta}; both endpoints included.
inline ShortIntervalSum short_interval_sum(const WeightTable& table, double theta,
                                           std::uint64_t start, std::uint64_t span) {
  detail::check_short_interval(table, start, span);
  const FloatingPhase phase(theta);
  const IntPolynomial identity({0, 1});
  PairwiseSum<cplx> acc;
  for (std::uint64_t n = start; n <= start + span; ++n) {
    if (const int w = table[n]; w != 0) {
      acc.add(static_cast<double>(w) * phase(identity, n));
    }
  }
  return {acc.total() / static_cast<double>(span), detail::zhan_range(start, span)};
}

// Short-interval sum at theta = 2 pi a / q with exact phases.
inline ShortIntervalSum short_interval_sum_rational(const WeightTable& table, std::uint64_t a,
                                                    std::uint64_t q, std::uint64_t start,
                                                    std::uint64_t span) {
  detail::check_short_interval(table, start, span);
  if (q == 0) {
    throw domain_error("frequency denominator must be positive");
  }
  const auto plan = FourierPlan::get(q);
  const auto a_mod = static_cast<unsigned __int128>(a % q);
  PairwiseSum<cplx> acc;
  for (std::uint64_t n = start; n <= start + span; ++n) {
    if (const int w = table[n]; w != 0) {
      acc.add(static_cast<double>(w) * plan->root(static_cast<std::uint64_t>((a_mod * (n % q)) % q), +1));
    }
  }
  return {acc.total() / static_cast<double>(span), detail::zhan_range(start, span)};
}

} // namespace ergolab
