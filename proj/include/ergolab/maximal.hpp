#pragma once

// Maximal and oscillation functionals of the shift average on Z_J,
//
//   A_N(j) = (1/N) sum_{n<=N} nu(n) phi(j + P(n)) psi(j + Q(n)),
//
// along a lacunary ladder: band maxima m_{N_k,N_{k+1}}(j), their oscillation
// sum, the untruncated-in-N maximal function, and the weak-type statistic.
// Every functional is computed from one running sum per j.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ergolab/error.hpp"
#include "ergolab/fourier.hpp"
#include "ergolab/ladder.hpp"
#include "ergolab/parallel.hpp"
#include "ergolab/polynomial.hpp"
#include "ergolab/summation.hpp"
#include "ergolab/weights.hpp"

namespace ergolab {

namespace detail {

// Orbit offsets and weights for n = 1..N, zero weights dropped.
struct ShiftTerms {
  std::vector<std::uint64_t> n;
  std::vector<std::uint64_t> p;
  std::vector<std::uint64_t> q;
  std::vector<double> w;
};

inline ShiftTerms shift_terms(const WeightTable& table, const IntPolynomial& p, const IntPolynomial& q,
                              std::uint64_t n_max, std::uint64_t period) {
  table.require_covers(n_max);
  ShiftTerms t;
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    if (const int w = table[n]; w != 0) {
      t.n.push_back(n);
      t.p.push_back(eval_mod(p, n, period));
      t.q.push_back(eval_mod(q, n, period));
      t.w.push_back(w);
    }
  }
  return t;
}

// Calls visit(N, A_N(j)) for each N in `checkpoints` (increasing).
template <typename Visit>
void scan_averages(const ShiftTerms& t, const PeriodicSignal& phi, const PeriodicSignal& psi, std::uint64_t j,
                   std::span<const std::uint64_t> checkpoints, Visit&& visit) {
  const std::uint64_t jp = phi.period();
  PairwiseSum<cplx> acc;
  std::size_t i = 0;
  for (const auto target : checkpoints) {
    while (i < t.n.size() && t.n[i] <= target) {
      std::uint64_t a = j + t.p[i];
      std::uint64_t b = j + t.q[i];
      a = a >= jp ? a - jp : a;
      b = b >= jp ? b - jp : b;
      acc.add(t.w[i] * phi[a] * psi[b]);
      ++i;
    }
    visit(target, acc.total() / static_cast<double>(target));
  }
}

inline void require_pair(const PeriodicSignal& phi, const PeriodicSignal& psi) {
  if (phi.period() != psi.period()) {
    throw shape_error("phi and psi must share a period");
  }
}

inline PeriodicSignal real_signal(const std::vector<double>& v) {
  std::vector<cplx> c(v.begin(), v.end());
  return PeriodicSignal(std::move(c));
}

} // namespace detail

// j -> m_{N_k,N_{k+1}}(j) for every band k = 1..K in one pass per j.
inline std::vector<PeriodicSignal> band_maximals(const PeriodicSignal& phi, const PeriodicSignal& psi,
                                                 const IntPolynomial& p, const IntPolynomial& q,
                                                 const WeightTable& table, const LacunaryLadder& ladder,
                                                 std::size_t bands = 0) {
  detail::require_pair(phi, psi);
  const std::size_t band_total = bands == 0 ? ladder.band_count() : bands;
  if (band_total == 0 || band_total > ladder.band_count()) {
    throw bounds_error("requested " + std::to_string(band_total) + " bands, ladder has " +
                       std::to_string(ladder.band_count()));
  }
  const auto ends = ladder.bands();
  const std::uint64_t top = ends[band_total];
  table.require_covers(top);
  std::vector<std::uint64_t> checkpoints;
  for (const auto m : ladder.members()) {
    if (m >= ends[0] && m <= top) {
      checkpoints.push_back(m);
    }
  }
  // Index of each band endpoint among the checkpoints.
  std::vector<std::size_t> end_index(band_total + 1);
  for (std::size_t k = 0; k <= band_total; ++k) {
    end_index[k] = static_cast<std::size_t>(
        std::lower_bound(checkpoints.begin(), checkpoints.end(), ends[k]) - checkpoints.begin());
  }
  const std::uint64_t jp = phi.period();
  const auto terms = detail::shift_terms(table, p, q, top, jp);
  std::vector<std::vector<double>> out(band_total, std::vector<double>(jp, 0.0));
  parallel_for(jp, [&](std::size_t j) {
    std::vector<cplx> averages;
    averages.reserve(checkpoints.size());
    detail::scan_averages(terms, phi, psi, j, checkpoints,
                          [&](std::uint64_t, cplx a) { averages.push_back(a); });
    for (std::size_t k = 0; k < band_total; ++k) {
      const cplx base = averages[end_index[k]];
      double m = 0.0;
      for (std::size_t i = end_index[k]; i <= end_index[k + 1]; ++i) {
        m = std::max(m, std::abs(averages[i] - base));
      }
      out[k][j] = m;
    }
  });
  std::vector<PeriodicSignal> signals;
  signals.reserve(band_total);
  for (const auto& v : out) {
    signals.push_back(detail::real_signal(v));
  }
  return signals;
}

// j -> max over N in I_rho, N_k <= N <= N_{k+1}, of |A_N(j) - A_{N_k}(j)|; k is 1-based.
inline PeriodicSignal band_maximal(const PeriodicSignal& phi, const PeriodicSignal& psi, const IntPolynomial& p,
                                   const IntPolynomial& q, const WeightTable& table,
                                   const LacunaryLadder& ladder, std::size_t k) {
  if (k == 0 || k > ladder.band_count()) {
    throw bounds_error("band index " + std::to_string(k) + " outside [1, " +
                       std::to_string(ladder.band_count()) + "]");
  }
  LacunaryLadder single = ladder;
  single.with_endpoints({ladder.bands()[k - 1], ladder.bands()[k]});
  return band_maximals(phi, psi, p, q, table, single, 1).front();
}

struct OscillationRow {
  std::size_t bands = 0;     // K
  double band_norm = 0.0;    // ||m_{N_K, N_{K+1}}||_2
  double cumulative = 0.0;   // sum_{k<=K} ||m_k||_2
  double comparison = 0.0;   // sqrt(K) ||phi||_4 ||psi||_4
  double ratio = 0.0;        // cumulative / comparison (0 when comparison is 0)
};

struct OscillationReport {
  double phi_l4 = 0.0;
  double psi_l4 = 0.0;
  std::vector<OscillationRow> rows;
};

inline OscillationReport oscillation_sum(const PeriodicSignal& phi, const PeriodicSignal& psi,
                                         const IntPolynomial& p, const IntPolynomial& q,
                                         const WeightTable& table, const LacunaryLadder& ladder,
                                         std::size_t band_total) {
  const auto maxima = band_maximals(phi, psi, p, q, table, ladder, band_total);
  OscillationReport report;
  report.phi_l4 = phi.norm(4.0);
  report.psi_l4 = psi.norm(4.0);
  const double product = report.phi_l4 * report.psi_l4;
  double cumulative = 0.0;
  for (std::size_t k = 0; k < maxima.size(); ++k) {
    OscillationRow row;
    row.bands = k + 1;
    row.band_norm = maxima[k].norm(2.0);
    cumulative += row.band_norm;
    row.cumulative = cumulative;
    row.comparison = std::sqrt(static_cast<double>(k + 1)) * product;
    row.ratio = row.comparison > 0.0 ? row.cumulative / row.comparison : 0.0;
    report.rows.push_back(row);
  }
  return report;
}

// j -> max_{1 <= N <= N_max} |A_N(j)|.
inline PeriodicSignal global_maximal(const PeriodicSignal& phi, const PeriodicSignal& psi, const IntPolynomial& p,
                                     const IntPolynomial& q, const WeightTable& table, std::uint64_t n_max) {
  detail::require_pair(phi, psi);
  if (n_max == 0) {
    throw domain_error("N_max must be positive");
  }
  const std::uint64_t jp = phi.period();
  const auto terms = detail::shift_terms(table, p, q, n_max, jp);
  std::vector<std::uint64_t> checkpoints(n_max);
  for (std::uint64_t n = 0; n < n_max; ++n) {
    checkpoints[n] = n + 1;
  }
  std::vector<double> out(jp, 0.0);
  parallel_for(jp, [&](std::size_t j) {
    double m = 0.0;
    detail::scan_averages(terms, phi, psi, j, checkpoints,
                          [&](std::uint64_t, cplx a) { m = std::max(m, std::abs(a)); });
    out[j] = m;
  });
  return detail::real_signal(out);
}

// 64 logarithmically spaced levels from 1e-4 to ||phi||_inf ||psi||_inf.
inline std::vector<double> default_lambda_grid(const PeriodicSignal& phi, const PeriodicSignal& psi,
                                               std::size_t points = 64, double low = 1e-4) {
  const double high = phi.sup_norm() * psi.sup_norm();
  if (!(high > low) || points < 2) {
    return {low};
  }
  std::vector<double> grid(points);
  const double step = std::log(high / low) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = low * std::exp(step * static_cast<double>(i));
  }
  grid.back() = high;
  return grid;
}

struct WeakTypeReport {
  double statistic = 0.0;   // max over the grid of lambda * #{j : M(j) > lambda}
  double lambda_star = 0.0; // attaining level (first on ties)
  double p = 2.0;
  double q = 2.0;
  double norm_product = 0.0; // ||phi||_p ||psi||_q, counting measure
  double ratio = 0.0;        // statistic / norm_product (0 when the product is 0)
};

// Weak-type statistic of the global maximal function under (unnormalized)
// counting measure on one period, next to ||phi||_p ||psi||_q.
inline WeakTypeReport weak_type_statistic(const PeriodicSignal& phi, const PeriodicSignal& psi,
                                          const IntPolynomial& p_poly, const IntPolynomial& q_poly,
                                          const WeightTable& table, std::uint64_t n_max,
                                          std::span<const double> lambda_grid, double p = 2.0, double q = 2.0) {
  if (lambda_grid.empty()) {
    throw config_error("lambda grid must be nonempty");
  }
  for (const double l : lambda_grid) {
    if (!(l > 0.0)) {
      throw config_error("lambda grid must be positive");
    }
  }
  const double inv_p = std::isinf(p) ? 0.0 : 1.0 / p;
  const double inv_q = std::isinf(q) ? 0.0 : 1.0 / q;
  if (!(p >= 1.0) || !(q >= 1.0) || std::abs(inv_p + inv_q - 1.0) > 1e-12) {
    throw config_error("exponents p = " + std::to_string(p) + ", q = " + std::to_string(q) +
                       " are not conjugate");
  }
  const auto maximal = global_maximal(phi, psi, p_poly, q_poly, table, n_max);
  WeakTypeReport report;
  report.p = p;
  report.q = q;
  report.lambda_star = lambda_grid.front();
  for (const double lambda : lambda_grid) {
    std::uint64_t count = 0;
    for (const auto& v : maximal.values()) {
      if (v.real() > lambda) {
        ++count;
      }
    }
    const double value = lambda * static_cast<double>(count);
    if (value > report.statistic) {
      report.statistic = value;
      report.lambda_star = lambda;
    }
  }
  report.norm_product = phi.counting_norm(p) * psi.counting_norm(q);
  report.ratio = report.norm_product > 0.0 ? report.statistic / report.norm_product : 0.0;
  return report;
}

} // namespace ergolab
