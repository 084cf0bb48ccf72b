#pragma once

// Finitary Fourier reduction of the weighted bilinear average
//
//   A_N(j) = (1/N) sum_{n<=N} nu(n) f(j + P(n)) g(j + Q(n))   on Z_J
//
// through the coefficients
//
//   D_{N,k,l} = (1/N) sum_{n<=N} nu(n) chi_k(P(n)) chi_l(Q(n)),
//
// for which A_N(j) = sum_{k,l} F(f)(chi_k) F(g)(chi_l) D_{N,k,l} chi_{k+l}(j).
// Grouping by s = k + l gives the Fourier coefficients of A_N,
//
//   B_s = sum_k F(f)(chi_k) F(g)(chi_{s-k}) D_{N,k,s-k},
//
// and Parseval turns (1/J) sum_j |A_N(j)|^2 into sum_s |B_s|^2.
//
// Kernels are finite signed measures on Z_J or Z_J x Z_J. Their transform is
// the measure transform  F(mu)(chi_k, chi_s) = sum_{a,b} mu(a,b) chi_k(a) chi_s(b)
// (positive exponent, no 1/J), which is the convention under which the
// off-diagonal kernel L_N, with mass nu(n)/N at (P(n) - Q(n), Q(n)),
// satisfies F(L_N)(chi_k, chi_s) = D_{N,k,s-k}.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
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

// D_{N,k,l} stored in slice layout: slice(k, s) = D_{N,k,s-k}.
class DCoefficients {
public:
  DCoefficients(std::uint64_t period, std::uint64_t length, std::vector<cplx> slices)
      : period_(period), length_(length), slices_(std::move(slices)) {
    if (slices_.size() != period_ * period_) {
      throw shape_error("D coefficient table must be J x J");
    }
  }

  [[nodiscard]] std::uint64_t period() const noexcept { return period_; }
  [[nodiscard]] std::uint64_t length() const noexcept { return length_; }

  // D_{N,k,l}, indices mod J.
  [[nodiscard]] cplx operator()(std::uint64_t k, std::uint64_t l) const noexcept {
    k %= period_;
    return slices_[k * period_ + (k + l % period_) % period_];
  }

  [[nodiscard]] cplx slice(std::uint64_t k, std::uint64_t s) const noexcept {
    return slices_[k * period_ + s];
  }

  // Writable entry; used by fault-injection fixtures.
  [[nodiscard]] cplx& slice_ref(std::uint64_t k, std::uint64_t s) noexcept {
    return slices_[k * period_ + s];
  }

  [[nodiscard]] std::span<const cplx> slices() const noexcept { return slices_; }

  [[nodiscard]] double max_modulus() const noexcept {
    double m = 0.0;
    for (const auto& c : slices_) {
      m = std::max(m, std::abs(c));
    }
    return m;
  }

private:
  std::uint64_t period_;
  std::uint64_t length_;
  std::vector<cplx> slices_;
};

// Signed measure (1/N) sum nu(n) delta_{x_n} on Z_J, stored as integer
// masses (numerators over N).
class Kernel1D {
public:
  Kernel1D(std::uint64_t period, std::uint64_t length) : period_(period), length_(length) {}

  void add(std::uint64_t x, std::int64_t weight) {
    if (weight != 0) {
      auto& m = counts_[x % period_];
      m += weight;
      if (m == 0) {
        counts_.erase(x % period_);
      }
    }
  }

  [[nodiscard]] std::uint64_t period() const noexcept { return period_; }
  [[nodiscard]] std::uint64_t length() const noexcept { return length_; }
  [[nodiscard]] const std::map<std::uint64_t, std::int64_t>& counts() const noexcept { return counts_; }

  [[nodiscard]] double mass(std::uint64_t x) const {
    const auto it = counts_.find(x % period_);
    return it == counts_.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(length_);
  }

  [[nodiscard]] double total_mass() const {
    std::int64_t t = 0;
    for (const auto& [x, c] : counts_) {
      t += c;
    }
    return static_cast<double>(t) / static_cast<double>(length_);
  }

  [[nodiscard]] double total_variation() const {
    std::int64_t t = 0;
    for (const auto& [x, c] : counts_) {
      t += c < 0 ? -c : c;
    }
    return static_cast<double>(t) / static_cast<double>(length_);
  }

  // sum_x K(x) chi_k(x).
  [[nodiscard]] cplx transform(std::uint64_t k) const {
    const auto plan = FourierPlan::get(period_);
    PairwiseSum<cplx> acc;
    for (const auto& [x, c] : counts_) {
      const auto e = static_cast<std::uint64_t>((static_cast<unsigned __int128>(k % period_) * x) % period_);
      acc.add(static_cast<double>(c) * plan->root(e, +1));
    }
    return acc.total() / static_cast<double>(length_);
  }

private:
  std::uint64_t period_;
  std::uint64_t length_;
  std::map<std::uint64_t, std::int64_t> counts_;
};

// Signed measure on Z_J x Z_J, same storage convention as Kernel1D.
class Kernel2D {
public:
  using Point = std::pair<std::uint64_t, std::uint64_t>;

  Kernel2D(std::uint64_t period, std::uint64_t length) : period_(period), length_(length) {}

  void add(std::uint64_t a, std::uint64_t b, std::int64_t weight) {
    if (weight != 0) {
      const Point key{a % period_, b % period_};
      auto& m = counts_[key];
      m += weight;
      if (m == 0) {
        counts_.erase(key);
      }
    }
  }

  [[nodiscard]] std::uint64_t period() const noexcept { return period_; }
  [[nodiscard]] std::uint64_t length() const noexcept { return length_; }
  [[nodiscard]] const std::map<Point, std::int64_t>& counts() const noexcept { return counts_; }

  [[nodiscard]] double mass(std::uint64_t a, std::uint64_t b) const {
    const auto it = counts_.find({a % period_, b % period_});
    return it == counts_.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(length_);
  }

  [[nodiscard]] double total_mass() const {
    std::int64_t t = 0;
    for (const auto& [x, c] : counts_) {
      t += c;
    }
    return static_cast<double>(t) / static_cast<double>(length_);
  }

  [[nodiscard]] double total_variation() const {
    std::int64_t t = 0;
    for (const auto& [x, c] : counts_) {
      t += c < 0 ? -c : c;
    }
    return static_cast<double>(t) / static_cast<double>(length_);
  }

  // sum_{a,b} L(a,b) chi_k(a) chi_s(b) at a single point.
  [[nodiscard]] cplx transform(std::uint64_t k, std::uint64_t s) const {
    const auto plan = FourierPlan::get(period_);
    PairwiseSum<cplx> acc;
    for (const auto& [pt, c] : counts_) {
      const auto e = static_cast<std::uint64_t>(
          (static_cast<unsigned __int128>(k % period_) * pt.first +
           static_cast<unsigned __int128>(s % period_) * pt.second) %
          period_);
      acc.add(static_cast<double>(c) * plan->root(e, +1));
    }
    return acc.total() / static_cast<double>(length_);
  }

  // Full table X[k][s] = F(L)(chi_k, chi_s) via the 2-D FFT.
  [[nodiscard]] std::vector<cplx> transform_all() const {
    std::vector<cplx> dense(period_ * period_, 0.0);
    for (const auto& [pt, c] : counts_) {
      dense[pt.first * period_ + pt.second] = static_cast<double>(c);
    }
    transform_2d(dense, period_, +1);
    const double inv = 1.0 / static_cast<double>(length_);
    for (auto& x : dense) {
      x *= inv;
    }
    return dense;
  }

private:
  std::uint64_t period_;
  std::uint64_t length_;
  std::map<Point, std::int64_t> counts_;
};

struct Kernels {
  Kernel1D k_p;           // K_{N,P}
  Kernel1D k_q;           // K_{N,Q}
  Kernel2D off_diagonal;  // K_{N,P} (.) K_{N,Q}: mass at (P(n), Q(n))
  Kernel2D l_n;           // L_N: mass at (P(n) - Q(n), Q(n))
};

inline Kernels build_kernels(const WeightTable& table, const IntPolynomial& p, const IntPolynomial& q,
                             std::uint64_t n_max, std::uint64_t period) {
  if (n_max == 0 || period == 0) {
    throw domain_error("kernels need N >= 1 and J >= 1");
  }
  table.require_covers(n_max);
  Kernels k{Kernel1D(period, n_max), Kernel1D(period, n_max), Kernel2D(period, n_max),
            Kernel2D(period, n_max)};
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    const int w = table[n];
    if (w == 0) {
      continue;
    }
    const std::uint64_t pn = eval_mod(p, n, period);
    const std::uint64_t qn = eval_mod(q, n, period);
    k.k_p.add(pn, w);
    k.k_q.add(qn, w);
    k.off_diagonal.add(pn, qn, w);
    k.l_n.add((pn + period - qn) % period, qn, w);
  }
  return k;
}

// D_{N,k,l} for all k, l via the kernel route: accumulate L_N in O(N), then
// one 2-D FFT. Cost O(N + J^2 log J) time and J^2 complex entries of memory.
inline DCoefficients d_coefficients(const WeightTable& table, const IntPolynomial& p,
                                    const IntPolynomial& q, std::uint64_t n_max, std::uint64_t period) {
  if (n_max == 0 || period == 0) {
    throw domain_error("D coefficients need N >= 1 and J >= 1");
  }
  table.require_covers(n_max);
  if (period > (std::uint64_t{1} << 14)) {
    throw capacity_error("J x J coefficient table too large for J = " + std::to_string(period));
  }
  std::vector<cplx> dense(period * period, 0.0);
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    if (const int w = table[n]; w != 0) {
      const std::uint64_t pn = eval_mod(p, n, period);
      const std::uint64_t qn = eval_mod(q, n, period);
      dense[((pn + period - qn) % period) * period + qn] += static_cast<double>(w);
    }
  }
  transform_2d(dense, period, +1);
  const double inv = 1.0 / static_cast<double>(n_max);
  for (auto& x : dense) {
    x *= inv;
  }
  return {period, n_max, std::move(dense)};
}

namespace detail {
inline void require_same_period(std::uint64_t a, std::uint64_t b, const char* what) {
  if (a != b) {
    throw shape_error(std::string(what) + ": period mismatch " + std::to_string(a) + " vs " +
                      std::to_string(b));
  }
}
} // namespace detail

// Fourier coefficients B_s of A_N, s = 0..J-1.
inline Spectrum average_spectrum(const Spectrum& f_spec, const Spectrum& g_spec, const DCoefficients& d) {
  detail::require_same_period(f_spec.period(), g_spec.period(), "average_spectrum");
  detail::require_same_period(f_spec.period(), d.period(), "average_spectrum");
  const std::uint64_t jp = d.period();
  std::vector<cplx> b(jp);
  parallel_for(jp, [&](std::size_t s) {
    PairwiseSum<cplx> acc;
    for (std::uint64_t k = 0; k < jp; ++k) {
      acc.add(f_spec[k] * g_spec[(s + jp - k) % jp] * d.slice(k, s));
    }
    b[s] = acc.total();
  });
  return Spectrum(std::move(b));
}

// A_N(j) from the spectral side of the convolution identity.
inline cplx spectral_average(const Spectrum& f_spec, const Spectrum& g_spec, const DCoefficients& d,
                             std::int64_t j) {
  const Spectrum b = average_spectrum(f_spec, g_spec, d);
  const std::uint64_t jp = d.period();
  const auto plan = FourierPlan::get(jp);
  const auto jm = static_cast<std::uint64_t>(((j % static_cast<std::int64_t>(jp)) + static_cast<std::int64_t>(jp)) %
                                             static_cast<std::int64_t>(jp));
  PairwiseSum<cplx> acc;
  for (std::uint64_t s = 0; s < jp; ++s) {
    acc.add(b[s] * plan->root(static_cast<std::uint64_t>((static_cast<unsigned __int128>(s) * jm) % jp), +1));
  }
  return acc.total();
}

// A_N(j) for every j at once: B_s followed by one inverse transform.
inline PeriodicSignal spectral_average_all(const Spectrum& f_spec, const Spectrum& g_spec,
                                           const DCoefficients& d) {
  return idft(average_spectrum(f_spec, g_spec, d));
}

// Direct evaluation of (1/N) sum nu(n) f(j + P(n)) g(j + Q(n)).
inline cplx direct_average(const WeightTable& table, const IntPolynomial& p, const IntPolynomial& q,
                           const PeriodicSignal& f, const PeriodicSignal& g, std::uint64_t n_max,
                           std::int64_t j) {
  detail::require_same_period(f.period(), g.period(), "direct_average");
  if (n_max == 0) {
    throw domain_error("N must be positive");
  }
  table.require_covers(n_max);
  const std::uint64_t jp = f.period();
  const auto jm = static_cast<std::uint64_t>(((j % static_cast<std::int64_t>(jp)) + static_cast<std::int64_t>(jp)) %
                                             static_cast<std::int64_t>(jp));
  PairwiseSum<cplx> acc;
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    if (const int w = table[n]; w != 0) {
      acc.add(static_cast<double>(w) * f[(jm + eval_mod(p, n, jp)) % jp] * g[(jm + eval_mod(q, n, jp)) % jp]);
    }
  }
  return acc.total() / static_cast<double>(n_max);
}

inline PeriodicSignal direct_average_all(const WeightTable& table, const IntPolynomial& p,
                                         const IntPolynomial& q, const PeriodicSignal& f,
                                         const PeriodicSignal& g, std::uint64_t n_max) {
  detail::require_same_period(f.period(), g.period(), "direct_average_all");
  if (n_max == 0) {
    throw domain_error("N must be positive");
  }
  table.require_covers(n_max);
  const std::uint64_t jp = f.period();
  std::vector<std::uint64_t> pn;
  std::vector<std::uint64_t> qn;
  std::vector<double> wn;
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    if (const int w = table[n]; w != 0) {
      pn.push_back(eval_mod(p, n, jp));
      qn.push_back(eval_mod(q, n, jp));
      wn.push_back(w);
    }
  }
  std::vector<cplx> out(jp);
  const double inv = 1.0 / static_cast<double>(n_max);
  parallel_for(jp, [&](std::size_t j) {
    PairwiseSum<cplx> acc;
    for (std::size_t i = 0; i < wn.size(); ++i) {
      std::uint64_t a = j + pn[i];
      std::uint64_t b = j + qn[i];
      a = a >= jp ? a - jp : a;
      b = b >= jp ? b - jp : b;
      acc.add(wn[i] * f[a] * g[b]);
    }
    out[j] = acc.total() * inv;
  });
  return PeriodicSignal(std::move(out));
}

// The squared norm (1/J) sum_j |A_N(j)|^2, evaluated as sum_s |B_s|^2.
inline double l2_norm_of_average(const Spectrum& f_spec, const Spectrum& g_spec,
                                         const DCoefficients& d) {
  return average_spectrum(f_spec, g_spec, d).energy();
}

// (1/J) sum_j |A_N(j)|^2 from the direct averages.
inline double direct_mean_square(const PeriodicSignal& average) {
  const double n2 = average.norm(2.0);
  return n2 * n2;
}

struct L4Row {
  std::uint64_t n = 0;
  double average_norm = 0.0;          // ||A_N||_2, direct path
  double average_norm_spectral = 0.0; // ||A_N||_2 via sum_s |B_s|^2; NaN unless cross-checked
  double l4_product = 0.0;            // ||f||_4 ||g||_4
  double ratio = 0.0;                 // average_norm / l4_product (0 when the product is 0)
};

// ||A_N||_2 / (||f||_4 ||g||_4) along an increasing list of N. The direct
// path runs incrementally across the list; cross_check adds the spectral
// path per row.
inline std::vector<L4Row> l4_bound_report(const PeriodicSignal& f, const PeriodicSignal& g,
                                          const WeightTable& table, const IntPolynomial& p,
                                          const IntPolynomial& q, std::span<const std::uint64_t> n_list,
                                          bool cross_check = false) {
  detail::require_same_period(f.period(), g.period(), "l4_bound_report");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] == 0 || (i > 0 && n_list[i] <= n_list[i - 1])) {
      throw domain_error("N list must be positive and strictly increasing");
    }
  }
  if (n_list.empty()) {
    return {};
  }
  table.require_covers(n_list.back());
  const std::uint64_t jp = f.period();
  const double product = f.norm(4.0) * g.norm(4.0);
  std::vector<PairwiseSum<cplx>> sums(jp);
  std::vector<L4Row> rows;
  std::uint64_t done = 0;
  std::optional<Spectrum> f_spec;
  std::optional<Spectrum> g_spec;
  if (cross_check) {
    f_spec = dft(f);
    g_spec = dft(g);
  }
  for (const auto n_max : n_list) {
    std::vector<std::uint64_t> pn;
    std::vector<std::uint64_t> qn;
    std::vector<double> wn;
    for (std::uint64_t n = done + 1; n <= n_max; ++n) {
      if (const int w = table[n]; w != 0) {
        pn.push_back(eval_mod(p, n, jp));
        qn.push_back(eval_mod(q, n, jp));
        wn.push_back(w);
      }
    }
    done = n_max;
    parallel_for(jp, [&](std::size_t j) {
      for (std::size_t i = 0; i < wn.size(); ++i) {
        sums[j].add(wn[i] * f[(j + pn[i]) % jp] * g[(j + qn[i]) % jp]);
      }
    });
    PairwiseSum<double> energy;
    const double inv = 1.0 / static_cast<double>(n_max);
    for (std::uint64_t j = 0; j < jp; ++j) {
      energy.add(std::norm(sums[j].total() * inv));
    }
    L4Row row;
    row.n = n_max;
    row.average_norm = std::sqrt(energy.total() / static_cast<double>(jp));
    row.average_norm_spectral = std::nan("");
    if (cross_check) {
      const auto d = d_coefficients(table, p, q, n_max, jp);
      row.average_norm_spectral = std::sqrt(l2_norm_of_average(*f_spec, *g_spec, d));
    }
    row.l4_product = product;
    row.ratio = product > 0.0 ? row.average_norm / product : 0.0;
    rows.push_back(row);
  }
  return rows;
}

} // namespace ergolab
