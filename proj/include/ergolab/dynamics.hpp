#pragma once

// Weighted polynomial averages along orbits of finite dynamical systems:
//
//   A_N(x) = (1/N) sum_{n<=N} nu(n) f(T^{P(n)} x) g(T^{Q(n)} x).
//
// Both systems act on a finite state space Z_m. CyclicShift is j -> j + 1
// on Z_J. RationalRotation is x -> x + p/q on {a/q}, stored as a -> a + p
// mod q. Orbit positions are computed exactly as x + step * (P(n) mod m).

#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "ergolab/error.hpp"
#include "ergolab/fourier.hpp"
#include "ergolab/ladder.hpp"
#include "ergolab/polynomial.hpp"
#include "ergolab/random.hpp"
#include "ergolab/summation.hpp"
#include "ergolab/weights.hpp"

namespace ergolab {

struct CyclicShift {
  std::uint64_t period = 1;
};

struct RationalRotation {
  std::uint64_t p = 0;
  std::uint64_t q = 1;
};

using DynamicalSystem = std::variant<CyclicShift, RationalRotation>;

// Trigonometric polynomial x -> sum c_m e^{2 pi i m x} on the circle.
struct TrigPolynomial {
  static constexpr std::size_t max_modes = 64;
  std::vector<std::pair<std::int64_t, cplx>> modes;
};

using Observable = std::variant<PeriodicSignal, TrigPolynomial>;

inline std::uint64_t state_count(const DynamicalSystem& system) {
  return std::visit(
      [](const auto& s) -> std::uint64_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, CyclicShift>) {
          return s.period;
        } else {
          return s.q;
        }
      },
      system);
}

inline std::uint64_t step_of(const DynamicalSystem& system) {
  if (const auto* r = std::get_if<RationalRotation>(&system)) {
    return r->p % r->q;
  }
  return 1;
}

inline void validate(const DynamicalSystem& system) {
  if (const auto* c = std::get_if<CyclicShift>(&system)) {
    if (c->period == 0) {
      throw domain_error("cyclic shift needs J >= 1");
    }
    return;
  }
  const auto& r = std::get<RationalRotation>(system);
  if (r.q == 0) {
    throw domain_error("rotation denominator must be positive");
  }
  if (std::gcd(r.p, r.q) != 1) {
    throw domain_error("rotation p/q needs gcd(p, q) = 1");
  }
}

inline std::string describe(const DynamicalSystem& system) {
  if (const auto* c = std::get_if<CyclicShift>(&system)) {
    return "cyclic:" + std::to_string(c->period);
  }
  const auto& r = std::get<RationalRotation>(system);
  return "rotation:" + std::to_string(r.p) + "/" + std::to_string(r.q);
}

// Values of an observable on the states 0..m-1 of a system; tabulated when
// the state space is small enough.
class ObservableEvaluator {
public:
  static constexpr std::uint64_t tabulate_limit = std::uint64_t{1} << 20;

  ObservableEvaluator(const Observable& f, std::uint64_t states) : states_(states) {
    if (const auto* sig = std::get_if<PeriodicSignal>(&f)) {
      if (sig->period() != states) {
        throw shape_error("observable period " + std::to_string(sig->period()) +
                          " differs from state count " + std::to_string(states));
      }
      table_.assign(sig->values().begin(), sig->values().end());
      return;
    }
    trig_ = std::get<TrigPolynomial>(f);
    if (trig_.modes.size() > TrigPolynomial::max_modes) {
      throw config_error("trigonometric observables are capped at 64 modes");
    }
    if (states <= tabulate_limit) {
      table_.resize(states);
      for (std::uint64_t a = 0; a < states; ++a) {
        table_[a] = evaluate_trig(a);
      }
    }
  }

  [[nodiscard]] cplx operator()(std::uint64_t a) const {
    return table_.empty() ? evaluate_trig(a) : table_[a];
  }

  [[nodiscard]] double sup_norm() const {
    if (!table_.empty()) {
      double m = 0.0;
      for (const auto& v : table_) {
        m = std::max(m, std::abs(v));
      }
      return m;
    }
    double bound = 0.0;
    for (const auto& [mode, c] : trig_.modes) {
      bound += std::abs(c);
    }
    return bound;
  }

private:
  [[nodiscard]] cplx evaluate_trig(std::uint64_t a) const {
    PairwiseSum<cplx> acc;
    for (const auto& [mode, c] : trig_.modes) {
      const auto e = static_cast<std::uint64_t>(
          (static_cast<unsigned __int128>(reduce_mod(mode, states_)) * a) % states_);
      acc.add(c * FourierPlan::root_of_unity(e, states_));
    }
    return acc.total();
  }

  std::uint64_t states_;
  TrigPolynomial trig_;
  std::vector<cplx> table_;
};

namespace detail {

struct OrbitContext {
  std::uint64_t states;
  std::uint64_t step;
  std::uint64_t start;

  // T^{power * P(n)} start.
  [[nodiscard]] std::uint64_t position(const IntPolynomial& poly, std::uint64_t n,
                                       std::uint64_t power = 1) const {
    const auto r = static_cast<unsigned __int128>(eval_mod(poly, n, states));
    const auto shift = (r * ((static_cast<unsigned __int128>(power % states) * step) % states)) % states;
    return static_cast<std::uint64_t>((start + shift) % states);
  }
};

inline OrbitContext orbit_context(const DynamicalSystem& system, std::uint64_t x) {
  validate(system);
  const std::uint64_t m = state_count(system);
  if (x >= m) {
    throw bounds_error("state " + std::to_string(x) + " outside [0, " + std::to_string(m) + ")");
  }
  return {m, step_of(system), x};
}

} // namespace detail

inline cplx bilinear_average(const DynamicalSystem& system, const Observable& f, const Observable& g,
                             const IntPolynomial& p, const IntPolynomial& q, const WeightTable& table,
                             std::uint64_t n_max, std::uint64_t x) {
  if (n_max == 0) {
    throw domain_error("N must be positive");
  }
  table.require_covers(n_max);
  const auto ctx = detail::orbit_context(system, x);
  const ObservableEvaluator fe(f, ctx.states);
  const ObservableEvaluator ge(g, ctx.states);
  PairwiseSum<cplx> acc;
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    if (const int w = table[n]; w != 0) {
      acc.add(static_cast<double>(w) * fe(ctx.position(p, n)) * ge(ctx.position(q, n)));
    }
  }
  return acc.total() / static_cast<double>(n_max);
}

// One factor f_i(T_i^{P_i(n)} x) of a multilinear average, T_i = T^power.
struct MultilinearFactor {
  Observable observable;
  IntPolynomial poly;
  std::uint64_t power = 1;
};

inline cplx multilinear_average(const DynamicalSystem& system, const std::vector<MultilinearFactor>& factors,
                                const WeightTable& table, std::uint64_t n_max, std::uint64_t x) {
  if (factors.empty()) {
    throw config_error("multilinear average needs at least one factor");
  }
  if (n_max == 0) {
    throw domain_error("N must be positive");
  }
  table.require_covers(n_max);
  const auto ctx = detail::orbit_context(system, x);
  std::vector<ObservableEvaluator> evals;
  evals.reserve(factors.size());
  for (const auto& fct : factors) {
    evals.emplace_back(fct.observable, ctx.states);
  }
  PairwiseSum<cplx> acc;
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    const int w = table[n];
    if (w == 0) {
      continue;
    }
    cplx term = static_cast<double>(w);
    for (std::size_t i = 0; i < factors.size(); ++i) {
      term *= evals[i](ctx.position(factors[i].poly, n, factors[i].power));
    }
    acc.add(term);
  }
  return acc.total() / static_cast<double>(n_max);
}

struct TraceRow {
  std::uint64_t n = 0;
  cplx value{};
};

struct AverageTrace {
  std::uint64_t start = 0;
  WeightKind weight = WeightKind::Custom;
  std::string p;
  std::string q;
  std::vector<TraceRow> rows;
};

// A_N(x) along N in I_rho, N <= min(limit, table.limit()), with one running
// sum shared by all rows.
inline AverageTrace convergence_trace(const DynamicalSystem& system, const Observable& f,
                                      const Observable& g, const IntPolynomial& p, const IntPolynomial& q,
                                      const WeightTable& table, double rho, std::uint64_t x,
                                      std::uint64_t limit = 0) {
  const std::uint64_t top = limit == 0 ? table.limit() : std::min(limit, table.limit());
  const LacunaryLadder ladder(rho, top);
  const auto ctx = detail::orbit_context(system, x);
  const ObservableEvaluator fe(f, ctx.states);
  const ObservableEvaluator ge(g, ctx.states);
  AverageTrace trace{x, table.kind(), p.to_string(), q.to_string(), {}};
  PairwiseSum<cplx> acc;
  std::uint64_t n = 0;
  for (const auto target : ladder.members()) {
    for (++n; n <= target; ++n) {
      if (const int w = table[n]; w != 0) {
        acc.add(static_cast<double>(w) * fe(ctx.position(p, n)) * ge(ctx.position(q, n)));
      }
    }
    n = target;
    trace.rows.push_back({target, acc.total() / static_cast<double>(target)});
  }
  return trace;
}

struct SplitBound {
  double lhs = 0.0; // |A_N(f - f1, g - g1)(x)|
  double rhs = 0.0; // product of the two orbit L^2 averages
};

// Cauchy-Schwarz bound for the difference average:
// |A_N(f-f1, g-g1)| <= ((1/N) sum |f-f1|^2(T^{P(n)}x))^{1/2} ((1/N) sum |g-g1|^2(T^{Q(n)}x))^{1/2}.
inline SplitBound cauchy_schwarz_split(const DynamicalSystem& system, const Observable& f,
                                       const Observable& f1, const Observable& g, const Observable& g1,
                                       const IntPolynomial& p, const IntPolynomial& q,
                                       const WeightTable& table, std::uint64_t n_max, std::uint64_t x) {
  if (n_max == 0) {
    throw domain_error("N must be positive");
  }
  table.require_covers(n_max);
  const auto ctx = detail::orbit_context(system, x);
  const ObservableEvaluator fe(f, ctx.states);
  const ObservableEvaluator f1e(f1, ctx.states);
  const ObservableEvaluator ge(g, ctx.states);
  const ObservableEvaluator g1e(g1, ctx.states);
  PairwiseSum<cplx> avg;
  PairwiseSum<double> df2;
  PairwiseSum<double> dg2;
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    const std::uint64_t a = ctx.position(p, n);
    const std::uint64_t b = ctx.position(q, n);
    const cplx df = fe(a) - f1e(a);
    const cplx dg = ge(b) - g1e(b);
    df2.add(std::norm(df));
    dg2.add(std::norm(dg));
    if (const int w = table[n]; w != 0) {
      avg.add(static_cast<double>(w) * df * dg);
    }
  }
  const double inv = 1.0 / static_cast<double>(n_max);
  return {std::abs(avg.total() * inv), std::sqrt(df2.total() * inv) * std::sqrt(dg2.total() * inv)};
}

// T is a bijection of the state space, i.e. it pushes counting measure to itself.
inline bool preserves_counting_measure(const DynamicalSystem& system) {
  validate(system);
  const std::uint64_t m = state_count(system);
  if (m > (std::uint64_t{1} << 28)) {
    throw capacity_error("state space too large for an explicit permutation check");
  }
  const std::uint64_t step = step_of(system);
  std::vector<std::uint8_t> hit(m, 0);
  for (std::uint64_t a = 0; a < m; ++a) {
    const std::uint64_t image = static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) + step) % m);
    if (hit[image] != 0) {
      return false;
    }
    hit[image] = 1;
  }
  return true;
}

// The orbit of a/q under x -> x + p/q visits every point of {0, 1/q, ...}.
inline bool orbit_visits_all(const RationalRotation& rotation, std::uint64_t start) {
  if (rotation.q == 0 || start >= rotation.q) {
    throw bounds_error("start outside the rotation's state space");
  }
  if (rotation.q > (std::uint64_t{1} << 28)) {
    throw capacity_error("state space too large for an explicit orbit check");
  }
  std::vector<std::uint8_t> seen(rotation.q, 0);
  std::uint64_t a = start;
  const std::uint64_t step = rotation.p % rotation.q;
  for (std::uint64_t i = 0; i < rotation.q; ++i) {
    if (seen[a] != 0) {
      return false;
    }
    seen[a] = 1;
    a = static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) + step) % rotation.q);
  }
  return a == start;
}

// Last continued-fraction convergent p/q of frac(alpha) with q <= q_max.
inline RationalRotation convergent_rotation(long double alpha, std::uint64_t q_max) {
  if (q_max == 0) {
    throw domain_error("q_max must be positive");
  }
  long double x = alpha - std::floor(alpha);
  std::uint64_t p_prev = 1;
  std::uint64_t q_prev = 0;
  std::uint64_t p_cur = 0;
  std::uint64_t q_cur = 1;
  for (int iter = 0; iter < 64 && x != 0.0L; ++iter) {
    const long double inv = 1.0L / x;
    const long double a_ld = std::floor(inv);
    if (a_ld > static_cast<long double>(q_max)) {
      break;
    }
    const auto a = static_cast<std::uint64_t>(a_ld);
    const unsigned __int128 q_next = static_cast<unsigned __int128>(a) * q_cur + q_prev;
    if (q_next > q_max) {
      break;
    }
    const std::uint64_t p_next = a * p_cur + p_prev;
    p_prev = p_cur;
    q_prev = q_cur;
    p_cur = p_next;
    q_cur = static_cast<std::uint64_t>(q_next);
    x = inv - a_ld;
  }
  return {p_cur % q_cur, q_cur};
}

// Start points for a.e.-style sampling: 0 first, then seeded draws.
inline std::vector<std::uint64_t> sample_starts(const DynamicalSystem& system, std::size_t count,
                                                std::uint64_t seed) {
  validate(system);
  const std::uint64_t m = state_count(system);
  const CounterRng rng(seed, 0x5A);
  std::vector<std::uint64_t> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(i == 0 ? 0 : rng.below(static_cast<std::uint32_t>(i), m));
  }
  return out;
}

// Shift-model observable phi_x(n) = f(T^n x) for |n| <= 2 * half_width and 0
// elsewhere, stored with period `period` (default 2 * (4 * half_width + 1)).
inline PeriodicSignal window_embedding(const DynamicalSystem& system, const Observable& f, std::uint64_t x,
                                       std::uint64_t half_width, std::uint64_t period = 0) {
  const auto ctx = detail::orbit_context(system, x);
  const std::uint64_t width = 4 * half_width + 1;
  if (period == 0) {
    period = 2 * width;
  }
  if (period < width) {
    throw shape_error("embedding period shorter than the window");
  }
  const ObservableEvaluator fe(f, ctx.states);
  std::vector<cplx> values(period, 0.0);
  const auto hw = static_cast<std::int64_t>(2 * half_width);
  for (std::int64_t n = -hw; n <= hw; ++n) {
    const auto m = static_cast<std::int64_t>(ctx.states);
    const std::int64_t shift = ((n % m) + m) % m;
    const auto state = static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(ctx.start) + static_cast<unsigned __int128>(shift) * ctx.step) % ctx.states);
    const auto slot = static_cast<std::uint64_t>(((n % static_cast<std::int64_t>(period)) +
                                                  static_cast<std::int64_t>(period)) %
                                                 static_cast<std::int64_t>(period));
    values[slot] = fe(state);
  }
  return PeriodicSignal(std::move(values));
}

} // namespace ergolab
