#pragma once

// Discrete Fourier analysis on Z_J.
//
// Normalization: for a J-periodic f,
//
//   F(f)(chi_k) = (1/J) sum_n f(n) chi_k(-n),   chi_k(n) = exp(2 pi i k n / J),
//   f(j)        = sum_k F(f)(chi_k) chi_k(j),
//
// so the 1/J sits on the forward transform and Parseval reads
// (1/J) sum_j |f(j)|^2 = sum_k |F(f)(chi_k)|^2. Most FFT libraries put the
// factor on the inverse instead.

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <fftw3.h>

#include "ergolab/error.hpp"
#include "ergolab/summation.hpp"

namespace ergolab {

using cplx = std::complex<double>;

// Complex J-periodic sequence; every index is read mod J.
class PeriodicSignal {
public:
  explicit PeriodicSignal(std::vector<cplx> values) : values_(std::move(values)) {
    if (values_.empty()) {
      throw shape_error("periodic signal needs period >= 1");
    }
  }

  static PeriodicSignal constant(std::uint64_t period, cplx value) {
    return PeriodicSignal(std::vector<cplx>(period, value));
  }

  static PeriodicSignal delta(std::uint64_t period, std::uint64_t at) {
    std::vector<cplx> v(period, 0.0);
    v.at(at % period) = 1.0;
    return PeriodicSignal(std::move(v));
  }

  [[nodiscard]] std::uint64_t period() const noexcept { return values_.size(); }

  [[nodiscard]] cplx operator()(std::int64_t j) const noexcept {
    const auto m = static_cast<std::int64_t>(values_.size());
    std::int64_t r = j % m;
    return values_[static_cast<std::size_t>(r < 0 ? r + m : r)];
  }

  [[nodiscard]] cplx operator[](std::size_t j) const noexcept { return values_[j]; }
  [[nodiscard]] std::span<const cplx> values() const noexcept { return values_; }

  // ((1/J) sum |f|^p)^(1/p); p = infinity gives the sup norm.
  [[nodiscard]] double norm(double p) const {
    if (std::isinf(p)) {
      return sup_norm();
    }
    if (!(p >= 1.0)) {
      throw domain_error("norm exponent must be >= 1");
    }
    PairwiseSum<double> acc;
    for (const auto& v : values_) {
      acc.add(std::pow(std::abs(v), p));
    }
    return std::pow(acc.total() / static_cast<double>(values_.size()), 1.0 / p);
  }

  // (sum |f|^p)^(1/p) under counting measure on one period.
  [[nodiscard]] double counting_norm(double p) const {
    if (std::isinf(p)) {
      return sup_norm();
    }
    return norm(p) * std::pow(static_cast<double>(values_.size()), 1.0 / p);
  }

  [[nodiscard]] double sup_norm() const noexcept {
    double m = 0.0;
    for (const auto& v : values_) {
      m = std::max(m, std::abs(v));
    }
    return m;
  }

  [[nodiscard]] PeriodicSignal scaled(cplx c) const {
    std::vector<cplx> v(values_);
    for (auto& x : v) {
      x *= c;
    }
    return PeriodicSignal(std::move(v));
  }

private:
  std::vector<cplx> values_;
};

// Coefficients c_k = F(f)(chi_k), k = 0..J-1.
class Spectrum {
public:
  explicit Spectrum(std::vector<cplx> coefficients) : coeffs_(std::move(coefficients)) {
    if (coeffs_.empty()) {
      throw shape_error("spectrum needs period >= 1");
    }
  }

  [[nodiscard]] std::uint64_t period() const noexcept { return coeffs_.size(); }
  [[nodiscard]] cplx operator[](std::size_t k) const noexcept { return coeffs_[k]; }
  // Index read mod J.
  [[nodiscard]] cplx at_mod(std::int64_t k) const noexcept {
    const auto m = static_cast<std::int64_t>(coeffs_.size());
    std::int64_t r = k % m;
    return coeffs_[static_cast<std::size_t>(r < 0 ? r + m : r)];
  }
  [[nodiscard]] std::span<const cplx> coefficients() const noexcept { return coeffs_; }

  [[nodiscard]] double energy() const {
    PairwiseSum<double> acc;
    for (const auto& c : coeffs_) {
      acc.add(std::norm(c));
    }
    return acc.total();
  }

private:
  std::vector<cplx> coeffs_;
};

// Unnormalized length-J transform X_k = sum_n x_n exp(sign 2 pi i k n / J).
// J whose prime factors are all <= 7 goes through FFTW; any other J uses
// the direct O(J^2) sum so the group stays exactly Z_J (no padding).
class FourierPlan {
public:
  explicit FourierPlan(std::uint64_t length) : n_(length), roots_(length) {
    if (length == 0) {
      throw shape_error("transform length must be >= 1");
    }
    for (std::uint64_t k = 0; k < n_; ++k) {
      roots_[k] = root_of_unity(k, n_);
    }
    std::uint64_t rest = n_;
    for (const std::uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL}) {
      while (rest % p == 0) {
        rest /= p;
      }
    }
    smooth_ = (rest == 1);
    if (smooth_ && n_ > 1) {
      // The FFTW planner is not reentrant.
      static std::mutex planner;
      std::lock_guard lock(planner);
      std::vector<cplx> scratch(n_);
      auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
      const int n = static_cast<int>(n_);
      const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
      forward_ = fftw_plan_dft_1d(n, buf, buf, FFTW_FORWARD, flags);
      backward_ = fftw_plan_dft_1d(n, buf, buf, FFTW_BACKWARD, flags);
      if (forward_ == nullptr || backward_ == nullptr) {
        throw capacity_error("FFTW could not plan length " + std::to_string(n_));
      }
    }
  }

  FourierPlan(const FourierPlan&) = delete;
  FourierPlan& operator=(const FourierPlan&) = delete;

  ~FourierPlan() {
    if (forward_ != nullptr) {
      fftw_destroy_plan(forward_);
    }
    if (backward_ != nullptr) {
      fftw_destroy_plan(backward_);
    }
  }

  // Shared plan per length.
  static std::shared_ptr<const FourierPlan> get(std::uint64_t length) {
    static std::mutex mutex;
    static std::map<std::uint64_t, std::shared_ptr<const FourierPlan>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[length];
    if (!slot) {
      slot = std::make_shared<const FourierPlan>(length);
    }
    return slot;
  }

  // exp(2 pi i k / n), exact on the axes, long double elsewhere.
  static cplx root_of_unity(std::uint64_t k, std::uint64_t n) {
    k %= n;
    if (k == 0) {
      return {1.0, 0.0};
    }
    if (4 * k == n) {
      return {0.0, 1.0};
    }
    if (2 * k == n) {
      return {-1.0, 0.0};
    }
    if (4 * k == 3 * n) {
      return {0.0, -1.0};
    }
    const long double angle = 2.0L * std::numbers::pi_v<long double> * static_cast<long double>(k) /
                              static_cast<long double>(n);
    return {static_cast<double>(std::cos(angle)), static_cast<double>(std::sin(angle))};
  }

  [[nodiscard]] std::uint64_t size() const noexcept { return n_; }
  [[nodiscard]] bool smooth() const noexcept { return smooth_; }

  // exp(sign 2 pi i e / J).
  [[nodiscard]] cplx root(std::uint64_t e, int sign) const noexcept {
    const cplx w = roots_[e % n_];
    return sign > 0 ? w : std::conj(w);
  }

  void transform(std::span<cplx> data, int sign) const {
    if (data.size() != n_) {
      throw shape_error("transform input length " + std::to_string(data.size()) +
                        " differs from plan length " + std::to_string(n_));
    }
    if (n_ == 1) {
      return;
    }
    if (smooth_) {
      auto* buf = reinterpret_cast<fftw_complex*>(data.data());
      fftw_execute_dft(sign > 0 ? backward_ : forward_, buf, buf);
    } else {
      const std::vector<cplx> in(data.begin(), data.end());
      direct(in, data, sign);
    }
  }

private:
  void direct(std::span<const cplx> in, std::span<cplx> out, int sign) const {
    for (std::uint64_t k = 0; k < n_; ++k) {
      PairwiseSum<cplx> acc;
      std::uint64_t e = 0;
      for (std::uint64_t j = 0; j < n_; ++j) {
        acc.add(in[j] * root(e, sign));
        e += k;
        if (e >= n_) {
          e -= n_;
        }
      }
      out[k] = acc.total();
    }
  }

  std::uint64_t n_;
  std::vector<cplx> roots_;
  bool smooth_ = false;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

inline Spectrum dft(const PeriodicSignal& signal) {
  const std::uint64_t j = signal.period();
  std::vector<cplx> data(signal.values().begin(), signal.values().end());
  FourierPlan::get(j)->transform(data, -1);
  const double scale = 1.0 / static_cast<double>(j);
  for (auto& c : data) {
    c *= scale;
  }
  return Spectrum(std::move(data));
}

inline PeriodicSignal idft(const Spectrum& spectrum) {
  std::vector<cplx> data(spectrum.coefficients().begin(), spectrum.coefficients().end());
  FourierPlan::get(spectrum.period())->transform(data, +1);
  return PeriodicSignal(std::move(data));
}

// In-place unnormalized 2-D transform of a row-major J x J array:
// X[k][s] = sum_{a,b} x[a][b] exp(sign 2 pi i (k a + s b) / J).
inline void transform_2d(std::span<cplx> data, std::uint64_t period, int sign) {
  if (data.size() != period * period) {
    throw shape_error("2-D transform needs a J x J array");
  }
  const auto plan = FourierPlan::get(period);
  for (std::uint64_t a = 0; a < period; ++a) {
    plan->transform(data.subspan(a * period, period), sign);
  }
  std::vector<cplx> column(period);
  for (std::uint64_t s = 0; s < period; ++s) {
    for (std::uint64_t a = 0; a < period; ++a) {
      column[a] = data[a * period + s];
    }
    plan->transform(column, sign);
    for (std::uint64_t k = 0; k < period; ++k) {
      data[k * period + s] = column[k];
    }
  }
}

} // namespace ergolab
