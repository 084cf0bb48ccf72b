#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ergolab/error.hpp"

namespace ergolab {

// I_rho = { floor(rho^n) : n >= 0 } up to a limit, with band endpoints
// N_1 < ... < N_{K+1} drawn from it.
class LacunaryLadder {
public:
  LacunaryLadder(double rho, std::uint64_t limit) : rho_(rho), limit_(limit) {
    if (!(rho > 1.0) || !std::isfinite(rho)) {
      throw domain_error("rho must exceed 1");
    }
    if (limit == 0) {
      throw domain_error("ladder limit must be positive");
    }
    const auto integral = static_cast<std::uint64_t>(rho);
    if (static_cast<double>(integral) == rho) {
      for (std::uint64_t v = 1; v <= limit_; v *= integral) {
        members_.push_back(v);
        if (v > limit_ / integral) {
          break;
        }
      }
    } else {
      const long double r = rho;
      for (int n = 0;; ++n) {
        const long double v = std::floor(std::pow(r, static_cast<long double>(n)));
        if (v > static_cast<long double>(limit_)) {
          break;
        }
        const auto u = static_cast<std::uint64_t>(v);
        if (members_.empty() || members_.back() != u) {
          members_.push_back(u);
        }
      }
    }
  }

  [[nodiscard]] double rho() const noexcept { return rho_; }
  [[nodiscard]] std::uint64_t limit() const noexcept { return limit_; }
  [[nodiscard]] std::span<const std::uint64_t> members() const noexcept { return members_; }
  [[nodiscard]] std::span<const std::uint64_t> bands() const noexcept { return bands_; }
  [[nodiscard]] std::size_t band_count() const noexcept {
    return bands_.empty() ? 0 : bands_.size() - 1;
  }

  [[nodiscard]] bool contains(std::uint64_t n) const {
    return std::binary_search(members_.begin(), members_.end(), n);
  }

  // Bands N_k = members[first + k - 1], k = 1..K+1.
  LacunaryLadder& with_bands(std::size_t first, std::size_t band_count) {
    if (first + band_count >= members_.size()) {
      throw config_error("ladder has " + std::to_string(members_.size()) + " members, " +
                         std::to_string(first + band_count + 1) + " needed for " +
                         std::to_string(band_count) + " bands");
    }
    bands_.assign(members_.begin() + static_cast<std::ptrdiff_t>(first),
                  members_.begin() + static_cast<std::ptrdiff_t>(first + band_count + 1));
    return *this;
  }

  LacunaryLadder& with_endpoints(std::vector<std::uint64_t> endpoints) {
    if (endpoints.size() < 2) {
      throw config_error("need at least two band endpoints");
    }
    for (std::size_t i = 0; i < endpoints.size(); ++i) {
      if (!contains(endpoints[i])) {
        throw config_error("band endpoint " + std::to_string(endpoints[i]) + " is not in I_rho");
      }
      if (i > 0 && endpoints[i] <= endpoints[i - 1]) {
        throw config_error("band endpoints must be strictly increasing");
      }
    }
    bands_ = std::move(endpoints);
    return *this;
  }

  // Members N with N_k <= N <= N_{k+1}, k = 1..K.
  [[nodiscard]] std::vector<std::uint64_t> band_members(std::size_t k) const {
    if (k == 0 || k > band_count()) {
      throw bounds_error("band index " + std::to_string(k) + " outside [1, " +
                         std::to_string(band_count()) + "]");
    }
    const auto lo = std::lower_bound(members_.begin(), members_.end(), bands_[k - 1]);
    const auto hi = std::upper_bound(members_.begin(), members_.end(), bands_[k]);
    return {lo, hi};
  }

private:
  double rho_;
  std::uint64_t limit_;
  std::vector<std::uint64_t> members_;
  std::vector<std::uint64_t> bands_;
};

} // namespace ergolab
