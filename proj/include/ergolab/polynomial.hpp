#pragma once

#include <charconv>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ergolab/error.hpp"

namespace ergolab {

// Integer polynomial c_0 + c_1 n + ... + c_d n^d with 1 <= d <= 8.
class IntPolynomial {
public:
  static constexpr std::size_t max_degree = 8;

  explicit IntPolynomial(std::vector<std::int64_t> coeffs) : coeffs_(std::move(coeffs)) {
    while (!coeffs_.empty() && coeffs_.back() == 0) {
      coeffs_.pop_back();
    }
    if (coeffs_.size() < 2) {
      throw domain_error("polynomial must be non-constant");
    }
    if (degree() > max_degree) {
      throw domain_error("polynomial degree exceeds " + std::to_string(max_degree));
    }
  }

  // Parses "c0,c1,...,cd", constant term first.
  static IntPolynomial parse(std::string_view text) {
    std::vector<std::int64_t> coeffs;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = text.find(',', pos);
      std::string_view item = text.substr(pos, comma == std::string_view::npos ? text.npos : comma - pos);
      while (!item.empty() && item.front() == ' ') {
        item.remove_prefix(1);
      }
      while (!item.empty() && item.back() == ' ') {
        item.remove_suffix(1);
      }
      if (!item.empty() && item.front() == '+') {
        item.remove_prefix(1);
      }
      std::int64_t value = 0;
      const auto [end, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
      if (item.empty() || ec != std::errc{} || end != item.data() + item.size()) {
        throw domain_error("malformed polynomial coefficient '" + std::string(item) + "' in \"" +
                           std::string(text) + "\"");
      }
      coeffs.push_back(value);
      if (comma == std::string_view::npos) {
        break;
      }
      pos = comma + 1;
    }
    return IntPolynomial(std::move(coeffs));
  }

  [[nodiscard]] std::size_t degree() const noexcept { return coeffs_.size() - 1; }
  [[nodiscard]] std::span<const std::int64_t> coefficients() const noexcept { return coeffs_; }
  [[nodiscard]] std::int64_t leading() const noexcept { return coeffs_.back(); }

  [[nodiscard]] std::string to_string() const {
    std::string out;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
      if (i != 0) {
        out += ',';
      }
      out += std::to_string(coeffs_[i]);
    }
    return out;
  }

  friend bool operator==(const IntPolynomial&, const IntPolynomial&) = default;

private:
  std::vector<std::int64_t> coeffs_;
};

// Residue of c in [0, m).
inline std::uint64_t reduce_mod(std::int64_t c, std::uint64_t m) {
  const auto r = static_cast<__int128>(c) % static_cast<__int128>(m);
  return static_cast<std::uint64_t>(r < 0 ? r + m : r);
}

// P(n) mod m in [0, m) by Horner's rule with 128-bit intermediate products.
// Exact for all n and all m < 2^63.
inline std::uint64_t eval_mod(const IntPolynomial& p, std::uint64_t n, std::uint64_t m) {
  if (m == 0) {
    throw domain_error("modulus must be positive");
  }
  if (m == 1) {
    return 0;
  }
  const auto c = p.coefficients();
  const auto x = static_cast<unsigned __int128>(n % m);
  unsigned __int128 acc = 0;
  for (std::size_t i = c.size(); i-- > 0;) {
    acc = (acc * x + reduce_mod(c[i], m)) % m;
  }
  return static_cast<std::uint64_t>(acc);
}

// Exact value of P(n).
inline boost::multiprecision::cpp_int evaluate_exact(const IntPolynomial& p, std::uint64_t n) {
  boost::multiprecision::cpp_int acc = 0;
  const auto c = p.coefficients();
  for (std::size_t i = c.size(); i-- > 0;) {
    acc = acc * n + c[i];
  }
  return acc;
}

// Positive leading coefficient and P(n) >= 0 for n = 0..probe_limit.
inline bool maps_naturals_to_naturals(const IntPolynomial& p, std::uint64_t probe_limit) {
  if (p.leading() <= 0) {
    return false;
  }
  for (std::uint64_t n = 0; n <= probe_limit; ++n) {
    if (evaluate_exact(p, n) < 0) {
      return false;
    }
  }
  return true;
}

// r[n - 1] = P(n) mod m for n = 1..count.
inline std::vector<std::uint64_t> residues(const IntPolynomial& p, std::uint64_t count,
                                           std::uint64_t m) {
  std::vector<std::uint64_t> out(count);
  for (std::uint64_t n = 1; n <= count; ++n) {
    out[n - 1] = eval_mod(p, n, m);
  }
  return out;
}

} // namespace ergolab
