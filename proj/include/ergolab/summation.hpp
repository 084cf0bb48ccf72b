#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

namespace ergolab {

// Streaming pairwise (cascade) summation. Terms are summed naively in blocks
// of `block` and the block totals are merged like a binary counter, so the
// rounding error grows with O(log n) instead of O(n). The reduction tree
// depends only on the number of terms, never on scheduling.
template <typename T, std::size_t block = 64>
class PairwiseSum {
public:
  void add(const T& x) {
    partial_ += x;
    if (++in_block_ == block) {
      carry(partial_);
      partial_ = T{};
      in_block_ = 0;
    }
  }

  PairwiseSum& operator+=(const T& x) {
    add(x);
    return *this;
  }

  [[nodiscard]] T total() const {
    T acc{};
    for (std::size_t lvl = 0; lvl < levels_.size(); ++lvl) {
      if ((occupied_ >> lvl) & 1U) {
        acc += levels_[lvl];
      }
    }
    return acc + partial_;
  }

  [[nodiscard]] std::uint64_t count() const noexcept { return blocks_ * block + in_block_; }

private:
  void carry(T value) {
    std::size_t lvl = 0;
    while ((occupied_ >> lvl) & 1U) {
      value = levels_[lvl] + value;
      occupied_ &= ~(std::uint64_t{1} << lvl);
      ++lvl;
    }
    levels_[lvl] = value;
    occupied_ |= std::uint64_t{1} << lvl;
    ++blocks_;
  }

  std::array<T, 64> levels_{};
  std::uint64_t occupied_ = 0;
  std::uint64_t blocks_ = 0;
  T partial_{};
  std::size_t in_block_ = 0;
};

template <typename T>
[[nodiscard]] T pairwise_sum(std::span<const T> xs) {
  PairwiseSum<T> acc;
  for (const auto& x : xs) {
    acc.add(x);
  }
  return acc.total();
}

} // namespace ergolab
