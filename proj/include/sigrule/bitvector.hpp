#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sigrule {

/// Fixed-length bit vector used as a column (or row cover) of a Relation.
/// Bits past size() in the last word are kept zero.
class BitVector {
 public:
  using word_type = std::uint64_t;
  static constexpr std::size_t word_bits = 64;

  BitVector() = default;
  explicit BitVector(std::size_t size, bool value = false)
      : size_(size), words_((size + word_bits - 1) / word_bits, value ? ~word_type{0} : 0) {
    trim();
  }

  std::size_t size() const noexcept { return size_; }
  std::span<const word_type> words() const noexcept { return words_; }

  bool test(std::size_t i) const noexcept { return (words_[i / word_bits] >> (i % word_bits)) & 1U; }
  void set(std::size_t i, bool value = true) noexcept {
    const word_type mask = word_type{1} << (i % word_bits);
    if (value) {
      words_[i / word_bits] |= mask;
    } else {
      words_[i / word_bits] &= ~mask;
    }
  }

  std::size_t count() const noexcept {
    std::size_t c = 0;
    for (word_type w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  BitVector& operator&=(const BitVector& other) noexcept {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
    return *this;
  }

  BitVector operator~() const {
    BitVector out = *this;
    for (word_type& w : out.words_) w = ~w;
    out.trim();
    return out;
  }

  /// popcount(*this & other) without materializing the intersection.
  std::size_t count_and(const BitVector& other) const noexcept {
    std::size_t c = 0;
    for (std::size_t i = 0; i < words_.size(); ++i) {
      c += static_cast<std::size_t>(std::popcount(words_[i] & other.words_[i]));
    }
    return c;
  }

  friend bool operator==(const BitVector&, const BitVector&) = default;

 private:
  void trim() noexcept {
    if (size_ % word_bits != 0 && !words_.empty()) {
      words_.back() &= (word_type{1} << (size_ % word_bits)) - 1;
    }
  }

  std::size_t size_ = 0;
  std::vector<word_type> words_;
};

}  // namespace sigrule
