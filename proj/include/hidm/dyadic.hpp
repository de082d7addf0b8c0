#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace hidm {

/// Exact non-negative rational with a power-of-two denominator, num / 2^shift.
///
/// LUT energies are integers at the amplitude layer and means over 2^k
/// equiprobable sequences above it, so every energy in a structure is dyadic.
/// Arithmetic is overflow-checked; values are kept in lowest terms.
class Dyadic {
 public:
  constexpr Dyadic() = default;
  constexpr Dyadic(std::int64_t num, int shift = 0) : num_(num), shift_(shift) { normalize(); }

  constexpr std::int64_t numerator() const noexcept { return num_; }
  constexpr int shift() const noexcept { return shift_; }
  /// Throws std::overflow_error if the denominator does not fit in int64.
  std::int64_t denominator() const {
    if (shift_ > 62) throw std::overflow_error("dyadic denominator exceeds int64");
    return std::int64_t{1} << shift_;
  }

  double to_double() const noexcept {
    double v = static_cast<double>(num_);
    for (int s = shift_; s > 0; s -= 30) v /= static_cast<double>(std::int64_t{1} << (s > 30 ? 30 : s));
    return v;
  }

  /// Numerator of this value expressed at denominator 2^target_shift.
  std::int64_t scaled_to(int target_shift) const {
    if (target_shift < shift_) throw std::logic_error("dyadic: cannot scale to a coarser denominator");
    return checked_shl(num_, target_shift - shift_);
  }

  friend Dyadic operator+(const Dyadic& a, const Dyadic& b) {
    const int s = a.shift_ > b.shift_ ? a.shift_ : b.shift_;
    return Dyadic(checked_add(a.scaled_to(s), b.scaled_to(s)), s);
  }

  /// Divides by 2^bits exactly.
  Dyadic halved(int bits) const { return Dyadic(num_, shift_ + bits); }

  friend bool operator==(const Dyadic& a, const Dyadic& b) noexcept {
    return a.num_ == b.num_ && a.shift_ == b.shift_;
  }
  friend std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b) {
    const int s = a.shift_ > b.shift_ ? a.shift_ : b.shift_;
    return a.scaled_to(s) <=> b.scaled_to(s);
  }

  std::string to_string() const {
    return std::to_string(num_) + "/2^" + std::to_string(shift_);
  }

  static std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("dyadic energy overflow");
    return r;
  }
  static std::int64_t checked_shl(std::int64_t v, int bits) {
    if (bits == 0 || v == 0) return v;
    if (bits >= 63) throw std::overflow_error("dyadic energy overflow");
    const std::int64_t limit = std::int64_t{1} << (62 - bits);
    if (v >= limit * 2 || v < -limit * 2) throw std::overflow_error("dyadic energy overflow");
    return v * (std::int64_t{1} << bits);
  }

 private:
  constexpr void normalize() {
    if (num_ == 0) {
      shift_ = 0;
      return;
    }
    while (shift_ > 0 && (num_ & 1) == 0) {
      num_ /= 2;
      --shift_;
    }
  }

  std::int64_t num_ = 0;
  int shift_ = 0;
};

}  // namespace hidm
