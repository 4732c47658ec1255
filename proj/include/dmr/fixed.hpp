#pragma once

#include <algorithm>
#include <bit>
#include <vector>
#include <cstdint>
#include <string>

#include "dmr/common.hpp"

// Exact fixed-point arithmetic over the grid 2^-52. All edge weights, eps/delta
// parameters and derived quantities live on this grid, so every comparison the
// algorithms make (thresholds, bit extraction, coarsening classes) is exact.
// Aggregates (norms, vertex loads, distances) are 128-bit integers in the same
// 2^-52 units; with the supported instance sizes (< 2^70 total mass) no
// intermediate product overflows.

namespace dmr {

inline constexpr int kFracBits = 52;
inline constexpr uint64_t kOneRaw = uint64_t{1} << kFracBits;

using Wide = unsigned __int128;

// A nonnegative value in [0, 1] as an integer numerator over 2^52.
// Bit i of the represented real (i = 0 is the integer bit, value 2^-i)
// is bit (52 - i) of the numerator.
class Fp {
 public:
  constexpr Fp() : raw_(0) {}
  static constexpr Fp from_raw(uint64_t raw) {
    Fp f;
    f.raw_ = raw;
    return f;
  }
  // 2^-k for k in [0, 52].
  static constexpr Fp pow2(int neg_exp) {
    return from_raw(uint64_t{1} << (kFracBits - neg_exp));
  }
  static constexpr Fp one() { return from_raw(kOneRaw); }
  static constexpr Fp zero() { return Fp(); }

  constexpr uint64_t raw() const { return raw_; }
  constexpr bool is_zero() const { return raw_ == 0; }

  // Paper-indexed bit: (x)_i = 1 iff the 2^-i component is present.
  constexpr bool bit(int i) const {
    return i >= 0 && i <= kFracBits && ((raw_ >> (kFracBits - i)) & 1u) != 0;
  }
  // Index of the most significant set bit in paper indexing (smallest i with
  // (x)_i = 1), or -1 for zero.
  constexpr int top_bit() const {
    if (raw_ == 0) return -1;
    return kFracBits - (63 - std::countl_zero(raw_));
  }
  // Index of the least significant set bit (largest i), or -1 for zero.
  constexpr int bottom_bit() const {
    if (raw_ == 0) return -1;
    return kFracBits - std::countr_zero(raw_);
  }
  // Clears all bits with paper index > L (keeps the 2^-L component and above).
  constexpr Fp keep_bits_through(int L) const {
    if (L >= kFracBits) return *this;
    if (L < 0) return Fp();
    uint64_t mask = ~((uint64_t{1} << (kFracBits - L)) - 1);
    return from_raw(raw_ & mask);
  }

  friend constexpr bool operator==(Fp a, Fp b) { return a.raw_ == b.raw_; }
  friend constexpr bool operator!=(Fp a, Fp b) { return a.raw_ != b.raw_; }
  friend constexpr bool operator<(Fp a, Fp b) { return a.raw_ < b.raw_; }
  friend constexpr bool operator<=(Fp a, Fp b) { return a.raw_ <= b.raw_; }
  friend constexpr bool operator>(Fp a, Fp b) { return a.raw_ > b.raw_; }
  friend constexpr bool operator>=(Fp a, Fp b) { return a.raw_ >= b.raw_; }

  double to_double() const { return static_cast<double>(raw_) * 0x1p-52; }

 private:
  uint64_t raw_;
};

// Floor of a*b on the grid (a, b in [0,1] so the product fits 128 bits).
inline Fp mul_floor(Fp a, Fp b) {
  Wide p = static_cast<Wide>(a.raw()) * b.raw();
  return Fp::from_raw(static_cast<uint64_t>(p >> kFracBits));
}

// eps * s where s is an aggregate in 2^-52 units; exact floor.
inline Wide mul_wide_floor(Fp eps, Wide s) {
  return (static_cast<Wide>(eps.raw()) * s) >> kFracBits;
}

// Largest power of two <= x (snap-down used where an algorithm assumes eps is
// a power of two). x must be nonzero.
inline Fp snap_down_pow2(Fp x) {
  int k = x.top_bit();
  return Fp::pow2(std::min(k < 0 ? kFracBits : k, kFracBits));
}

// lhs <= eps*s + eps, all exact (comparison scaled by 2^52).
inline bool within_slack(Wide lhs, Fp eps, Wide s) {
  Wide rhs = static_cast<Wide>(eps.raw()) * (s + kOneRaw);
  return (lhs << kFracBits) <= rhs;
}

inline Wide abs_diff(Wide a, Wide b) { return a > b ? a - b : b - a; }

// ---- parsing / formatting -------------------------------------------------

// Rounds p / q to the grid, ties to even. Records whether rounding moved the
// value and in which direction (-1 down, 0 exact, +1 up).
inline Fp rational_to_fp(uint64_t p, uint64_t q, int* direction = nullptr) {
  if (q == 0) throw ParameterError("rational with zero denominator");
  Wide num = static_cast<Wide>(p) << kFracBits;
  Wide quot = num / q;
  Wide rem = num % q;
  int dir = 0;
  if (rem != 0) {
    Wide twice = rem * 2;
    bool up;
    if (twice > q)
      up = true;
    else if (twice < q)
      up = false;
    else
      up = (quot & 1) != 0;  // ties to even
    if (up) {
      quot += 1;
      dir = +1;
    } else {
      dir = -1;
    }
  }
  if (direction) *direction = dir;
  if (quot > kOneRaw) throw ParameterError("value exceeds 1 after rounding");
  return Fp::from_raw(static_cast<uint64_t>(quot));
}

// Exact conversion of an arbitrarily long decimal fraction ".d1d2..." by
// repeated doubling of the digit string; ties round to even.
inline Fp decimal_fraction_to_fp(const std::string& digits, int* direction) {
  std::vector<int> d;
  d.reserve(digits.size());
  for (char c : digits) {
    if (c < '0' || c > '9') throw ParameterError("bad digit in literal");
    d.push_back(c - '0');
  }
  auto double_in_place = [&d]() -> int {
    int carry = 0;
    for (size_t i = d.size(); i-- > 0;) {
      int t = d[i] * 2 + carry;
      d[i] = t % 10;
      carry = t / 10;
    }
    return carry;
  };
  uint64_t raw = 0;
  for (int bit = 0; bit < kFracBits; ++bit) raw = (raw << 1) | double_in_place();
  bool any_rest = false;
  int half_bit = double_in_place();
  for (int x : d) any_rest |= x != 0;
  int dir = 0;
  if (half_bit == 0 && !any_rest) {
    dir = 0;
  } else if (half_bit == 1 && !any_rest) {
    if (raw & 1) {
      ++raw;
      dir = +1;  // tie to even
    } else {
      dir = -1;
    }
  } else if (half_bit == 1) {
    ++raw;
    dir = +1;
  } else {
    dir = -1;
  }
  if (direction) *direction = dir;
  return Fp::from_raw(raw);
}

// Parses "0.375", "1", ".5" or "3/8" onto the grid (values in [0,1]).
inline Fp parse_fp(const std::string& text, int* direction = nullptr) {
  if (text.empty()) throw ParameterError("empty numeric literal");
  auto slash = text.find('/');
  if (slash != std::string::npos) {
    uint64_t p = std::stoull(text.substr(0, slash));
    uint64_t q = std::stoull(text.substr(slash + 1));
    return rational_to_fp(p, q, direction);
  }
  auto dot = text.find('.');
  std::string ipart = dot == std::string::npos ? text : text.substr(0, dot);
  std::string fpart = dot == std::string::npos ? "" : text.substr(dot + 1);
  uint64_t units = ipart.empty() ? 0 : std::stoull(ipart);
  int dir = 0;
  Fp f = decimal_fraction_to_fp(fpart, &dir);
  if (units > 1 || (units == 1 && !f.is_zero()))
    throw ParameterError("value above 1: " + text);
  if (direction) *direction = dir;
  if (units == 1) return Fp::one();
  return f;
}

// Exact decimal expansion of the grid value (2^-52 divides 10^-52 scaling).
inline std::string fp_to_string(Fp x) {
  if (x.raw() == 0) return "0";
  if (x.raw() == kOneRaw) return "1";
  uint64_t frac = x.raw();
  std::string digits;
  // Multiply the fractional part by 10 repeatedly; terminates within 52 steps.
  Wide v = frac;
  for (int i = 0; i < kFracBits && v != 0; ++i) {
    v *= 10;
    digits.push_back(static_cast<char>('0' + static_cast<int>(v >> kFracBits)));
    v &= (Wide{1} << kFracBits) - 1;
  }
  return "0." + digits;
}

inline std::string wide_to_string(Wide v) {
  if (v == 0) return "0";
  std::string out;
  while (v != 0) {
    out.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

// Decimal rendering of an aggregate in 2^-52 units (norms, distances).
inline std::string wide_units_to_string(Wide v) {
  Wide units = v >> kFracBits;
  Fp frac = Fp::from_raw(static_cast<uint64_t>(v & (kOneRaw - 1)));
  std::string f = fp_to_string(frac);
  if (f == "0") return wide_to_string(units);
  return wide_to_string(units) + f.substr(1);  // strip leading '0'
}

}  // namespace dmr
