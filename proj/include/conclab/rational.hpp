#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>

#include "conclab/errors.hpp"

namespace conclab {

// Exact rational scalar on an int64 numerator/denominator pair.  Every
// operation is carried through 128-bit intermediates and the final narrowing
// is checked: a Rational either holds the exact value or construction throws
// rational_overflow.  This is the arithmetic behind the zero-tolerance paths.
class Rational {
 public:
  constexpr Rational() : num_(0), den_(1) {}
  Rational(std::int64_t n) : num_(n), den_(1) {}  // NOLINT: implicit by design
  Rational(std::int64_t n, std::int64_t d) : num_(n), den_(d) { normalize(); }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  double to_double() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  // Exact value of a finite double (every finite double is rational with a
  // power-of-two denominator).  Throws when the denominator leaves int64.
  static Rational from_double_exact(double x);

  // Best rational approximation with denominator <= max_den via continued
  // fractions; nullopt when the residual exceeds |x| * 1e-9 + 1e-12.
  static std::optional<Rational> from_double(double x, std::int64_t max_den);

  bool is_zero() const { return num_ == 0; }
  int sign() const { return num_ > 0 ? 1 : (num_ < 0 ? -1 : 0); }
  Rational abs() const { return num_ < 0 ? Rational(checked_neg(num_), den_) : *this; }

  // Conventional floor.
  std::int64_t floor() const {
    std::int64_t q = num_ / den_;
    if (num_ % den_ != 0 && num_ < 0) --q;
    return q;
  }
  // Largest integer k with k < value (differs from floor at integers).
  std::int64_t floor_strict() const {
    std::int64_t f = floor();
    return (num_ % den_ == 0) ? f - 1 : f;
  }
  // Nearest integer, ties rounded up.
  std::int64_t round_nearest() const;

  Rational operator-() const { return Rational(checked_neg(num_), den_); }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return from_i128(i128(a.num_) * b.den_ + i128(b.num_) * a.den_,
                     i128(a.den_) * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return from_i128(i128(a.num_) * b.den_ - i128(b.num_) * a.den_,
                     i128(a.den_) * b.den_);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return from_i128(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw std::domain_error("Rational: division by zero");
    return from_i128(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
  }

  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }
  Rational& operator/=(const Rational& o) { return *this = *this / o; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    i128 lhs = i128(a.num_) * b.den_;
    i128 rhs = i128(b.num_) * a.den_;
    if (lhs < rhs) return std::strong_ordering::less;
    if (lhs > rhs) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  std::string str() const {
    return den_ == 1 ? std::to_string(num_)
                     : std::to_string(num_) + "/" + std::to_string(den_);
  }

 private:
  using i128 = __int128_t;

  static std::int64_t checked_neg(std::int64_t v) {
    if (v == INT64_MIN) throw rational_overflow("Rational: negation overflow");
    return -v;
  }

  static Rational from_i128(i128 n, i128 d);

  void normalize();

  std::int64_t num_;
  std::int64_t den_;
};

inline void Rational::normalize() {
  if (den_ == 0) throw std::domain_error("Rational: zero denominator");
  if (num_ == INT64_MIN || den_ == INT64_MIN)
    throw rational_overflow("Rational: value exceeds 64-bit range");
  if (den_ < 0) {
    num_ = -num_;
    den_ = -den_;
  }
  if (num_ == 0) {
    den_ = 1;
    return;
  }
  std::int64_t g = std::gcd(num_, den_);
  num_ /= g;
  den_ /= g;
}

inline Rational Rational::from_i128(i128 n, i128 d) {
  if (d == 0) throw std::domain_error("Rational: zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  i128 an = n < 0 ? -n : n;
  i128 g = an;
  i128 b = d;
  while (b != 0) {
    i128 t = g % b;
    g = b;
    b = t;
  }
  if (g == 0) g = 1;
  n /= g;
  d /= g;
  if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX) {
    throw rational_overflow("Rational: value exceeds 64-bit range");
  }
  Rational r;
  r.num_ = static_cast<std::int64_t>(n);
  r.den_ = static_cast<std::int64_t>(d);
  return r;
}

inline std::int64_t Rational::round_nearest() const {
  // floor(x + 1/2), computed exactly
  Rational shifted = *this + Rational(1, 2);
  std::int64_t f = shifted.floor();
  // half-integers after the shift mean the original was of the form k + 1/2;
  // floor(k+1) = k+1, ties up as documented
  return f;
}

inline Rational Rational::from_double_exact(double x) {
  if (!std::isfinite(x)) throw std::domain_error("Rational: non-finite double");
  if (x == 0.0) return Rational(0);
  int exp = 0;
  double mant = std::frexp(x, &exp);  // x = mant * 2^exp, |mant| in [0.5, 1)
  // 53 mantissa bits: mant * 2^53 is an exact integer
  auto m = static_cast<std::int64_t>(std::ldexp(mant, 53));
  exp -= 53;
  while (m != 0 && (m % 2) == 0) {
    m /= 2;
    ++exp;
  }
  if (exp >= 0) {
    if (exp > 62) throw rational_overflow("Rational: exponent too large");
    __int128_t v = static_cast<__int128_t>(m) << exp;
    if (v > INT64_MAX || v < INT64_MIN)
      throw rational_overflow("Rational: double exceeds 64-bit range");
    return Rational(static_cast<std::int64_t>(v));
  }
  if (exp < -62) throw rational_overflow("Rational: denominator exceeds 64-bit range");
  return Rational(m, std::int64_t(1) << (-exp));
}

inline std::optional<Rational> Rational::from_double(double x, std::int64_t max_den) {
  if (!std::isfinite(x) || max_den < 1) return std::nullopt;
  if (x == 0.0) return Rational(0);
  const bool neg = x < 0;
  double v = std::fabs(x);
  // continued-fraction convergents p/q, q capped by max_den
  std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double frac = v;
  for (int it = 0; it < 64; ++it) {
    double a_f = std::floor(frac);
    if (a_f > 9.2e18) return std::nullopt;
    auto a = static_cast<std::int64_t>(a_f);
    i128 p2 = i128(a) * p1 + p0;
    i128 q2 = i128(a) * q1 + q0;
    if (q2 > max_den || p2 > INT64_MAX) break;
    p0 = p1;
    q0 = q1;
    p1 = static_cast<std::int64_t>(p2);
    q1 = static_cast<std::int64_t>(q2);
    double rem = frac - a_f;
    if (rem < 1e-15 * std::max(1.0, frac)) break;
    frac = 1.0 / rem;
  }
  if (q1 == 0) return std::nullopt;
  double approx = static_cast<double>(p1) / static_cast<double>(q1);
  if (std::fabs(approx - v) > 1e-9 * v + 1e-12) return std::nullopt;
  return neg ? Rational(-p1, q1) : Rational(p1, q1);
}

}  // namespace conclab
