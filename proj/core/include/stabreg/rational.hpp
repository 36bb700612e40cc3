#ifndef STABREG_RATIONAL_HPP
#define STABREG_RATIONAL_HPP

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <gmpxx.h>

namespace stabreg {

using BigInt = mpz_class;

/// Exact rational; GMP keeps it reduced with a positive denominator.
using Rational = mpq_class;

Rational parse_rational(std::string_view text);

/// "p/q", or "p" when the denominator is 1.
std::string to_string(const Rational& q);

Rational make_rational(long num, unsigned long den = 1);

/// Binomial coefficient C(n, k) as a big integer (0 when k > n).
BigInt binomial(unsigned long n, unsigned long k);

/// Sum_{j=0}^{upto} C(n, j).
BigInt binomial_prefix_sum(unsigned long n, unsigned long upto);

/// Prime factorization of a positive integer, ascending primes.
std::vector<std::pair<BigInt, unsigned long>> factorize(const BigInt& n);

/// A positive rational kept as a product of prime powers with arbitrary
/// integer exponents. Iterated maps such as x -> x^(8k+1)/c produce values
/// whose numerator and denominator have billions of digits while the
/// factored form stays a handful of (prime, exponent) pairs.
///
/// Comparison is exact: two distinct products of prime powers never
/// coincide, so interval evaluation of log2 at increasing precision always
/// separates them; small values are compared through exact materialization.
class PowerRational {
 public:
  PowerRational() = default;  // 1
  explicit PowerRational(const Rational& positive);
  explicit PowerRational(long num, unsigned long den = 1);

  static PowerRational one() { return {}; }

  PowerRational& operator*=(const PowerRational& rhs);
  PowerRational& operator/=(const PowerRational& rhs);
  friend PowerRational operator*(PowerRational a, const PowerRational& b) { return a *= b; }
  friend PowerRational operator/(PowerRational a, const PowerRational& b) { return a /= b; }

  PowerRational pow(const BigInt& e) const;
  PowerRational pow(long e) const { return pow(BigInt(e)); }
  PowerRational inverse() const;

  bool is_one() const { return factors_.empty(); }
  /// True when the value is an integer (no negative exponents).
  bool is_integer() const;

  /// Rough size of numerator plus denominator in bits.
  double bit_size() const;
  double log2_approx() const;

  /// Exact value when numerator and denominator fit in max_bits total.
  std::optional<Rational> to_rational(double max_bits = 1 << 16) const;

  /// Throws PreconditionError when too large to materialize.
  Rational to_rational_checked(double max_bits = 1 << 16) const;

  /// "p/q" when reasonably small, else "2^-96*3^27".
  std::string to_string() const;

  /// -1, 0, +1.
  int compare(const PowerRational& rhs) const;
  int compare(const Rational& rhs) const;

  friend bool operator==(const PowerRational& a, const PowerRational& b) {
    return a.factors_ == b.factors_;
  }
  friend std::strong_ordering operator<=>(const PowerRational& a, const PowerRational& b) {
    return a.compare(b) <=> 0;
  }
  friend bool operator==(const PowerRational& a, const Rational& b) { return a.compare(b) == 0; }
  friend std::strong_ordering operator<=>(const PowerRational& a, const Rational& b) {
    return a.compare(b) <=> 0;
  }

  const std::vector<std::pair<BigInt, BigInt>>& factors() const { return factors_; }

 private:
  void combine(const PowerRational& rhs, int sign);
  int sign_of_log() const;

  std::vector<std::pair<BigInt, BigInt>> factors_;  // (prime, nonzero exponent), ascending
};

}  // namespace stabreg

#endif  // STABREG_RATIONAL_HPP
