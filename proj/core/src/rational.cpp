#include "stabreg/rational.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>

#include <mpfr.h>

#include "stabreg/errors.hpp"

namespace stabreg {

namespace {

constexpr double kExactCompareBits = 1 << 14;
constexpr double kPrintFractionBits = 4096;

BigInt pollard_brent(const BigInt& n) {
  if (mpz_even_p(n.get_mpz_t())) return 2;
  for (unsigned long c = 1;; ++c) {
    BigInt y = 2, x, g = 1, q = 1, ys;
    unsigned long r = 1;
    const unsigned long m = 128;
    auto f = [&](const BigInt& v) -> BigInt {
      BigInt out = v * v + c;
      mpz_mod(out.get_mpz_t(), out.get_mpz_t(), n.get_mpz_t());
      return out;
    };
    do {
      x = y;
      for (unsigned long i = 0; i < r; ++i) y = f(y);
      unsigned long k = 0;
      do {
        ys = y;
        for (unsigned long i = 0; i < std::min(m, r - k); ++i) {
          y = f(y);
          BigInt diff = x - y;
          q = q * abs(diff);
          mpz_mod(q.get_mpz_t(), q.get_mpz_t(), n.get_mpz_t());
        }
        mpz_gcd(g.get_mpz_t(), q.get_mpz_t(), n.get_mpz_t());
        k += m;
      } while (k < r && g == 1);
      r *= 2;
    } while (g == 1);
    if (g == n) {
      do {
        ys = f(ys);
        BigInt diff = x - ys;
        mpz_gcd(g.get_mpz_t(), diff.get_mpz_t(), n.get_mpz_t());
      } while (g == 1);
    }
    if (g != n) return g;
  }
}

void factor_into(BigInt n, std::map<BigInt, unsigned long>& out) {
  if (n == 1) return;
  if (mpz_probab_prime_p(n.get_mpz_t(), 30) > 0) {
    out[n] += 1;
    return;
  }
  BigInt d = pollard_brent(n);
  factor_into(d, out);
  factor_into(BigInt(n / d), out);
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string s(text);
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char ch) { return std::isspace(ch); }),
          s.end());
  if (s.empty()) throw ParseError("empty rational");
  Rational q;
  if (auto dot = s.find('.'); dot != std::string::npos) {
    if (s.find('/') != std::string::npos) throw ParseError("malformed rational: " + s);
    std::string whole = s.substr(0, dot);
    std::string frac = s.substr(dot + 1);
    bool neg = !whole.empty() && whole[0] == '-';
    if (neg) whole.erase(0, 1);
    if (whole.empty()) whole = "0";
    if (frac.empty() || !std::all_of(frac.begin(), frac.end(), ::isdigit) ||
        !std::all_of(whole.begin(), whole.end(), ::isdigit))
      throw ParseError("malformed decimal: " + s);
    BigInt num(whole + frac, 10);
    BigInt den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, frac.size());
    q = Rational(num, den);
    q.canonicalize();
    if (neg) q = -q;
    return q;
  }
  if (mpq_set_str(q.get_mpq_t(), s.c_str(), 10) != 0) throw ParseError("malformed rational: " + s);
  if (q.get_den() == 0) throw ParseError("zero denominator: " + s);
  q.canonicalize();
  return q;
}

std::string to_string(const Rational& r) {
  Rational q = r;
  q.canonicalize();
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

Rational make_rational(long num, unsigned long den) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

BigInt binomial(unsigned long n, unsigned long k) {
  BigInt out;
  if (k > n) return 0;
  mpz_bin_uiui(out.get_mpz_t(), n, k);
  return out;
}

BigInt binomial_prefix_sum(unsigned long n, unsigned long upto) {
  BigInt total = 0;
  for (unsigned long j = 0; j <= std::min(n, upto); ++j) total += binomial(n, j);
  return total;
}

std::vector<std::pair<BigInt, unsigned long>> factorize(const BigInt& n) {
  if (n <= 0) throw PreconditionError("factorize: non-positive input");
  std::map<BigInt, unsigned long> acc;
  BigInt rest = n;
  for (unsigned long p = 2; p < (1u << 12); p += (p == 2 ? 1 : 2)) {
    if (rest == 1) break;
    while (mpz_divisible_ui_p(rest.get_mpz_t(), p)) {
      acc[BigInt(p)] += 1;
      mpz_divexact_ui(rest.get_mpz_t(), rest.get_mpz_t(), p);
    }
  }
  factor_into(rest, acc);
  return {acc.begin(), acc.end()};
}

PowerRational::PowerRational(const Rational& positive) {
  if (sgn(positive) <= 0) throw PreconditionError("PowerRational requires a positive value");
  std::map<BigInt, BigInt> acc;
  for (auto& [p, e] : factorize(positive.get_num())) acc[p] += e;
  for (auto& [p, e] : factorize(positive.get_den())) acc[p] -= e;
  for (auto& [p, e] : acc)
    if (e != 0) factors_.emplace_back(p, e);
}

PowerRational::PowerRational(long num, unsigned long den)
    : PowerRational(make_rational(num, den)) {}

void PowerRational::combine(const PowerRational& rhs, int sign) {
  std::vector<std::pair<BigInt, BigInt>> out;
  out.reserve(factors_.size() + rhs.factors_.size());
  auto a = factors_.begin();
  auto b = rhs.factors_.begin();
  while (a != factors_.end() || b != rhs.factors_.end()) {
    if (b == rhs.factors_.end() || (a != factors_.end() && a->first < b->first)) {
      out.push_back(*a++);
    } else if (a == factors_.end() || b->first < a->first) {
      out.emplace_back(b->first, sign > 0 ? b->second : BigInt(-b->second));
      ++b;
    } else {
      BigInt e = sign > 0 ? BigInt(a->second + b->second) : BigInt(a->second - b->second);
      if (e != 0) out.emplace_back(a->first, e);
      ++a;
      ++b;
    }
  }
  factors_ = std::move(out);
}

PowerRational& PowerRational::operator*=(const PowerRational& rhs) {
  combine(rhs, +1);
  return *this;
}

PowerRational& PowerRational::operator/=(const PowerRational& rhs) {
  combine(rhs, -1);
  return *this;
}

PowerRational PowerRational::pow(const BigInt& e) const {
  PowerRational out;
  if (e == 0) return out;
  out.factors_ = factors_;
  for (auto& [p, x] : out.factors_) x *= e;
  return out;
}

PowerRational PowerRational::inverse() const { return pow(-1); }

bool PowerRational::is_integer() const {
  return std::all_of(factors_.begin(), factors_.end(), [](const auto& f) { return f.second > 0; });
}

double PowerRational::bit_size() const {
  double bits = 0;
  for (const auto& [p, e] : factors_) bits += std::fabs(e.get_d()) * std::log2(p.get_d());
  return bits;
}

double PowerRational::log2_approx() const {
  double v = 0;
  for (const auto& [p, e] : factors_) v += e.get_d() * std::log2(p.get_d());
  return v;
}

std::optional<Rational> PowerRational::to_rational(double max_bits) const {
  if (bit_size() > max_bits) return std::nullopt;
  BigInt num = 1, den = 1;
  for (const auto& [p, e] : factors_) {
    BigInt pw;
    mpz_pow_ui(pw.get_mpz_t(), p.get_mpz_t(), BigInt(abs(e)).get_ui());
    if (e > 0)
      num *= pw;
    else
      den *= pw;
  }
  Rational q(num, den);
  q.canonicalize();
  return q;
}

Rational PowerRational::to_rational_checked(double max_bits) const {
  auto q = to_rational(max_bits);
  if (!q) throw PreconditionError("value too large to materialize exactly: " + to_string());
  return *q;
}

std::string PowerRational::to_string() const {
  if (bit_size() <= kPrintFractionBits) return stabreg::to_string(*to_rational(kPrintFractionBits));
  std::ostringstream os;
  bool first = true;
  for (const auto& [p, e] : factors_) {
    if (!first) os << '*';
    first = false;
    os << p.get_str() << '^' << e.get_str();
  }
  return os.str();
}

int PowerRational::sign_of_log() const {
  if (factors_.empty()) return 0;
  if (bit_size() <= kExactCompareBits) {
    Rational q = *to_rational(kExactCompareBits + 64);
    return cmp(q.get_num(), q.get_den()) > 0 ? 1 : (cmp(q.get_num(), q.get_den()) < 0 ? -1 : 0);
  }
  // Interval evaluation of sum e_p * log2(p); never zero because the
  // product is not 1, so refinement terminates.
  for (mpfr_prec_t prec = 128;; prec *= 2) {
    mpfr_t lo, hi, lp_lo, lp_hi, term, pv;
    mpfr_inits2(prec, lo, hi, lp_lo, lp_hi, term, pv, static_cast<mpfr_ptr>(nullptr));
    mpfr_set_zero(lo, 1);
    mpfr_set_zero(hi, 1);
    for (const auto& [p, e] : factors_) {
      mpfr_set_z(pv, p.get_mpz_t(), MPFR_RNDN);  // exact: primes here are small
      mpfr_log2(lp_lo, pv, MPFR_RNDD);
      mpfr_log2(lp_hi, pv, MPFR_RNDU);
      if (e > 0) {
        mpfr_mul_z(term, lp_lo, e.get_mpz_t(), MPFR_RNDD);
        mpfr_add(lo, lo, term, MPFR_RNDD);
        mpfr_mul_z(term, lp_hi, e.get_mpz_t(), MPFR_RNDU);
        mpfr_add(hi, hi, term, MPFR_RNDU);
      } else {
        mpfr_mul_z(term, lp_hi, e.get_mpz_t(), MPFR_RNDD);
        mpfr_add(lo, lo, term, MPFR_RNDD);
        mpfr_mul_z(term, lp_lo, e.get_mpz_t(), MPFR_RNDU);
        mpfr_add(hi, hi, term, MPFR_RNDU);
      }
    }
    int result = 0;
    if (mpfr_sgn(lo) > 0)
      result = 1;
    else if (mpfr_sgn(hi) < 0)
      result = -1;
    mpfr_clears(lo, hi, lp_lo, lp_hi, term, pv, static_cast<mpfr_ptr>(nullptr));
    if (result != 0) return result;
    if (prec > (1 << 20)) throw Error("PowerRational comparison failed to converge");
  }
}

int PowerRational::compare(const PowerRational& rhs) const {
  if (factors_ == rhs.factors_) return 0;
  return (*this / rhs).sign_of_log();
}

int PowerRational::compare(const Rational& rhs) const {
  if (sgn(rhs) <= 0) return 1;
  return compare(PowerRational(rhs));
}

}  // namespace stabreg
