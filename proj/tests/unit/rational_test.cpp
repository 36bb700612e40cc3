#include <gtest/gtest.h>

#include "stabreg/errors.hpp"
#include "stabreg/rational.hpp"

using namespace stabreg;

TEST(Rational, ParsesFractionsIntegersAndDecimals) {
  EXPECT_EQ(parse_rational("3/10"), Rational(3, 10));
  EXPECT_EQ(parse_rational(" 6/20 "), Rational(3, 10));
  EXPECT_EQ(parse_rational("0.25"), Rational(1, 4));
  EXPECT_EQ(parse_rational("0.08"), Rational(2, 25));
  EXPECT_EQ(parse_rational("-1.5"), Rational(-3, 2));
  EXPECT_EQ(parse_rational("7"), Rational(7));
  EXPECT_THROW(parse_rational(""), ParseError);
  EXPECT_THROW(parse_rational("1/0"), ParseError);
  EXPECT_THROW(parse_rational("a/b"), ParseError);
  EXPECT_THROW(parse_rational("1.2/3"), ParseError);
}

TEST(Rational, PrintsReduced) {
  EXPECT_EQ(to_string(make_rational(6, 8)), "3/4");
  EXPECT_EQ(to_string(make_rational(4, 2)), "2");
}

TEST(Rational, Binomials) {
  EXPECT_EQ(binomial(16, 8), 12870);
  EXPECT_EQ(binomial(3, 5), 0);
  EXPECT_EQ(binomial_prefix_sum(4, 2), 1 + 4 + 6);
  EXPECT_EQ(binomial_prefix_sum(4, 9), 16);
}

TEST(Rational, Factorize) {
  auto f = factorize(BigInt(360));
  ASSERT_EQ(f.size(), 3u);
  EXPECT_EQ(f[0].first, 2);
  EXPECT_EQ(f[0].second, 3u);
  EXPECT_EQ(f[2].first, 5);
  // Product of two primes above the trial-division range.
  BigInt p("1000000007"), q("998244353");
  auto g = factorize(p * q);
  ASSERT_EQ(g.size(), 2u);
  EXPECT_EQ(g[0].first, q);
  EXPECT_EQ(g[1].first, p);
}

TEST(PowerRational, ArithmeticMatchesRational) {
  PowerRational a(Rational(3, 10));
  PowerRational b(Rational(27, 32000));
  EXPECT_EQ(*(a * b).to_rational(), Rational(81, 320000));
  EXPECT_EQ(*(a / b).to_rational(), Rational(3200, 9));
  EXPECT_EQ(*a.pow(3).to_rational(), Rational(27, 1000));
  EXPECT_EQ(*a.pow(-2).to_rational(), Rational(100, 9));
  EXPECT_TRUE((a / a).is_one());
  EXPECT_EQ(a.to_string(), "3/10");
}

TEST(PowerRational, ComparesHugeValuesExactly) {
  PowerRational x(Rational(1, 4));
  PowerRational tiny = x.pow(BigInt("100000000000"));  // 2^-200000000000
  EXPECT_LT(tiny, PowerRational(Rational(1, 1000000)));
  EXPECT_GT(tiny, PowerRational(Rational(1, 8)).pow(BigInt("100000000000")));
  // 3^e vs 2^f with log ratio extremely close: 3^665 vs 2^1054 (3^665 > 2^1054).
  PowerRational t3 = PowerRational(3).pow(665), t2 = PowerRational(2).pow(1054);
  EXPECT_GT(t3, t2);
  EXPECT_EQ(t3.compare(t3), 0);
  EXPECT_GT(PowerRational(Rational(1, 2)), Rational(0));
  EXPECT_TRUE(tiny.to_string().find('^') != std::string::npos);
  EXPECT_FALSE(tiny.to_rational().has_value());
}
