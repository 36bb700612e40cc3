#include <gtest/gtest.h>

#include <set>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "stabreg/tripling.hpp"

using namespace stabreg;

namespace {

RepElement el(std::int64_t a, std::int64_t b = 0, std::int64_t c = 0) {
  RepElement x;
  x.v = {a, b, c, 0};
  return x;
}

ElementSet interval(std::int64_t lo, std::int64_t hi) {
  std::vector<RepElement> v;
  for (auto i = lo; i <= hi; ++i) v.push_back(el(i));
  return ElementSet(v);
}

bool check_named(const std::vector<TriplingCheck>& checks, const std::string& name) {
  for (const auto& c : checks)
    if (c.name == name) return c.ok;
  ADD_FAILURE() << "no check named " << name;
  return false;
}

}  // namespace

TEST(RepGroup, Parsing) {
  EXPECT_EQ(make_rep_group("Z")->name(), "Z");
  EXPECT_EQ(make_rep_group("Z^2")->arity(), 2u);
  auto zf = make_rep_group("ZxZ/6");
  EXPECT_EQ(zf->arity(), 2u);
  EXPECT_EQ(zf->name(), "ZxZ/6");
  EXPECT_EQ(make_rep_group("Z^2xS/3")->arity(), 3u);
  EXPECT_EQ(make_rep_group("H3")->name(), "H3");
  EXPECT_EQ(make_rep_group("H3/5")->name(), "H3/5");
  EXPECT_TRUE(make_rep_group("finite:D/4")->finite());
  EXPECT_THROW(make_rep_group("Q"), ParseError);
  EXPECT_THROW(make_rep_group("Z^5"), ParseError);
  EXPECT_THROW(make_rep_group("H3/1"), ParseError);
  EXPECT_THROW(parse_element(*zf, "(1,6)"), ParseError);
  EXPECT_THROW(parse_element(*zf, "(1)"), ParseError);
  EXPECT_EQ(parse_element(*zf, " ( -3 , 5 ) "), el(-3, 5));
  EXPECT_EQ(format_element(*zf, el(-3, 5)), "(-3,5)");
}

TEST(RepGroup, HeisenbergLaw) {
  auto h = make_rep_group("H3");
  auto a = el(1, 0, 0), b = el(0, 1, 0);
  // [a, b] is central and equals (0, 0, 1).
  auto comm = h->mul(h->mul(a, b), h->mul(h->inv(a), h->inv(b)));
  EXPECT_EQ(comm, el(0, 0, 1));
  for (std::int64_t i = -2; i <= 2; ++i)
    for (std::int64_t j = -2; j <= 2; ++j) {
      auto x = el(i, j, i * j - 1);
      EXPECT_EQ(h->mul(x, h->inv(x)), h->identity());
      EXPECT_EQ(h->mul(h->inv(x), x), h->identity());
    }
  auto h3 = make_rep_group("H3/3");
  EXPECT_EQ(h3->mul(el(2, 2, 2), el(2, 2, 2)), el(1, 1, 2));  // (4, 4, 2 + 2 + 2*2) mod 3
}

TEST(ElementSets, Basics) {
  auto z = make_rep_group("Z");
  auto a = interval(0, 9);
  EXPECT_EQ(product_set(*z, a, ElementSet({z->identity()})), a);
  EXPECT_EQ(inverse_set(*z, inverse_set(*z, a)), a);
  auto x = product_set(*z, product_set(*z, a, inverse_set(*z, a)), a);
  EXPECT_EQ(x, interval(-9, 18));
  EXPECT_EQ(x.size(), 28u);
  EXPECT_EQ(alternation_ratio(*z, a), make_rational(28, 10));
  auto r = ruzsa_check(*z, a);
  EXPECT_EQ(r.lhs, 55u);
  EXPECT_TRUE(r.holds);
  EXPECT_EQ(r.rhs, make_rational(28, 10) * make_rational(28, 10) * make_rational(28, 10) * make_rational(28, 10) * 28);
  TriplingCaps tiny;
  tiny.product_evaluations = 50;
  EXPECT_THROW(product_set(*z, a, a, tiny), CapExceeded);
  EXPECT_EQ(symdiff_size(interval(0, 4), interval(2, 6)), 4u);
  EXPECT_EQ(set_symdiff(interval(0, 4), interval(2, 6)), ElementSet({el(0), el(1), el(5), el(6)}));
}

TEST(ElementSets, SubgroupRatioIsOne) {
  auto g = make_rep_group("ZxZ/6");
  auto a = parse_element_set(*g, "subgroup:(0,1)");
  EXPECT_EQ(a.size(), 6u);
  EXPECT_EQ(alternation_ratio(*g, a), Rational(1));
  auto r = ruzsa_check(*g, a);
  EXPECT_EQ(r.lhs, 6u);
  EXPECT_EQ(r.rhs, Rational(6));
}

TEST(RelativeValues, IntervalSpectrum) {
  auto z = make_rep_group("Z");
  auto p = relative_values(*z, interval(0, 9));
  EXPECT_EQ(p.x_size, 28u);
  EXPECT_EQ(p.profile.normalizer, 28u);
  std::vector<Rational> expect;
  for (long j = 0; j <= 9; ++j) expect.push_back(make_rational(2 * j, 28));
  EXPECT_EQ(p.profile.distinct_values(), expect);
  // Filtered domain is exactly {-9, ..., 9}, by brute force over a wide window.
  std::set<std::int64_t> dom;
  for (std::int64_t g = -40; g <= 40; ++g) {
    bool inside = true;
    for (std::int64_t a = 0; a <= 9; ++a) inside &= a + g >= -9 && a + g <= 18;
    if (inside) dom.insert(g);
  }
  std::set<std::int64_t> got;
  for (const auto& x : p.domain) got.insert(x.v[0]);
  EXPECT_EQ(got, dom);
  for (std::size_t i = 0; i < p.domain.size(); ++i)
    EXPECT_EQ(p.counts[i], std::size_t(2 * std::min<std::int64_t>(std::abs(p.domain[i].v[0]), 10)));
}

TEST(RelativeValues, SubgroupAndIdentity) {
  auto g = make_rep_group("ZxZ/6");
  auto a = parse_element_set(*g, "subgroup:(0,2)");
  auto p = relative_values(*g, a);
  EXPECT_EQ(p.profile.distinct_values(), std::vector<Rational>{Rational(0)});
  EXPECT_EQ(ElementSet(p.domain), a);
  auto q = relative_values(*g, parse_element_set(*g, "(0,0);(3,1);(5,4)"));
  bool has_identity = false;
  for (std::size_t i = 0; i < q.domain.size(); ++i)
    if (q.domain[i] == g->identity()) has_identity = q.counts[i] == 0;
  EXPECT_TRUE(has_identity);
}

TEST(RepStability, MatchesFiniteGroupSearch) {
  StabilityOptions o;
  o.k_cap = 64;
  for (const char* spec : {"S/3", "Z/7", "D/4", "Q/8"}) {
    auto rg = make_rep_group(std::string("finite:") + spec);
    auto fg = rg->finite();
    for (oracle::Mask m = 1; m < (oracle::Mask(1) << fg->order()); m += 3) {
      std::vector<RepElement> v;
      for (Element x = 0; x < fg->order(); ++x)
        if (m >> x & 1) v.push_back(el(x));
      auto r = rep_stability_index(*rg, ElementSet(v), o);
      ASSERT_TRUE(r.exact);
      EXPECT_EQ(int(r.index), oracle::largest_half_graph(*fg, m) + 1) << spec << " " << m;
    }
  }
}

TEST(RepStability, IntervalsInZ) {
  auto z = make_rep_group("Z");
  StabilityOptions o;
  o.k_cap = 16;
  for (std::int64_t n = 1; n <= 6; ++n) {
    auto r = rep_stability_index(*z, interval(0, n - 1), o);
    EXPECT_TRUE(r.exact);
    // a_i = i, b_j = n - 1 - j is a half-graph of size n, and no larger one fits.
    EXPECT_EQ(r.index, std::size_t(n + 1));
  }
  EXPECT_TRUE(rep_has_half_graph(*z, interval(0, 3), 4));
  EXPECT_FALSE(rep_has_half_graph(*z, interval(0, 3), 5));
}

TEST(DecomposeTripling, FiniteSubgroupInZxZ6) {
  auto g = make_rep_group("ZxZ/6");
  auto a = parse_element_set(*g, "subgroup:(0,1)");
  auto r = decompose_tripling(g, a, Rational(1, 4));
  EXPECT_EQ(r.c, Rational(1));
  EXPECT_EQ(r.k_used, 2u);
  EXPECT_EQ(r.H, a);
  ASSERT_EQ(r.C.size(), 1u);
  EXPECT_EQ(r.C[0], g->identity());
  ASSERT_EQ(r.D.size(), 1u);
  EXPECT_EQ(r.D[0], g->identity());
  EXPECT_EQ(r.error_count, 0u);
  auto v = verify_tripling(*g, a, Rational(1, 4), r);
  EXPECT_TRUE(all_ok(v)) << to_json(v).dump();
}

TEST(DecomposeTripling, IntervalOfHundred) {
  auto z = make_rep_group("Z");
  auto a = interval(0, 99);
  auto r = decompose_tripling(z, a, Rational(1, 4));
  EXPECT_EQ(r.H, ElementSet({z->identity()}));
  EXPECT_EQ(r.C, a.elements());
  EXPECT_EQ(r.D, a.elements());
  EXPECT_EQ(r.error_count, 0u);
  EXPECT_EQ(r.c, make_rational(298, 100));
  // The nonzero relative values start at 2/298, so eta falls below them.
  EXPECT_EQ(r.eta.candidate_index, 1u);
  EXPECT_TRUE(all_ok(verify_tripling(*z, a, Rational(1, 4), r)));
}

TEST(DecomposeTripling, SubgroupPlusCosetInZxZ12) {
  auto g = make_rep_group("ZxZ/12");
  auto a = parse_element_set(*g, "subgroup:(0,3) + coset:(1,0)@(0,3)");
  ASSERT_EQ(a.size(), 8u);
  for (auto eps : {Rational(1, 2), Rational(1, 4)}) {
    auto r = decompose_tripling(g, a, eps);
    auto v = verify_tripling(*g, a, eps, r);
    EXPECT_TRUE(all_ok(v)) << to_json(v).dump();
    EXPECT_EQ(r.H, parse_element_set(*g, "subgroup:(0,3)"));
    EXPECT_EQ(r.error_count, 0u);
  }
}

TEST(DecomposeTripling, Heisenberg) {
  auto h3 = make_rep_group("H3/3");
  auto sub = parse_element_set(*h3, "subgroup:(1,0,0);(0,0,1)");
  ASSERT_EQ(sub.size(), 9u);
  auto two = parse_element_set(*h3, "subgroup:(1,0,0);(0,0,1) + coset:(0,1,0)@(1,0,0);(0,0,1)");
  ASSERT_EQ(two.size(), 18u);
  for (const auto& a : {sub, two})
    for (auto eps : {Rational(1, 2), Rational(1, 4)}) {
      auto r = decompose_tripling(h3, a, eps);
      EXPECT_TRUE(all_ok(verify_tripling(*h3, a, eps, r)));
      EXPECT_EQ(r.error_count, 0u);
    }
  auto hz = make_rep_group("H3");
  auto box = parse_element_set(*hz, "(0,0,0);(1,0,0);(0,1,0);(1,1,0);(0,0,1)");
  auto r = decompose_tripling(hz, box, Rational(1, 2));
  EXPECT_TRUE(all_ok(verify_tripling(*hz, box, Rational(1, 2), r)));
}

TEST(DecomposeTripling, FiniteBridgeAgreesWithDecompose) {
  auto g = make_rep_group("finite:Z/12");
  auto a = parse_element_set(*g, "0;4;8");
  auto r = decompose_tripling(g, a, Rational(1, 4));
  EXPECT_EQ(r.k_star_source, "exact-phi");
  EXPECT_EQ(r.H, a);
  EXPECT_EQ(r.error_count, 0u);
}

TEST(DecomposeTripling, Contracts) {
  auto z = make_rep_group("Z");
  EXPECT_THROW(decompose_tripling(z, ElementSet(), Rational(1, 4)), PreconditionError);
  EXPECT_THROW(decompose_tripling(z, interval(0, 3), Rational(3, 4)), PreconditionError);
  TriplingOptions o;
  o.supplied_k = 3;
  EXPECT_THROW(decompose_tripling(z, interval(0, 3), Rational(1, 4), o), PreconditionError);
  o.supplied_k = 5;
  auto r = decompose_tripling(z, interval(0, 3), Rational(1, 4), o);
  EXPECT_TRUE(r.k_supplied);
  EXPECT_TRUE(all_ok(verify_tripling(*z, interval(0, 3), Rational(1, 4), r)));
}

TEST(VerifyTripling, DetectsTampering) {
  auto g = make_rep_group("ZxZ/12");
  auto a = parse_element_set(*g, "subgroup:(0,3) + coset:(1,0)@(0,3)");
  auto r = decompose_tripling(g, a, Rational(1, 4));
  auto grown = r;
  auto hv = grown.H.elements();
  hv.push_back(el(0, 1));
  grown.H = ElementSet(hv);
  EXPECT_FALSE(check_named(verify_tripling(*g, a, Rational(1, 4), grown), "H is a subgroup"));
  auto dropped = r;
  dropped.D.pop_back();
  auto v = verify_tripling(*g, a, Rational(1, 4), dropped);
  EXPECT_FALSE(check_named(v, "error count"));
  EXPECT_FALSE(check_named(v, "D = dense representatives"));
  auto moved = r;
  moved.C[0] = el(5, 5);
  EXPECT_FALSE(check_named(verify_tripling(*g, a, Rational(1, 4), moved), "C inside A"));
}

TEST(ElementSets, ParseSpecs) {
  auto g = make_rep_group("Z^2");
  auto s = parse_element_set(*g, "[[0,0],[1,2]] + (3,4);(5,6)");
  EXPECT_EQ(s.size(), 4u);
  EXPECT_EQ(parse_element_set(*make_rep_group("Z"), "interval:-2,2").size(), 5u);
  EXPECT_THROW(parse_element_set(*make_rep_group("Z"), "subgroup:1"), CapExceeded);
  EXPECT_THROW(parse_element_set(*g, "coset:(1,1)"), ParseError);
}

TEST(TriplingJson, Fields) {
  auto g = make_rep_group("ZxZ/6");
  auto a = parse_element_set(*g, "subgroup:(0,1)");
  auto j = to_json(decompose_tripling(g, a, Rational(1, 4)));
  EXPECT_EQ(j["c"], "1");
  EXPECT_EQ(j["H"].size(), 6u);
  EXPECT_EQ(j["C"], nlohmann::json::array({nlohmann::json::array({0, 0})}));
  EXPECT_TRUE(j["ledger"]["ruzsa"]["holds"]);
  EXPECT_TRUE(j.contains("threshold_A"));
  EXPECT_TRUE(j.contains("threshold_X"));
}

TEST(Ruzsa, TallyOverSmallSets) {
  auto z = make_rep_group("Z");
  auto h3 = make_rep_group("H3/3");
  const auto before = ruzsa_tally();
  std::size_t calls = 0;
  for (std::int64_t n = 1; n <= 12; ++n, ++calls) ruzsa_check(*z, interval(0, n - 1));
  for (std::uint32_t m = 1; m < 64; ++m, ++calls) {
    std::vector<RepElement> v;
    for (int b = 0; b < 6; ++b)
      if (m >> b & 1) v.push_back(el(b % 3, b / 3, (b * 2) % 3));
    ruzsa_check(*h3, ElementSet(v));
  }
  const auto after = ruzsa_tally();
  EXPECT_EQ(after.checked - before.checked, calls);
  EXPECT_EQ(after.failed, 0u);
}
