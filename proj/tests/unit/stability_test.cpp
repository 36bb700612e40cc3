#include <gtest/gtest.h>

#include "oracles.hpp"
#include "stabreg/stability.hpp"

using namespace stabreg;

namespace {

GroupSubset make(const GroupHandle& g, std::vector<Element> el) { return GroupSubset::from_elements(g, el); }

StabilityOptions exact_opts() {
  StabilityOptions o;
  o.k_cap = 64;
  return o;
}

}  // namespace

TEST(HalfGraph, Examples) {
  auto z8 = build_group("Z/8");
  EXPECT_EQ(half_graph(translation_relation(GroupSubset(z8)), 1).status, SearchStatus::kAbsent);
  auto h = make(z8, {0, 2, 4, 6});
  EXPECT_EQ(half_graph(translation_relation(h), 2).status, SearchStatus::kAbsent);
  auto a = make(z8, {0, 1, 2, 3});
  auto rel = translation_relation(a);
  auto r = half_graph(rel, 2);
  ASSERT_EQ(r.status, SearchStatus::kFound);
  EXPECT_TRUE(verify_half_graph(rel, *r.witness));
  EXPECT_TRUE(has_half_graph(a, 2));
  EXPECT_FALSE(has_half_graph(h, 2));
}

TEST(HalfGraph, VerifyRejectsBadWitness) {
  auto z8 = build_group("Z/8");
  auto rel = translation_relation(make(z8, {0, 1, 2, 3}));
  HalfGraphWitness w{{0, 0}, {0, 1}};
  EXPECT_FALSE(verify_half_graph(rel, w));
}

TEST(StabilityIndex, Examples) {
  auto z7 = build_group("Z/7");
  EXPECT_EQ(stability_index(GroupSubset(z7)).index, 1u);
  EXPECT_EQ(stability_index(make(z7, {3})).index, 2u);
  EXPECT_EQ(stability_index(GroupSubset::full(z7)).index, 2u);
  auto r = stability_index(make(z7, {0, 1, 2}));
  EXPECT_TRUE(r.exact);
  EXPECT_EQ(int(r.index), oracle::largest_half_graph(*z7, 0b111) + 1);
  auto z12 = build_group("Z/12");
  EXPECT_EQ(stability_index(make(z12, {1, 5, 9})).index, 2u);
  EXPECT_EQ(stability_index(make(z12, {0, 4, 8})).index, 2u);
}

TEST(StabilityIndex, MatchesBruteForce) {
  for (const char* spec : {"Z/6", "S/3", "Z/7", "D/4", "Q/8", "Z/2xZ/4", "Z/9"}) {
    auto g = build_group(spec);
    for (oracle::Mask m = 0; m < (oracle::Mask(1) << g->order()); ++m) {
      auto a = oracle::subset_of(g, m);
      auto r = stability_index(a, exact_opts());
      ASSERT_TRUE(r.exact);
      EXPECT_EQ(int(r.index), oracle::largest_half_graph(*g, m) + 1) << spec << " " << m;
      if (r.witness) EXPECT_TRUE(verify_half_graph(translation_relation(a), *r.witness));
      EXPECT_LE(r.index, stability_counting_bound(a));
    }
  }
}

TEST(StabilityIndex, LargerGroupsSampled) {
  for (const char* spec : {"Z/16", "D/8", "Z/2xQ/8", "S/4"}) {
    auto g = build_group(spec);
    std::uint64_t s = 12345;
    for (int t = 0; t < 40; ++t) {
      s = s * 6364136223846793005ull + 1442695040888963407ull;
      oracle::Mask m = (s >> 11) & ((oracle::Mask(1) << g->order()) - 1);
      auto r = stability_index(oracle::subset_of(g, m), exact_opts());
      ASSERT_TRUE(r.exact);
      EXPECT_EQ(int(r.index), oracle::largest_half_graph(*g, m) + 1) << spec << " " << m;
    }
  }
}

TEST(StabilityIndex, EmptyAndCosetEquivalence) {
  for (const char* spec : {"Z/8", "D/4", "Q/8", "S/3", "Z/2xZ/2xZ/2", "Z/10"}) {
    auto g = build_group(spec);
    auto subs = oracle::subgroups(*g);
    for (oracle::Mask m = 0; m < (oracle::Mask(1) << g->order()); ++m) {
      auto k = stability_index(oracle::subset_of(g, m)).index;
      EXPECT_EQ(k == 1, m == 0);
      if (m != 0) EXPECT_EQ(k == 2, oracle::is_left_coset_of_some_subgroup(*g, m, subs)) << spec << " " << m;
    }
  }
}

TEST(StabilityIndex, TranslationAndComplement) {
  for (const char* spec : {"S/3", "D/4", "Q/8", "Z/8"}) {
    auto g = build_group(spec);
    for (oracle::Mask m = 0; m < (oracle::Mask(1) << g->order()); ++m) {
      auto a = oracle::subset_of(g, m);
      auto k = stability_index(a).index;
      for (Element x = 1; x < g->order(); x += 3) {
        EXPECT_EQ(stability_index(translate_left(x, a)).index, k);
        EXPECT_EQ(stability_index(translate_right(a, x)).index, k);
      }
      EXPECT_LE(stability_index(complement(a)).index, k + 1);
    }
  }
}

TEST(PhiStability, MatchesBruteForce) {
  for (const char* spec : {"Z/5", "S/3", "Z/6"}) {
    auto g = build_group(spec);
    for (oracle::Mask m = 0; m < (oracle::Mask(1) << g->order()); ++m) {
      auto a = oracle::subset_of(g, m);
      auto r = phi_stability(a, exact_opts());
      ASSERT_TRUE(r.exact);
      EXPECT_EQ(int(r.index), oracle::largest_phi_half_graph(*g, m) + 1) << spec << " " << m;
      EXPECT_LE(r.index, phi_counting_bound(a));
      if (r.witness) EXPECT_TRUE(verify_half_graph(phi_A_relation(a), *r.witness));
    }
  }
}

TEST(PhiStability, ComplementInvariant) {
  for (const char* spec : {"Z/7", "D/4"}) {
    auto g = build_group(spec);
    for (oracle::Mask m = 0; m < (oracle::Mask(1) << g->order()); m += 3) {
      auto a = oracle::subset_of(g, m);
      EXPECT_EQ(phi_stability(a, exact_opts()).index, phi_stability(complement(a), exact_opts()).index);
    }
  }
}

TEST(PhiStability, CappedSearchReportsBound) {
  auto z10 = build_group("Z/10");
  auto a = make(z10, {0, 1, 2, 3, 5});
  StabilityOptions o;
  o.k_cap = 2;
  auto r = phi_stability(a, o);
  EXPECT_FALSE(r.exact);
  EXPECT_GE(r.index, r.lower);
  EXPECT_EQ(r.index, phi_counting_bound(a));
}

TEST(Ramsey, Values) {
  EXPECT_EQ(ramsey_upper(2, 3), 3);
  EXPECT_EQ(ramsey_upper(3, 3), 6);
  EXPECT_EQ(ramsey_upper(4, 3), 9);
  EXPECT_EQ(ramsey_upper(4, 4), 18);
  EXPECT_EQ(ramsey_upper(9, 9), 12870);
  EXPECT_TRUE(ramsey_exact_known(3, 5));
  EXPECT_FALSE(ramsey_exact_known(5, 5));
}

TEST(KStarBound, Examples) {
  auto k2 = k_star_bound(2);
  ASSERT_TRUE(k2.sharp.value);
  EXPECT_EQ(*k2.sharp.value, 7);
  ASSERT_TRUE(k2.crude.value);
  EXPECT_EQ(*k2.crude.value, BigInt(16385));
  auto k3 = k_star_bound(3);
  EXPECT_EQ(*k3.sharp.value, 12871);
  EXPECT_EQ(k3.sharp.to_string(), "12871");
  EXPECT_EQ(k3.sharp.clamp(100), 100u);
  auto k6 = k_star_bound(6);
  EXPECT_GT(k6.sharp.log2, 100);
}

TEST(ClosureBounds, Examples) {
  auto c = closure_bounds(2, 2);
  EXPECT_EQ(c.complement, 3u);
  EXPECT_EQ(c.intersection, 2);
  EXPECT_EQ(c.uni, 7);
  auto d = closure_bounds(2, 3);
  EXPECT_EQ(d.intersection, 3);
  EXPECT_EQ(d.uni, 10);
}

TEST(ClosureBounds, UnionOfTwoCosetsCanHaveIndexFour) {
  // {e} and {(0 2 1), (1 2 0)} are cosets; their union holds a half-graph of size 3.
  auto s3 = build_group("S/3");
  auto u = make(s3, {0, 1, 3});
  EXPECT_EQ(stability_index(make(s3, {0})).index, 2u);
  EXPECT_EQ(stability_index(make(s3, {1, 3})).index, 2u);
  EXPECT_EQ(stability_index(u).index, 4u);
  EXPECT_EQ(oracle::largest_half_graph(*s3, 0b1011), 3);
}

TEST(ClosureBounds, HoldExhaustively) {
  auto g = build_group("S/3");
  std::vector<std::size_t> idx(64);
  for (oracle::Mask m = 0; m < 64; ++m) idx[m] = stability_index(oracle::subset_of(g, m)).index;
  for (oracle::Mask a = 0; a < 64; ++a)
    for (oracle::Mask b = 0; b < 64; ++b) {
      if (idx[a] < 2 || idx[b] < 2) continue;
      auto c = closure_bounds(idx[a], idx[b]);
      EXPECT_LE(BigInt(idx[a & b]), c.intersection);
      EXPECT_LE(BigInt(idx[a | b]), c.uni);
    }
}

TEST(KStar, Choice) {
  auto z12 = build_group("Z/12");
  auto c = choose_k_star(make(z12, {0, 4, 8}), 2, exact_opts());
  EXPECT_EQ(c.source, "exact-phi");
  EXPECT_EQ(c.value, c.phi.index);
  EXPECT_LE(c.value, 7u);
  EXPECT_GE(c.value, 2u);
}

TEST(Memo, AgreesWithDirect) {
  StabilityMemo memo(exact_opts());
  auto g = build_group("D/4");
  for (oracle::Mask m = 0; m < 256; ++m) {
    auto a = oracle::subset_of(g, m);
    EXPECT_EQ(memo.stability(a).index, stability_index(a, exact_opts()).index);
    if (m % 5 == 0) EXPECT_EQ(memo.phi(a).index, phi_stability(a, exact_opts()).index);
  }
  EXPECT_LT(memo.size(), 256u);
}
