#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "stabreg/regularity.hpp"

using namespace stabreg;

namespace {

GroupSubset make(const GroupHandle& g, std::vector<Element> el) { return GroupSubset::from_elements(g, el); }

std::size_t element_order(const FiniteGroup& g, Element x) {
  std::size_t k = 1;
  for (Element y = x; y != 0; y = g.mul(y, x)) ++k;
  return k;
}

// Every nonempty left coset of every subgroup, as masks.
std::vector<oracle::Mask> all_cosets(const FiniteGroup& g) {
  std::vector<oracle::Mask> out;
  for (oracle::Mask h : oracle::subgroups(g))
    for (Element x = 0; x < g.order(); ++x) {
      oracle::Mask c = 0;
      for (Element y = 0; y < g.order(); ++y)
        if (h >> y & 1) c |= oracle::Mask(1) << g.mul(x, y);
      if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
    }
  return out;
}

}  // namespace

TEST(Decompose, EmptySet) {
  for (const char* spec : {"Z/7", "S/3", "Q/8"}) {
    auto g = build_group(spec);
    for (auto eps : {Rational(1, 2), Rational(1, 8)}) {
      auto r = decompose(GroupSubset(g), eps);
      EXPECT_EQ(r.H, GroupSubset::full(g));
      EXPECT_TRUE(r.D.empty());
      EXPECT_EQ(r.error_count, 0u);
      EXPECT_EQ(r.k_used, 1u);
      EXPECT_TRUE(verify_report(GroupSubset(g), eps, r).ok());
    }
  }
}

TEST(Decompose, SubgroupOfZ12) {
  auto z12 = build_group("Z/12");
  auto a = make(z12, {0, 4, 8});
  auto r = decompose(a, Rational(1, 4));
  EXPECT_EQ(r.eta.eta, Rational(1, 4));
  EXPECT_EQ(r.eta.candidate_index, 0u);
  EXPECT_EQ(r.H, a);
  EXPECT_EQ(r.m, 4u);
  EXPECT_EQ(r.D, a);
  EXPECT_EQ(r.error_count, 0u);
  ASSERT_EQ(r.cosets.size(), 4u);
  EXPECT_TRUE(r.cosets[0].dense);
  EXPECT_EQ(r.cosets[0].in_a, 3u);
  for (std::size_t i = 1; i < 4; ++i) EXPECT_FALSE(r.cosets[i].dense);
  EXPECT_TRUE(r.bounds.index_bound_held);
  EXPECT_TRUE(r.dichotomy_eta_held);
  auto v = verify_report(a, Rational(1, 4), r);
  EXPECT_TRUE(v.ok()) << v.failures();
}

TEST(Decompose, TwoCosetsMinusOnePoint) {
  auto z30 = build_group("Z/30");
  std::vector<Element> el;
  for (Element x = 0; x < 30; x += 5) el.push_back(x);
  for (Element x = 1; x < 30; x += 5) el.push_back(x);
  el.erase(std::find(el.begin(), el.end(), Element(11)));
  auto a = make(z30, el);
  const Rational eps(1, 10);
  auto r = decompose(a, eps);
  auto v = verify_report(a, eps, r);
  EXPECT_TRUE(v.ok()) << v.failures();

  // Independent oracle: H is closed in Z/30, D a union of its cosets, and
  // the error stays below eps |H|.
  const oracle::Mask h = oracle::mask_of(r.H);
  ASSERT_TRUE(h & 1);
  for (Element x = 0; x < 30; ++x)
    for (Element y = 0; y < 30; ++y)
      if ((h >> x & 1) && (h >> y & 1)) ASSERT_TRUE(h >> z30->mul(x, y) & 1);
  const std::size_t hs = oracle::popcount(h);
  for (Element x = 0; x < 30; ++x) {
    if (!r.D.contains(x)) continue;
    for (Element y = 0; y < 30; ++y)
      if (h >> y & 1) EXPECT_TRUE(r.D.contains(z30->mul(x, y)));
  }
  const int err = oracle::popcount(oracle::mask_of(a) ^ oracle::mask_of(r.D));
  EXPECT_EQ(std::size_t(err), r.error_count);
  EXPECT_LT(Rational(err), eps * static_cast<unsigned long>(hs));
  // With an error budget below 6/10 |H|, the missing point forces a fine
  // subgroup, and D then reproduces A.
  EXPECT_EQ(r.D, a);
}

TEST(Decompose, SuppliedK) {
  auto z12 = build_group("Z/12");
  auto a = make(z12, {0, 1, 2, 3});
  DecomposeOptions o;
  o.supplied_k = 2;
  EXPECT_THROW(decompose(a, Rational(1, 4), o), PreconditionError);
  o.override_k_check = true;
  // k = 2 is a false hypothesis here; whatever happens must be reported, not
  // silently accepted.
  try {
    auto r = decompose(a, Rational(1, 4), o);
    EXPECT_TRUE(r.k_unverified);
    EXPECT_TRUE(verify_report(a, Rational(1, 4), r).ok());
  } catch (const TheoremViolation&) {
  }
  o.override_k_check = false;
  o.supplied_k = stability_index(a).index;
  auto r = decompose(a, Rational(1, 4), o);
  EXPECT_TRUE(r.k_supplied);
  EXPECT_FALSE(r.k_unverified);
  EXPECT_TRUE(verify_report(a, Rational(1, 4), r).ok());
}

TEST(Decompose, RejectsBadEpsilon) {
  auto z5 = build_group("Z/5");
  auto a = make(z5, {0});
  EXPECT_THROW(decompose(a, Rational(0)), PreconditionError);
  EXPECT_THROW(decompose(a, Rational(3, 4)), PreconditionError);
  EXPECT_THROW(decompose_normal(a, Rational(-1, 4)), PreconditionError);
}

TEST(Decompose, DegenerateStabilityReproducesA) {
  for (const auto& spec : dsl_groups_up_to(12)) {
    auto g = build_group(spec);
    std::vector<oracle::Mask> sets = all_cosets(*g);
    sets.push_back(0);
    for (oracle::Mask m : sets) {
      auto a = oracle::subset_of(g, m);
      ASSERT_LE(stability_index(a).index, 2u);
      for (auto eps : {Rational(1, 2), Rational(1, 8)}) {
        auto r = decompose(a, eps);
        EXPECT_EQ(r.D, a) << spec << " " << m;
        EXPECT_EQ(r.error_count, 0u);
      }
    }
  }
}

TEST(Decompose, SmallFamilyVerifies) {
  StabilityMemo memo;
  for (const char* spec : {"Z/6", "S/3", "Z/8", "D/4", "Q/8"}) {
    auto g = build_group(spec);
    for (oracle::Mask m = 0; m < (oracle::Mask(1) << g->order()); ++m) {
      auto a = oracle::subset_of(g, m);
      if (memo.stability(a).index > 4) continue;
      for (auto eps : {Rational(1, 2), Rational(1, 4), Rational(1, 8)}) {
        auto r = decompose(a, eps);
        auto v = verify_report(a, eps, r);
        ASSERT_TRUE(v.ok()) << spec << " " << m << "\n" << v.failures();
        EXPECT_TRUE(r.dichotomy_eta_held);
      }
    }
  }
}

TEST(Decompose, MemoDoesNotChangeReports) {
  StabilityMemo memo;
  DecomposeOptions with;
  with.memo = &memo;
  for (const char* spec : {"Z/8", "D/4", "Z/3xZ/3"}) {
    auto g = build_group(spec);
    for (oracle::Mask m = 0; m < (oracle::Mask(1) << g->order()); m += 3) {
      auto a = oracle::subset_of(g, m);
      if (stability_index(a).index > 4) continue;
      for (auto eps : {Rational(1, 2), Rational(1, 8)}) {
        EXPECT_EQ(to_json(decompose(a, eps)).dump(), to_json(decompose(a, eps, with)).dump()) << spec << " " << m;
        EXPECT_EQ(to_json(decompose_normal(a, eps)).dump(), to_json(decompose_normal(a, eps, with)).dump())
            << spec << " " << m;
      }
    }
  }
  EXPECT_GT(memo.size(), 0u);
}

TEST(Decompose, IsomorphismInvariant) {
  std::mt19937_64 rng(7);
  for (const char* spec : {"D/5", "Z/2xZ/6", "Q/8", "S/3xZ/2"}) {
    auto g = build_group(spec);
    const std::size_t n = g->order();
    for (int t = 0; t < 12; ++t) {
      std::vector<Element> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin() + 1, perm.end(), rng);
      auto h = relabel(*g, perm);
      oracle::Mask m = rng() & ((oracle::Mask(1) << n) - 1);
      auto a = oracle::subset_of(g, m);
      GroupSubset b(h);
      for (Element x : a.elements()) b.insert(perm[x]);
      for (auto eps : {Rational(1, 2), Rational(1, 8)}) {
        auto ra = decompose(a, eps);
        auto rb = decompose(b, eps);
        EXPECT_EQ(ra.k_used, rb.k_used);
        EXPECT_EQ(ra.eta.eta, rb.eta.eta);
        EXPECT_EQ(ra.m, rb.m);
        EXPECT_EQ(ra.error_count, rb.error_count);
        GroupSubset mh(h), md(h);
        for (Element x : ra.H.elements()) mh.insert(perm[x]);
        for (Element x : ra.D.elements()) md.insert(perm[x]);
        EXPECT_EQ(mh, rb.H);
        EXPECT_EQ(md, rb.D);
      }
    }
  }
}

TEST(VerifyReport, DetectsTampering) {
  auto z12 = build_group("Z/12");
  auto a = make(z12, {0, 4, 8});
  const Rational eps(1, 4);
  auto r = decompose(a, eps);
  ASSERT_TRUE(verify_report(a, eps, r).ok());

  auto flipped = r;
  for (Element x : {1, 5, 9}) flipped.D.insert(Element(x));
  auto v = verify_report(a, eps, flipped);
  EXPECT_FALSE(v.ok());
  auto failed = [&](const VerifyLedger& l, const std::string& name) {
    for (const auto& c : l.checks)
      if (c.name == name) return !c.ok;
    return false;
  };
  EXPECT_TRUE(failed(v, "error count"));
  EXPECT_TRUE(failed(v, "|A xor D| < eps|H|"));

  auto grown = r;
  grown.H.insert(1);
  auto w = verify_report(a, eps, grown);
  EXPECT_FALSE(w.ok());
  EXPECT_TRUE(failed(w, "H is a subgroup"));

  auto miscount = r;
  miscount.m = 3;
  EXPECT_TRUE(failed(verify_report(a, eps, miscount), "index"));
}

TEST(DecomposeNormal, RotationsOfD6) {
  auto d6 = build_group("D/6");
  ASSERT_EQ(d6->order(), 12u);
  std::optional<GroupSubset> rot;
  for (const auto& s : all_subgroups(d6)) {
    if (s.order() != 6) continue;
    for (Element x : s.carrier().elements())
      if (element_order(*d6, x) == 6) rot = s.carrier();
  }
  ASSERT_TRUE(rot);
  const Rational eps(1, 4);
  auto prof = stab_profile(*rot);
  auto vals = prof.distinct_values();
  ASSERT_EQ(vals.size(), 2u);
  EXPECT_EQ(vals[0], Rational(0));
  EXPECT_EQ(vals[1], Rational(1));
  auto r = decompose_normal(*rot, eps);
  EXPECT_EQ(r.H, *rot);
  EXPECT_EQ(*r.H0, *rot);
  EXPECT_EQ(r.D, *rot);
  EXPECT_EQ(r.error_count, 0u);
  EXPECT_EQ(r.m, 2u);
  EXPECT_EQ(r.m0, 2u);
  EXPECT_TRUE(r.bounds.factorial_bound_held);
  ASSERT_TRUE(r.bounds.dagger);
  auto v = verify_report(*rot, eps, r);
  EXPECT_TRUE(v.ok()) << v.failures();
}

TEST(DecomposeNormal, AbelianCoreIsH0) {
  for (const char* spec : {"Z/8", "Z/2xZ/4", "Z/9"}) {
    auto g = build_group(spec);
    for (oracle::Mask m = 1; m < (oracle::Mask(1) << g->order()); m += 7) {
      auto a = oracle::subset_of(g, m);
      auto r = decompose_normal(a, Rational(1, 4));
      ASSERT_TRUE(r.H0);
      EXPECT_EQ(r.H, *r.H0);
      EXPECT_EQ(r.m, r.m0);
    }
  }
}

TEST(DecomposeNormal, EmptySet) {
  auto g = build_group("S/3");
  auto r = decompose_normal(GroupSubset(g), Rational(1, 2));
  EXPECT_EQ(r.H, GroupSubset::full(g));
  EXPECT_EQ(r.error_count, 0u);
}

TEST(DecomposeNormal, NonabelianFamilyVerifies) {
  StabilityMemo memo;
  for (const char* spec : {"S/3", "D/4", "Q/8", "D/5"}) {
    auto g = build_group(spec);
    for (oracle::Mask m = 0; m < (oracle::Mask(1) << g->order()); m += (g->order() > 8 ? 5 : 1)) {
      auto a = oracle::subset_of(g, m);
      if (memo.stability(a).index > 4) continue;
      for (auto eps : {Rational(1, 2), Rational(1, 8)}) {
        auto r = decompose_normal(a, eps);
        auto v = verify_report(a, eps, r);
        ASSERT_TRUE(v.ok()) << spec << " " << m << "\n" << v.failures();
        EXPECT_TRUE(is_normal(Subgroup(r.H)));
      }
    }
  }
}

TEST(RegularityJson, Fields) {
  auto z12 = build_group("Z/12");
  auto a = make(z12, {0, 4, 8});
  auto r = decompose(a, Rational(1, 4));
  auto j = to_json(r);
  EXPECT_EQ(j["eta"], "1/4");
  EXPECT_EQ(j["epsilon"], "1/4");
  EXPECT_EQ(j["H"], nlohmann::json({0, 4, 8}));
  EXPECT_EQ(j["D"], nlohmann::json({0, 4, 8}));
  EXPECT_EQ(j["index"], 4);
  EXPECT_EQ(j["error_count"], 0);
  EXPECT_EQ(j["cosets"].size(), 4u);
  EXPECT_TRUE(j["bounds"].contains("index_bound"));
  EXPECT_TRUE(j["bounds"].contains("asymptotic_exponent"));
  auto n = to_json(decompose_normal(a, Rational(1, 4)));
  EXPECT_TRUE(n["bounds"].contains("dagger"));
  EXPECT_TRUE(n.contains("H0"));
  EXPECT_EQ(to_json(verify_report(a, Rational(1, 4), r)).size(), 14u);
}
