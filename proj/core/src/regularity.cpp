#include "stabreg/regularity.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace stabreg {

namespace {

EtaResult search_eta(const GroupSubset& a, const EtaSearchConfig& cfg) {
  try {
    return eta_for_stab(a, cfg);
  } catch (const EtaSearchFailure& f) {
    std::optional<LemmaWitness> w;
    std::string extra;
    try {
      w = lemma_witness(a, cfg);
      extra = "; phi_A has a verified half-graph of size " + std::to_string(cfg.k);
    } catch (const Error& e) {
      extra = std::string("; witness replay failed: ") + e.what();
    }
    throw DecomposeFailure(std::string(f.what()) + extra, std::move(w));
  }
}

// x < eta |H| / m, with x a count.
bool below_level(std::size_t x, std::size_t m, std::size_t h, const PowerRational& eta) {
  if (x == 0) return true;
  return eta.compare(make_rational(long(x * m), h)) > 0;
}

bool below_level(std::size_t x, std::size_t m, std::size_t h, const Rational& eps) {
  return Rational(static_cast<unsigned long>(x * m)) < eps * static_cast<unsigned long>(h);
}

void classify(const GroupSubset& a, const Subgroup& h, RegularityReport& r) {
  const auto cosets = left_cosets(h);
  const std::size_t m = cosets.count(), hs = h.order();
  r.m = m;
  r.H = h.carrier();
  r.D = GroupSubset(a.handle());
  r.cosets.clear();
  r.dichotomy_eta_held = r.dichotomy_eps_held = true;
  for (std::size_t i = 0; i < m; ++i) {
    GroupSubset c = cosets.coset(i);
    CosetClass cc;
    cc.rep = cosets.reps[i];
    cc.size = hs;
    cc.in_a = intersect(c, a).size();
    cc.dense = cc.in_a > 0 && !below_level(cc.in_a, m, hs, r.eta.eta);
    if (cc.dense) r.D = unite(r.D, c);
    const std::size_t out = hs - cc.in_a;
    r.dichotomy_eta_held &= below_level(cc.in_a, m, hs, r.eta.eta) || below_level(out, m, hs, r.eta.eta);
    r.dichotomy_eps_held &= below_level(cc.in_a, m, hs, r.eps) || below_level(out, m, hs, r.eps);
    r.cosets.push_back(cc);
  }
  r.error_count = symdiff_count(a, r.D);
}

void fill_common_bounds(RegularityReport& r, std::size_t index_for_bound) {
  auto& b = r.bounds;
  const std::size_t k = r.k_used;
  b.index_bound = (PowerRational(30) / r.eta.eta).pow(long(k) - 1);
  b.index_bound_held = b.index_bound.compare(Rational(static_cast<unsigned long>(index_for_bound))) >= 0;
  b.error_bound = r.eta.eta * PowerRational(long(r.H.size()));
  b.delta = r.eta.chain.delta;
  b.asymptotic_exponent = "k^(2^(2^(2k))) with k = " + std::to_string(k);
  if (k >= 2) b.asymptotic_exponent_log2log2 = std::ldexp(1.0, int(2 * k)) + std::log2(std::log2(double(k)));
  if (k >= 2) {
    BigInt p;
    mpz_ui_pow_ui(p.get_mpz_t(), 30, 4 * k - 4);
    b.eps_guard = Rational(1) / Rational(BigInt(8 * (k - 1)) * p);
    b.eps_exceeds_guard = r.eps >= b.eps_guard;
  }
}

void check_conclusions(const RegularityReport& r) {
  const std::string where = r.variant + " on " + r.a.group().name() + " " + format_elements(r.a) + ": ";
  if (!(Rational(static_cast<unsigned long>(r.error_count)) < r.eps * static_cast<unsigned long>(r.H.size())))
    throw TheoremViolation(where + "|A xor D| = " + std::to_string(r.error_count) + " is not below eps|H|" +
                           (r.bounds.eps_exceeds_guard ? " (eps exceeds the small-eps guard)" : ""));
  if (!r.bounds.index_bound_held)
    throw TheoremViolation(where + "index exceeds (30/eta)^(k-1)");
  if (!r.bounds.factorial_bound_held) throw TheoremViolation(where + "normal core index exceeds m0!");
  if (!r.dichotomy_eps_held && !r.bounds.eps_exceeds_guard)
    throw TheoremViolation(where + "a coset is neither almost inside nor almost outside A at level eps|H|/m");
}

DaggerCheck dagger(const PowerRational& eta, std::size_t k) {
  const double inf = std::numeric_limits<double>::infinity();
  const double lg = eta.log2_approx();  // negative
  const double a = -double(k) * lg;     // log2 eta^-k
  const double log_m = double(k - 1) * (std::log2(30.0) - lg);
  const double b = log_m > 0 ? 2 + log_m + std::log2(log_m) : -inf;  // log2(4 M log M)
  DaggerCheck d;
  // L = 2^a - 2^b against R = 8 (k-1) eta^-3; both compared in log2.
  d.rhs_log2 = k >= 2 ? std::log2(3 + std::log2(double(k - 1)) - 3 * lg) : -inf;
  if (b == -inf) {
    d.lhs_log2 = a;
  } else if (a > b) {
    d.lhs_log2 = a + std::log2(-std::expm1((b - a) * std::log(2.0)));
  } else {
    d.lhs_log2 = -inf;
  }
  d.holds = d.rhs_log2 == -inf ? d.lhs_log2 > -inf || k < 2 : d.lhs_log2 > d.rhs_log2;
  return d;
}

void fill_header(RegularityReport& r, const GroupSubset& a, const Rational& eps, const EtaSelection& s) {
  r.a = a;
  r.eps = eps;
  r.k_used = s.k;
  r.k_exact = s.k_exact;
  r.k_supplied = s.k_supplied;
  r.k_unverified = s.k_unverified;
  r.k_star_used = s.k_star.value;
  r.k_star_source = s.k_star.source;
  r.sigma = s.sigma.describe();
  r.eta = s.eta;
}

}  // namespace

EtaSelection select_eta(const GroupSubset& a, const Rational& eps, const DecomposeOptions& opts, bool normal) {
  if (sgn(eps) <= 0 || eps > Rational(1, 2)) throw PreconditionError("decompose: need 0 < eps <= 1/2");
  EtaSelection s;
  if (opts.supplied_k) {
    s.k = *opts.supplied_k;
    s.k_supplied = true;
    s.k_exact = false;
    if (s.k < 1) throw PreconditionError("decompose: supplied k must be at least 1");
    if (opts.override_k_check) {
      s.k_unverified = true;
    } else if (has_half_graph(a, s.k)) {
      throw PreconditionError("decompose: A has a half-graph of size " + std::to_string(s.k) + ", so it is not " +
                              std::to_string(s.k) + "-stable");
    }
  } else {
    auto st = opts.memo ? opts.memo->stability(a) : stability_index(a, opts.stability);
    s.k = st.index;
    s.k_exact = st.exact;
  }
  s.k_star = opts.memo ? choose_k_star(opts.memo->phi(a), s.k) : choose_k_star(a, s.k, opts.stability);
  const std::size_t grid = opts.grid ? opts.grid : a.group().order();
  s.sigma = normal ? SigmaMap::snapped_exp(s.k, grid) : SigmaMap::power(4 * s.k);
  s.eta = search_eta(a, EtaSearchConfig{s.sigma, s.k_star.value, 1, eps});
  return s;
}

RegularityReport decompose(const GroupSubset& a, const Rational& eps, const DecomposeOptions& opts) {
  auto sel = select_eta(a, eps, opts, false);
  RegularityReport r(a.handle());
  r.variant = "decompose";
  fill_header(r, a, eps, sel);

  GroupSubset h = stab_set(a, r.eta.eta);
  if (!is_subgroup(h)) {
    // 2 sigma(eta) <= eta makes Stab_eta closed under products.
    throw TheoremViolation("decompose: Stab_eta(A) is not a subgroup although Stab_eta = Stab_sigma(eta)");
  }
  classify(a, Subgroup(h), r);
  fill_common_bounds(r, r.m);
  check_conclusions(r);
  return r;
}

RegularityReport decompose_normal(const GroupSubset& a, const Rational& eps, const DecomposeOptions& opts) {
  auto sel = select_eta(a, eps, opts, true);
  RegularityReport r(a.handle());
  r.variant = "decompose-normal";
  fill_header(r, a, eps, sel);

  GroupSubset h0 = stab_set(a, r.eta.eta);
  if (!is_subgroup(h0))
    throw TheoremViolation("decompose-normal: Stab_eta(A) is not a subgroup although Stab_eta = Stab_sigma(eta)");
  Subgroup core = normal_core(Subgroup(h0));
  r.H0 = h0;
  r.m0 = a.group().order() / h0.size();
  classify(a, core, r);
  fill_common_bounds(r, r.m0);
  BigInt f;
  mpz_fac_ui(f.get_mpz_t(), r.m0);
  r.bounds.m0_factorial = f;
  r.bounds.factorial_bound_held = BigInt(static_cast<unsigned long>(r.m)) <= f;
  r.bounds.dagger = dagger(r.eta.eta, r.k_used);
  check_conclusions(r);
  return r;
}

// ---- independent verification -------------------------------------------

bool VerifyLedger::ok() const {
  for (const auto& c : checks)
    if (!c.ok) return false;
  return true;
}

std::string VerifyLedger::failures() const {
  std::string out;
  for (const auto& c : checks)
    if (!c.ok) out += c.name + ": " + c.detail + "\n";
  return out;
}

namespace {

using Flags = std::vector<char>;

Flags flags_of(const GroupSubset& s) {
  Flags f(s.group().order(), 0);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = s.bits().test(i);
  return f;
}

std::size_t count(const Flags& f) {
  std::size_t c = 0;
  for (char x : f) c += x != 0;
  return c;
}

}  // namespace

VerifyLedger verify_report(const GroupSubset& a, const Rational& eps, const RegularityReport& r) {
  VerifyLedger led;
  auto add = [&](std::string name, bool ok, std::string detail = {}) {
    led.checks.push_back({std::move(name), ok, std::move(detail)});
  };
  const FiniteGroup& G = a.group();
  const std::size_t n = G.order();
  const Flags A = flags_of(a), H = flags_of(r.H), D = flags_of(r.D);
  const std::size_t hs = count(H);
  const PowerRational& eta = r.eta.eta;

  add("same group", r.H.handle() == a.handle() && r.D.handle() == a.handle());
  add("same set", flags_of(r.a) == A);

  // Subgroup axioms.
  bool closed = hs > 0 && H[0];
  for (Element x = 0; x < n && closed; ++x) {
    if (!H[x]) continue;
    if (!H[G.inv(x)]) closed = false;
    for (Element y = 0; y < n && closed; ++y)
      if (H[y] && !H[G.mul(x, y)]) closed = false;
  }
  add("H is a subgroup", closed, closed ? "" : "closure or identity fails");
  if (!closed) return led;

  const std::size_t m = n / hs;
  add("index", r.m == m && hs * m == n, "reported " + std::to_string(r.m) + ", actual " + std::to_string(m));

  // Stab_eta(A) by direct counting: y in Ax iff y x^-1 in A.
  Flags stab(n, 0);
  for (Element x = 0; x < n; ++x) {
    std::size_t c = 0;
    const Element xi = G.inv(x);
    for (Element y = 0; y < n; ++y) c += A[y] != A[G.mul(y, xi)];
    stab[x] = c == 0 || eta.compare(make_rational(long(c), n)) >= 0;
  }
  const bool normal_variant = r.H0.has_value();
  if (!normal_variant) {
    add("H = Stab_eta(A)", stab == H);
  } else {
    const Flags H0 = flags_of(*r.H0);
    add("H0 = Stab_eta(A)", stab == H0);
    Flags core(n, 0);
    for (Element x = 0; x < n; ++x) {
      bool in = true;
      for (Element g = 0; g < n && in; ++g) in = H0[G.mul(G.mul(G.inv(g), x), g)];
      core[x] = in;
    }
    add("H is the normal core of H0", core == H);
    bool normal = true;
    for (Element g = 0; g < n && normal; ++g)
      for (Element x = 0; x < n && normal; ++x)
        if (H[x] && !H[G.mul(G.mul(g, x), G.inv(g))]) normal = false;
    add("H is normal", normal);
    const std::size_t m0 = n / count(H0);
    BigInt f;
    mpz_fac_ui(f.get_mpz_t(), m0);
    add("m <= m0!", BigInt(static_cast<unsigned long>(m)) <= f && r.m0 == m0);
  }

  const std::size_t bound_index = normal_variant ? r.m0 : m;
  const PowerRational ib = (PowerRational(30) / eta).pow(long(r.k_used) - 1);
  add("index bound (30/eta)^(k-1)", ib.compare(Rational(static_cast<unsigned long>(bound_index))) >= 0,
      std::to_string(bound_index) + " vs " + ib.to_string());
  add("eta in [delta, eps]", eta.compare(eps) <= 0 && eta.compare(r.eta.chain.delta) >= 0);

  // Left cosets gH, least element first.
  std::vector<long> coset_of(n, -1);
  std::vector<Element> reps;
  for (Element g = 0; g < n; ++g) {
    if (coset_of[g] >= 0) continue;
    for (Element h = 0; h < n; ++h)
      if (H[h]) coset_of[G.mul(g, h)] = long(reps.size());
    reps.push_back(g);
  }
  std::vector<std::size_t> in_a(reps.size(), 0), in_d(reps.size(), 0);
  for (Element x = 0; x < n; ++x) {
    in_a[coset_of[x]] += A[x] != 0;
    in_d[coset_of[x]] += D[x] != 0;
  }
  bool union_of_cosets = true;
  for (std::size_t i = 0; i < reps.size(); ++i) union_of_cosets &= in_d[i] == 0 || in_d[i] == hs;
  add("D is a union of left cosets", union_of_cosets);

  bool records = r.cosets.size() == reps.size();
  for (std::size_t i = 0; records && i < reps.size(); ++i)
    records = r.cosets[i].rep == reps[i] && r.cosets[i].in_a == in_a[i] && r.cosets[i].size == hs;
  add("coset records", records);

  auto lt_eta = [&](std::size_t x) { return x == 0 || eta.compare(make_rational(long(x * m), hs)) > 0; };
  auto lt_eps = [&](std::size_t x) {
    return Rational(static_cast<unsigned long>(x * m)) < eps * static_cast<unsigned long>(hs);
  };
  bool dense_rule = true, dich_eta = true, dich_eps = true;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    const bool dense = !lt_eta(in_a[i]);
    dense_rule &= dense == (in_d[i] == hs);
    dich_eta &= lt_eta(in_a[i]) || lt_eta(hs - in_a[i]);
    dich_eps &= lt_eps(in_a[i]) || lt_eps(hs - in_a[i]);
  }
  add("D = union of cosets with |C meet A| >= eta|H|/m", dense_rule);
  add("dichotomy at eta|H|/m", dich_eta);
  add("dichotomy at eps|H|/m", dich_eps);

  std::size_t err = 0;
  for (Element x = 0; x < n; ++x) err += A[x] != D[x];
  add("error count", err == r.error_count, "reported " + std::to_string(r.error_count) + ", actual " +
                                               std::to_string(err));
  add("|A xor D| < eps|H|", Rational(static_cast<unsigned long>(err)) < eps * static_cast<unsigned long>(hs));
  return led;
}

// ---- JSON ------------------------------------------------------------------

namespace {

nlohmann::json elements_json(const GroupSubset& s) { return s.elements(); }

}  // namespace

nlohmann::json to_json(const RegularityReport& r) {
  nlohmann::json j;
  j["variant"] = r.variant;
  j["group"] = r.a.group().name();
  j["order"] = r.a.group().order();
  j["A"] = elements_json(r.a);
  j["epsilon"] = to_string(r.eps);
  j["k_used"] = r.k_used;
  j["k_exact"] = r.k_exact;
  j["k_supplied"] = r.k_supplied;
  j["k_unverified"] = r.k_unverified;
  j["k_star_used"] = r.k_star_used;
  j["k_star_source"] = r.k_star_source;
  j["sigma"] = r.sigma;
  j["eta_search"] = to_json(r.eta);
  j["eta"] = r.eta.eta.to_string();
  j["H"] = elements_json(r.H);
  j["index"] = r.m;
  if (r.H0) {
    j["H0"] = elements_json(*r.H0);
    j["index_H0"] = r.m0;
  }
  auto cs = nlohmann::json::array();
  for (const auto& c : r.cosets)
    cs.push_back({{"rep", c.rep}, {"in_A", c.in_a}, {"size", c.size}, {"dense", c.dense}});
  j["cosets"] = cs;
  j["D"] = elements_json(r.D);
  j["error_count"] = r.error_count;
  j["dichotomy_eta_held"] = r.dichotomy_eta_held;
  j["dichotomy_eps_held"] = r.dichotomy_eps_held;
  const auto& b = r.bounds;
  nlohmann::json bj;
  bj["index_bound"] = b.index_bound.to_string();
  bj["index_bound_held"] = b.index_bound_held;
  bj["error_bound"] = b.error_bound.to_string();
  bj["delta"] = b.delta.to_string();
  bj["asymptotic_exponent"] = b.asymptotic_exponent;
  if (b.asymptotic_exponent_log2log2) bj["asymptotic_exponent_log2log2"] = *b.asymptotic_exponent_log2log2;
  bj["eps_guard"] = to_string(b.eps_guard);
  bj["eps_exceeds_guard"] = b.eps_exceeds_guard;
  if (b.m0_factorial) {
    bj["m0_factorial"] = b.m0_factorial->get_str();
    bj["factorial_bound_held"] = b.factorial_bound_held;
  }
  if (b.dagger) {
    auto num = [](double v) -> nlohmann::json {
      if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
      return v;
    };
    bj["dagger"] = {{"holds", b.dagger->holds}, {"lhs_log2", num(b.dagger->lhs_log2)},
                    {"rhs_log2", num(b.dagger->rhs_log2)}};
  }
  j["bounds"] = bj;
  return j;
}

nlohmann::json to_json(const VerifyLedger& v) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& c : v.checks) {
    nlohmann::json e{{"check", c.name}, {"ok", c.ok}};
    if (!c.detail.empty()) e["detail"] = c.detail;
    j.push_back(e);
  }
  return j;
}

}  // namespace stabreg
