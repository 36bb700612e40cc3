#include "stabreg/tripling.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "stabreg/random.hpp"

namespace stabreg {

// ---- represented groups ----------------------------------------------------

namespace {

std::int64_t mod(std::int64_t a, std::int64_t n) {
  a %= n;
  return a < 0 ? a + n : a;
}

class IntegerLattice final : public RepGroup {
 public:
  IntegerLattice(std::size_t d, GroupHandle f) : d_(d), f_(std::move(f)) {}

  std::string name() const override {
    std::string s = d_ == 1 ? "Z" : "Z^" + std::to_string(d_);
    if (f_) s += "x" + f_->name();
    return s;
  }
  std::size_t arity() const override { return d_ + (f_ ? 1 : 0); }
  RepElement mul(const RepElement& a, const RepElement& b) const override {
    RepElement r;
    for (std::size_t i = 0; i < d_; ++i) r.v[i] = a.v[i] + b.v[i];
    if (f_) r.v[d_] = f_->mul(Element(a.v[d_]), Element(b.v[d_]));
    return r;
  }
  RepElement inv(const RepElement& a) const override {
    RepElement r;
    for (std::size_t i = 0; i < d_; ++i) r.v[i] = -a.v[i];
    if (f_) r.v[d_] = f_->inv(Element(a.v[d_]));
    return r;
  }
  void validate(const RepElement& a) const override {
    for (std::size_t i = arity(); i < 4; ++i)
      if (a.v[i] != 0) throw ParseError(name() + ": too many coordinates");
    if (f_ && (a.v[d_] < 0 || std::size_t(a.v[d_]) >= f_->order()))
      throw ParseError(name() + ": finite coordinate out of range");
  }

 private:
  std::size_t d_;
  GroupHandle f_;
};

class Heisenberg final : public RepGroup {
 public:
  explicit Heisenberg(std::int64_t n) : n_(n) {}  // n = 0: over the integers

  std::string name() const override { return n_ ? "H3/" + std::to_string(n_) : "H3"; }
  std::size_t arity() const override { return 3; }
  RepElement mul(const RepElement& a, const RepElement& b) const override {
    RepElement r;
    r.v[0] = a.v[0] + b.v[0];
    r.v[1] = a.v[1] + b.v[1];
    r.v[2] = a.v[2] + b.v[2] + a.v[0] * b.v[1];
    return reduce(r);
  }
  RepElement inv(const RepElement& a) const override {
    RepElement r;
    r.v[0] = -a.v[0];
    r.v[1] = -a.v[1];
    r.v[2] = -a.v[2] + a.v[0] * a.v[1];
    return reduce(r);
  }
  void validate(const RepElement& a) const override {
    if (a.v[3] != 0) throw ParseError(name() + ": elements are triples");
    if (n_)
      for (int i = 0; i < 3; ++i)
        if (a.v[i] < 0 || a.v[i] >= n_) throw ParseError(name() + ": coordinate out of range");
  }

 private:
  RepElement reduce(RepElement r) const {
    if (n_)
      for (int i = 0; i < 3; ++i) r.v[i] = mod(r.v[i], n_);
    return r;
  }
  std::int64_t n_;
};

class FiniteBridge final : public RepGroup {
 public:
  explicit FiniteBridge(GroupHandle g) : g_(std::move(g)) {}
  std::string name() const override { return "finite:" + g_->name(); }
  std::size_t arity() const override { return 1; }
  RepElement mul(const RepElement& a, const RepElement& b) const override {
    RepElement r;
    r.v[0] = g_->mul(Element(a.v[0]), Element(b.v[0]));
    return r;
  }
  RepElement inv(const RepElement& a) const override {
    RepElement r;
    r.v[0] = g_->inv(Element(a.v[0]));
    return r;
  }
  void validate(const RepElement& a) const override {
    if (a.v[0] < 0 || std::size_t(a.v[0]) >= g_->order() || a.v[1] || a.v[2] || a.v[3])
      throw ParseError(name() + ": element out of range");
  }
  GroupHandle finite() const override { return g_; }

 private:
  GroupHandle g_;
};

std::int64_t parse_int(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    throw ParseError("expected an integer, got '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split_top(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '(' || s[i] == '[') ++depth;
    if (s[i] == ')' || s[i] == ']') --depth;
    if (s[i] == sep && depth == 0) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  out.push_back(s.substr(start));
  return out;
}

}  // namespace

RepGroupHandle make_rep_group(std::string_view spec) {
  std::string s;
  for (char ch : spec)
    if (ch != ' ') s += ch;
  if (s.rfind("finite:", 0) == 0) return std::make_shared<FiniteBridge>(build_group(s.substr(7)));
  if (s == "H3") return std::make_shared<Heisenberg>(0);
  if (s.rfind("H3/", 0) == 0) {
    const auto n = parse_int(s.substr(3));
    if (n < 2) throw ParseError("H3/n needs n >= 2");
    return std::make_shared<Heisenberg>(n);
  }
  if (!s.empty() && s[0] == 'Z' && (s.size() == 1 || s[1] == '^' || s[1] == 'x')) {
    std::size_t d = 1, pos = 1;
    if (pos < s.size() && s[pos] == '^') {
      std::size_t end = s.find('x', pos);
      d = std::size_t(parse_int(s.substr(pos + 1, end == std::string::npos ? std::string::npos : end - pos - 1)));
      pos = end == std::string::npos ? s.size() : end;
    }
    GroupHandle f;
    if (pos < s.size()) f = build_group(s.substr(pos + 1));
    if (d < 1 || d + (f ? 1 : 0) > 4) throw ParseError("Z^d supports d + (finite factor) <= 4");
    return std::make_shared<IntegerLattice>(d, f);
  }
  throw ParseError("unknown represented group '" + std::string(spec) + "'");
}

std::string format_element(const RepGroup& g, const RepElement& x) {
  if (g.arity() == 1) return std::to_string(x.v[0]);
  std::string s = "(";
  for (std::size_t i = 0; i < g.arity(); ++i) s += (i ? "," : "") + std::to_string(x.v[i]);
  return s + ")";
}

RepElement parse_element(const RepGroup& g, std::string_view text) {
  std::string s;
  for (char ch : text)
    if (ch != ' ') s += ch;
  if (!s.empty() && (s.front() == '(' || s.front() == '[')) {
    if (s.size() < 2 || (s.back() != ')' && s.back() != ']')) throw ParseError("unbalanced element '" + s + "'");
    s = s.substr(1, s.size() - 2);
  }
  auto parts = split_top(s, ',');
  if (parts.size() != g.arity())
    throw ParseError(g.name() + " elements have " + std::to_string(g.arity()) + " coordinates: '" +
                     std::string(text) + "'");
  RepElement x;
  for (std::size_t i = 0; i < parts.size(); ++i) x.v[i] = parse_int(parts[i]);
  g.validate(x);
  return x;
}

// ---- element sets ----------------------------------------------------------

ElementSet::ElementSet(std::vector<RepElement> elements) : el_(std::move(elements)) {
  std::sort(el_.begin(), el_.end());
  el_.erase(std::unique(el_.begin(), el_.end()), el_.end());
}

bool ElementSet::contains(const RepElement& x) const { return std::binary_search(el_.begin(), el_.end(), x); }

std::size_t ElementSet::index_of(const RepElement& x) const {
  auto it = std::lower_bound(el_.begin(), el_.end(), x);
  return it != el_.end() && *it == x ? std::size_t(it - el_.begin()) : el_.size();
}

ElementSet product_set(const RepGroup& g, const ElementSet& a, const ElementSet& b, const TriplingCaps& caps) {
  if (std::uint64_t(a.size()) * b.size() > caps.product_evaluations)
    throw CapExceeded("product_set: " + std::to_string(a.size()) + " x " + std::to_string(b.size()) +
                      " exceeds the product cap");
  std::vector<RepElement> out;
  out.reserve(a.size() * b.size());
  for (const auto& x : a.elements())
    for (const auto& y : b.elements()) out.push_back(g.mul(x, y));
  return ElementSet(std::move(out));
}

ElementSet inverse_set(const RepGroup& g, const ElementSet& a) {
  std::vector<RepElement> out;
  for (const auto& x : a.elements()) out.push_back(g.inv(x));
  return ElementSet(std::move(out));
}

ElementSet right_translate(const RepGroup& g, const ElementSet& a, const RepElement& x) {
  std::vector<RepElement> out;
  for (const auto& y : a.elements()) out.push_back(g.mul(y, x));
  return ElementSet(std::move(out));
}

ElementSet set_symdiff(const ElementSet& a, const ElementSet& b) {
  std::vector<RepElement> out;
  std::set_symmetric_difference(a.elements().begin(), a.elements().end(), b.elements().begin(), b.elements().end(),
                                std::back_inserter(out));
  return ElementSet(std::move(out));
}

std::size_t symdiff_size(const ElementSet& a, const ElementSet& b) {
  std::size_t common = 0;
  auto i = a.elements().begin(), j = b.elements().begin();
  while (i != a.elements().end() && j != b.elements().end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++common, ++i, ++j;
    }
  }
  return a.size() + b.size() - 2 * common;
}

namespace {

ElementSet tripled(const RepGroup& g, const ElementSet& a, const TriplingCaps& caps) {
  return product_set(g, product_set(g, a, inverse_set(g, a), caps), a, caps);
}

std::atomic<std::size_t> g_ruzsa_checked{0}, g_ruzsa_failed{0};

}  // namespace

Rational alternation_ratio(const RepGroup& g, const ElementSet& a, const TriplingCaps& caps) {
  if (a.empty()) throw PreconditionError("alternation_ratio: A is empty");
  return make_rational(long(tripled(g, a, caps).size()), a.size());
}

RuzsaCheck ruzsa_check(const RepGroup& g, const ElementSet& a, const TriplingCaps& caps) {
  if (a.empty()) throw PreconditionError("ruzsa_check: A is empty");
  RuzsaCheck r;
  const ElementSet x = tripled(g, a, caps);
  r.c = make_rational(long(x.size()), a.size());
  const ElementSet p = product_set(g, inverse_set(g, a), a, caps);
  r.lhs = product_set(g, product_set(g, p, p, caps), p, caps).size();
  r.rhs = r.c * r.c * r.c * r.c * static_cast<unsigned long>(x.size());
  r.holds = Rational(static_cast<unsigned long>(r.lhs)) <= r.rhs;
  ++g_ruzsa_checked;
  if (!r.holds) ++g_ruzsa_failed;
  return r;
}

RuzsaTally ruzsa_tally() { return {g_ruzsa_checked.load(), g_ruzsa_failed.load()}; }

RelativeProfile relative_values(const RepGroup& g, const ElementSet& a, const TriplingCaps& caps) {
  if (a.empty()) throw PreconditionError("relative_values: A is empty");
  const ElementSet x = tripled(g, a, caps);
  const ElementSet ainv = inverse_set(g, a);
  std::vector<RepElement> dom = product_set(g, ainv, a, caps).elements();
  const auto more = product_set(g, ainv, x, caps).elements();
  dom.insert(dom.end(), more.begin(), more.end());
  const ElementSet domain(std::move(dom));

  RelativeProfile out;
  out.x_size = x.size();
  out.profile.domain_label = "A^-1A u A^-1X";
  out.profile.normalizer = x.size();
  std::map<std::size_t, ProfileValue> by_count;
  for (const auto& gg : domain.elements()) {
    const ElementSet ag = right_translate(g, a, gg);
    // A lies inside X, so Ag xor A is inside X exactly when Ag is.
    if (!std::includes(x.elements().begin(), x.elements().end(), ag.elements().begin(), ag.elements().end()))
      continue;
    const std::size_t c = symdiff_size(ag, a);
    auto [it, fresh] = by_count.try_emplace(c);
    if (fresh) {
      it->second.count = c;
      it->second.sample = Element(out.domain.size());
    }
    ++it->second.multiplicity;
    out.domain.push_back(gg);
    out.counts.push_back(c);
  }
  for (auto& [c, v] : by_count) out.profile.values.push_back(v);
  out.profile.count_of = out.counts;
  return out;
}

namespace {

BinaryRelation rep_relation(const RepGroup& g, const ElementSet& a, const TriplingCaps& caps) {
  const ElementSet cols = product_set(g, inverse_set(g, a), a, caps);
  BinaryRelation rel(a.size(), cols.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      if (a.contains(g.mul(a.elements()[i], cols.elements()[j]))) rel.set(i, j);
  return rel;
}

}  // namespace

StabilityResult rep_stability_index(const RepGroup& g, const ElementSet& a, const StabilityOptions& opts) {
  if (a.empty()) return StabilityResult{};
  auto r = stability_of_relation(rep_relation(g, a, {}), a.size() + 1, opts);
  r.counting_bound = a.size() + 1;
  return r;
}

bool rep_has_half_graph(const RepGroup& g, const ElementSet& a, std::size_t k, const StabilityOptions& opts) {
  if (k == 0) return true;
  if (a.empty()) return false;
  if (k > a.size()) return false;
  auto r = half_graph(rep_relation(g, a, {}), k, opts.search);
  if (r.status == SearchStatus::kIndeterminate)
    throw PreconditionError("cannot verify k within the search caps; use the override");
  return r.status == SearchStatus::kFound;
}

// ---- decomposition ---------------------------------------------------------

namespace {

bool le_eta_times(std::size_t count, std::size_t size, const PowerRational& eta) {
  return count == 0 || eta.compare(make_rational(long(count), size)) >= 0;
}

bool below_level(std::size_t x, std::size_t m, std::size_t h, const PowerRational& eta) {
  return x == 0 || eta.compare(make_rational(long(x * m), h)) > 0;
}

bool below_level(std::size_t x, std::size_t m, std::size_t h, const Rational& eps) {
  return Rational(static_cast<unsigned long>(x * m)) < eps * static_cast<unsigned long>(h);
}

}  // namespace

TriplingReport decompose_tripling(const RepGroupHandle& gh, const ElementSet& a, const Rational& eps,
                                  const TriplingOptions& opts) {
  const RepGroup& g = *gh;
  if (a.empty()) throw PreconditionError("decompose_tripling: A must be nonempty");
  if (sgn(eps) <= 0 || eps > Rational(1, 2)) throw PreconditionError("decompose_tripling: need 0 < eps <= 1/2");
  for (const auto& x : a.elements()) g.validate(x);

  TriplingReport r;
  r.group = gh;
  r.a = a;
  r.eps = eps;
  const ElementSet x = tripled(g, a, opts.caps);
  r.x_size = x.size();
  r.c = make_rational(long(x.size()), a.size());

  if (opts.supplied_k) {
    r.k_used = *opts.supplied_k;
    r.k_supplied = true;
    r.k_exact = false;
    if (r.k_used < 1) throw PreconditionError("decompose_tripling: supplied k must be at least 1");
    if (opts.override_k_check) {
      r.k_unverified = true;
    } else if (rep_has_half_graph(g, a, r.k_used, opts.stability)) {
      throw PreconditionError("decompose_tripling: A has a half-graph of size " + std::to_string(r.k_used));
    }
  } else {
    auto s = rep_stability_index(g, a, opts.stability);
    r.k_used = s.index;
    r.k_exact = s.exact;
  }
  const std::size_t k = std::max<std::size_t>(r.k_used, 2);

  // k*: exact phi_A through the finite group when there is one; otherwise
  // the smaller of the Ramsey bound and 2|A| + 1 (each column Ay xor Az has
  // at most 2|A| points, and column b_j contains a_1, ..., a_j).
  if (auto fin = g.finite()) {
    std::vector<Element> el;
    for (const auto& e : a.elements()) el.push_back(Element(e.v[0]));
    auto ks = choose_k_star(GroupSubset::from_elements(fin, el), k, opts.stability);
    r.k_star_used = ks.value;
    r.k_star_source = ks.source;
  } else {
    const std::size_t ram = k_star_bound(k).sharp.clamp(~std::size_t(0));
    const std::size_t cnt = 2 * a.size() + 1;
    r.k_star_used = std::max<std::size_t>(2, std::min(ram, cnt));
    r.k_star_source = ram < cnt ? "ramsey" : "counting";
  }

  EtaSearchConfig cfg{SigmaMap::scaled_power(4 * k, r.c), r.k_star_used, r.c * r.c * r.c * r.c, eps};
  r.sigma = cfg.sigma.describe();
  const RelativeProfile prof = relative_values(g, a, opts.caps);
  r.relative_domain = prof.domain.size();
  try {
    r.eta = find_eta(prof.profile.distinct_values(), cfg);
  } catch (const EtaSearchFailure& f) {
    throw TheoremViolation(std::string("decompose_tripling: ") + f.what() + " (k* = " +
                           std::to_string(r.k_star_used) + " is not a stability bound for phi_A)");
  }
  const PowerRational& eta = r.eta.eta;
  r.threshold_x = eta * PowerRational(long(x.size()));
  r.threshold_a = eta * PowerRational(long(a.size()));

  // H = Stab^A_eta(A), which lies in A^-1 A.
  const ElementSet ainva = product_set(g, inverse_set(g, a), a, opts.caps);
  std::vector<RepElement> hv;
  for (const auto& y : ainva.elements())
    if (le_eta_times(symdiff_size(right_translate(g, a, y), a), a.size(), eta)) hv.push_back(y);
  r.H = ElementSet(std::move(hv));
  auto& L = r.ledger;
  L.h_inside_AinvA = true;
  L.h_subgroup = r.H.contains(g.identity());
  for (const auto& p : r.H.elements()) {
    if (!L.h_subgroup) break;
    if (!r.H.contains(g.inv(p))) L.h_subgroup = false;
    for (const auto& q : r.H.elements())
      if (!r.H.contains(g.mul(p, q))) {
        L.h_subgroup = false;
        break;
      }
  }
  if (!L.h_subgroup) throw TheoremViolation("decompose_tripling: Stab^A_eta(A) is not a subgroup");

  // Coset representatives taken in A.
  const std::size_t hs = r.H.size();
  for (const auto& y : a.elements()) {
    bool covered = false;
    for (const auto& c : r.C)
      if (r.H.contains(g.mul(g.inv(c), y))) {
        covered = true;
        break;
      }
    if (!covered) r.C.push_back(y);
  }
  L.a_inside_CH = true;
  const std::size_t m = r.C.size();
  std::vector<RepElement> dh;
  r.dichotomy_eta_held = r.dichotomy_eps_held = true;
  for (const auto& c : r.C) {
    TriplingCoset tc;
    tc.rep = c;
    for (const auto& h : r.H.elements()) tc.in_a += a.contains(g.mul(c, h));
    tc.out_a = hs - tc.in_a;
    tc.dense = tc.in_a > 0 && !below_level(tc.in_a, m, hs, eta);
    if (tc.dense) {
      r.D.push_back(c);
      for (const auto& h : r.H.elements()) dh.push_back(g.mul(c, h));
    }
    r.dichotomy_eta_held &= below_level(tc.in_a, m, hs, eta) || below_level(tc.out_a, m, hs, eta);
    r.dichotomy_eps_held &= below_level(tc.in_a, m, hs, eps) || below_level(tc.out_a, m, hs, eps);
    r.cosets.push_back(tc);
  }
  r.error_count = symdiff_size(a, ElementSet(std::move(dh)));

  L.cover_bound = (PowerRational(30) * PowerRational(r.c) / eta).pow(long(r.k_used) - 1);
  L.cover_bound_held = L.cover_bound.compare(Rational(static_cast<unsigned long>(m))) >= 0;
  L.error_bound = eta * PowerRational(long(hs));
  L.ruzsa = ruzsa_check(g, a, opts.caps);
  if (r.k_used >= 2) {
    Rational base = 30 * r.c;
    Rational pw = 1;
    for (std::size_t i = 0; i < 4 * r.k_used - 4; ++i) pw *= base;
    L.eps_guard = 1 / (Rational(static_cast<unsigned long>(8 * (r.k_used - 1))) * pw);
    L.eps_exceeds_guard = eps >= L.eps_guard;
  }
  L.asymptotic_exponent = "k^(2^(2^(2k))) with k = " + std::to_string(r.k_used);

  // Spot-check associativity on the working set X.
  Rng rng(opts.seed);
  for (std::size_t t = 0; t < opts.associativity_samples; ++t) {
    const auto& p = x.elements()[rng.below(x.size())];
    const auto& q = x.elements()[rng.below(x.size())];
    const auto& s = x.elements()[rng.below(x.size())];
    if (!(g.mul(g.mul(p, q), s) == g.mul(p, g.mul(q, s)))) L.associativity_held = false;
  }
  L.associativity_samples = opts.associativity_samples;

  const std::string where = "decompose_tripling on " + g.name() + ": ";
  if (!L.associativity_held) throw PreconditionError(where + "sampled triples are not associative");
  if (!L.ruzsa.holds) throw TheoremViolation(where + "|(A^-1 A)^3| exceeds c^4 |A A^-1 A|");
  if (!(Rational(static_cast<unsigned long>(r.error_count)) < eps * static_cast<unsigned long>(hs)))
    throw TheoremViolation(where + "|A xor DH| = " + std::to_string(r.error_count) + " is not below eps|H|");
  if (!L.cover_bound_held) throw TheoremViolation(where + "|C| exceeds (30c/eta)^(k-1)");
  if (!r.dichotomy_eps_held && !L.eps_exceeds_guard)
    throw TheoremViolation(where + "a coset is neither almost inside nor almost outside A");
  return r;
}

// ---- verification ----------------------------------------------------------

bool all_ok(const std::vector<TriplingCheck>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const TriplingCheck& c) { return c.ok; });
}

std::vector<TriplingCheck> verify_tripling(const RepGroup& g, const ElementSet& a, const Rational& eps,
                                           const TriplingReport& r) {
  std::vector<TriplingCheck> out;
  auto add = [&](std::string name, bool ok, std::string detail = {}) {
    out.push_back({std::move(name), ok, std::move(detail)});
  };
  using Set = std::set<RepElement>;
  const Set A(a.elements().begin(), a.elements().end());
  const Set H(r.H.elements().begin(), r.H.elements().end());
  Set ainva, x;
  for (const auto& p : A)
    for (const auto& q : A) ainva.insert(g.mul(g.inv(p), q));
  for (const auto& p : A)
    for (const auto& q : A)
      for (const auto& s : A) x.insert(g.mul(g.mul(p, g.inv(q)), s));
  const Rational c = make_rational(long(x.size()), A.size());
  add("same set", Set(r.a.elements().begin(), r.a.elements().end()) == A);
  add("alternation ratio", c == r.c, to_string(c) + " vs " + to_string(r.c));

  bool sub = H.count(g.identity()) > 0;
  for (const auto& p : H)
    for (const auto& q : H)
      if (!H.count(g.mul(p, q)) || !H.count(g.inv(p))) sub = false;
  add("H is a subgroup", sub);
  if (!sub) return out;
  add("H inside A^-1 A", std::includes(ainva.begin(), ainva.end(), H.begin(), H.end()));

  const PowerRational& eta = r.eta.eta;
  Set stab;
  for (const auto& y : ainva) {
    std::size_t cnt = 0;
    Set ay;
    for (const auto& p : A) ay.insert(g.mul(p, y));
    for (const auto& p : ay) cnt += !A.count(p);
    for (const auto& p : A) cnt += !ay.count(p);
    if (cnt == 0 || eta.compare(make_rational(long(cnt), A.size())) >= 0) stab.insert(y);
  }
  add("H = Stab^A_eta(A)", stab == H);
  add("eta in [delta, eps]", eta.compare(eps) <= 0 && eta.compare(r.eta.chain.delta) >= 0);

  const std::size_t hs = H.size(), m = r.C.size();
  bool c_in_a = true, distinct = true, covered = true;
  for (std::size_t i = 0; i < m; ++i) {
    c_in_a &= A.count(r.C[i]) > 0;
    for (std::size_t j = 0; j < i; ++j) distinct &= !H.count(g.mul(g.inv(r.C[j]), r.C[i]));
  }
  Set ch;
  for (const auto& cc : r.C)
    for (const auto& h : H) ch.insert(g.mul(cc, h));
  for (const auto& p : A) covered &= ch.count(p) > 0;
  add("C inside A", c_in_a);
  add("C meets each coset once", distinct);
  add("A inside CH", covered);
  const PowerRational bound = (PowerRational(30) * PowerRational(c) / eta).pow(long(r.k_used) - 1);
  add("|C| <= (30c/eta)^(k-1)", bound.compare(Rational(static_cast<unsigned long>(m))) >= 0,
      std::to_string(m) + " vs " + bound.to_string());

  Set dset(r.D.begin(), r.D.end());
  bool d_in_c = true, dense_rule = true, dich = true;
  for (const auto& dd : dset) d_in_c &= std::find(r.C.begin(), r.C.end(), dd) != r.C.end();
  Set dh;
  for (const auto& cc : r.C) {
    std::size_t in = 0;
    for (const auto& h : H) in += A.count(g.mul(cc, h));
    const bool dense = in > 0 && eta.compare(make_rational(long(in * m), hs)) <= 0;
    dense_rule &= dense == (dset.count(cc) > 0);
    auto below = [&](std::size_t v) { return v == 0 || eta.compare(make_rational(long(v * m), hs)) > 0; };
    dich &= below(in) || below(hs - in);
    if (dset.count(cc))
      for (const auto& h : H) dh.insert(g.mul(cc, h));
  }
  add("D inside C", d_in_c);
  add("D = dense representatives", dense_rule);
  add("dichotomy at eta|H|/m", dich);
  std::size_t err = 0;
  for (const auto& p : A) err += !dh.count(p);
  for (const auto& p : dh) err += !A.count(p);
  add("error count", err == r.error_count, std::to_string(err) + " vs " + std::to_string(r.error_count));
  add("|A xor DH| < eps|H|", Rational(static_cast<unsigned long>(err)) < eps * static_cast<unsigned long>(hs));

  Set p3;
  {
    Set pp;
    for (const auto& p : ainva)
      for (const auto& q : ainva) pp.insert(g.mul(p, q));
    for (const auto& p : pp)
      for (const auto& q : ainva) p3.insert(g.mul(p, q));
  }
  add("|(A^-1 A)^3| <= c^4 |A A^-1 A|",
      Rational(static_cast<unsigned long>(p3.size())) <= c * c * c * c * static_cast<unsigned long>(x.size()),
      std::to_string(p3.size()));
  return out;
}

// ---- JSON and parsing ------------------------------------------------------

nlohmann::json element_json(const RepGroup& g, const RepElement& x) {
  if (g.arity() == 1) return x.v[0];
  auto j = nlohmann::json::array();
  for (std::size_t i = 0; i < g.arity(); ++i) j.push_back(x.v[i]);
  return j;
}

nlohmann::json to_json(const RepGroup& g, const ElementSet& s) {
  auto j = nlohmann::json::array();
  for (const auto& x : s.elements()) j.push_back(element_json(g, x));
  return j;
}

nlohmann::json to_json(const TriplingReport& r) {
  const RepGroup& g = *r.group;
  auto elems = [&](const std::vector<RepElement>& v) {
    auto j = nlohmann::json::array();
    for (const auto& x : v) j.push_back(element_json(g, x));
    return j;
  };
  nlohmann::json j;
  j["variant"] = "tripling";
  j["group"] = g.name();
  j["A"] = to_json(g, r.a);
  j["epsilon"] = to_string(r.eps);
  j["c"] = to_string(r.c);
  j["X_size"] = r.x_size;
  j["k_used"] = r.k_used;
  j["k_exact"] = r.k_exact;
  j["k_supplied"] = r.k_supplied;
  j["k_unverified"] = r.k_unverified;
  j["k_star_used"] = r.k_star_used;
  j["k_star_source"] = r.k_star_source;
  j["sigma"] = r.sigma;
  j["eta_search"] = to_json(r.eta);
  j["eta"] = r.eta.eta.to_string();
  j["threshold_X"] = r.threshold_x.to_string();
  j["threshold_A"] = r.threshold_a.to_string();
  j["relative_domain"] = r.relative_domain;
  j["H"] = to_json(g, r.H);
  j["C"] = elems(r.C);
  j["D"] = elems(r.D);
  auto cs = nlohmann::json::array();
  for (const auto& c : r.cosets)
    cs.push_back({{"rep", element_json(g, c.rep)}, {"in_A", c.in_a}, {"out_A", c.out_a}, {"dense", c.dense}});
  j["cosets"] = cs;
  j["error_count"] = r.error_count;
  j["dichotomy_eta_held"] = r.dichotomy_eta_held;
  j["dichotomy_eps_held"] = r.dichotomy_eps_held;
  const auto& L = r.ledger;
  j["ledger"] = {{"H_subgroup", L.h_subgroup},
                 {"H_inside_AinvA", L.h_inside_AinvA},
                 {"A_inside_CH", L.a_inside_CH},
                 {"cover_bound", L.cover_bound.to_string()},
                 {"cover_bound_held", L.cover_bound_held},
                 {"error_bound", L.error_bound.to_string()},
                 {"ruzsa", {{"lhs", L.ruzsa.lhs}, {"rhs", to_string(L.ruzsa.rhs)}, {"holds", L.ruzsa.holds}}},
                 {"eps_guard", to_string(L.eps_guard)},
                 {"eps_exceeds_guard", L.eps_exceeds_guard},
                 {"associativity_samples", L.associativity_samples},
                 {"associativity_held", L.associativity_held},
                 {"asymptotic_exponent", L.asymptotic_exponent}};
  return j;
}

nlohmann::json to_json(const std::vector<TriplingCheck>& checks) {
  auto j = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json e{{"check", c.name}, {"ok", c.ok}};
    if (!c.detail.empty()) e["detail"] = c.detail;
    j.push_back(e);
  }
  return j;
}

namespace {

ElementSet generated(const RepGroup& g, const std::vector<RepElement>& gens, const TriplingCaps& caps) {
  std::set<RepElement> seen{g.identity()};
  std::vector<RepElement> frontier{g.identity()};
  const std::size_t cap = 1'000'000;
  while (!frontier.empty()) {
    std::vector<RepElement> next;
    for (const auto& x : frontier)
      for (const auto& s : gens)
        for (const auto& y : {g.mul(x, s), g.mul(x, g.inv(s))})
          if (seen.insert(y).second) {
            next.push_back(y);
            if (seen.size() > cap || seen.size() * gens.size() > caps.product_evaluations)
              throw CapExceeded("subgroup: generated subgroup is too large or infinite");
          }
    frontier = std::move(next);
  }
  return ElementSet(std::vector<RepElement>(seen.begin(), seen.end()));
}

std::vector<RepElement> element_list(const RepGroup& g, std::string_view s) {
  std::vector<RepElement> out;
  for (auto part : split_top(s, ';'))
    if (!part.empty()) out.push_back(parse_element(g, part));
  return out;
}

}  // namespace

ElementSet parse_element_set(const RepGroup& g, std::string_view spec, const TriplingCaps& caps) {
  std::vector<RepElement> all;
  for (auto part : split_top(spec, '+')) {
    std::string p;
    for (char ch : part)
      if (ch != ' ') p += ch;
    if (p.empty()) continue;
    if (p.front() == '[') {
      auto j = nlohmann::json::parse(p, nullptr, false);
      if (j.is_discarded() || !j.is_array()) throw ParseError("element set: bad JSON array");
      for (const auto& e : j) all.push_back(parse_element(g, e.dump()));
    } else if (p.rfind("interval:", 0) == 0) {
      auto lohi = split_top(std::string_view(p).substr(9), ',');
      if (lohi.size() != 2) throw ParseError("interval:lo,hi");
      const auto lo = parse_int(lohi[0]), hi = parse_int(lohi[1]);
      if (hi < lo || std::uint64_t(hi - lo) > caps.product_evaluations) throw ParseError("interval: bad range");
      for (auto v = lo; v <= hi; ++v) {
        RepElement e;
        e.v[0] = v;
        g.validate(e);
        all.push_back(e);
      }
    } else if (p.rfind("subgroup:", 0) == 0) {
      auto s = generated(g, element_list(g, std::string_view(p).substr(9)), caps);
      all.insert(all.end(), s.elements().begin(), s.elements().end());
    } else if (p.rfind("coset:", 0) == 0) {
      const auto at = p.find('@');
      if (at == std::string::npos) throw ParseError("coset:x@g1;g2");
      const RepElement x = parse_element(g, std::string_view(p).substr(6, at - 6));
      auto s = generated(g, element_list(g, std::string_view(p).substr(at + 1)), caps);
      for (const auto& y : s.elements()) all.push_back(g.mul(x, y));
    } else {
      auto l = element_list(g, p);
      all.insert(all.end(), l.begin(), l.end());
    }
  }
  return ElementSet(std::move(all));
}

}  // namespace stabreg
