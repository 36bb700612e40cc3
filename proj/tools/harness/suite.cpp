#include <algorithm>
#include <atomic>
#include <functional>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "harness.hpp"
#include "stabreg/random.hpp"

namespace stabreg::cli {

namespace {

// Table oracles. Everything below reads the multiplication table directly.

bool coset_oracle(const GroupSubset& a) {
  const auto& G = a.group();
  const auto el = a.elements();
  const Element ai = G.inv(el.front());
  std::vector<char> in_s(G.order(), 0);
  for (Element x : el) in_s[G.mul(ai, x)] = 1;
  for (Element s = 0; s < G.order(); ++s) {
    if (!in_s[s]) continue;
    for (Element t = 0; t < G.order(); ++t)
      if (in_s[t] && !in_s[G.mul(s, t)]) return false;
  }
  return true;
}

// Largest k with a_i b_j in A iff i <= j, by plain enumeration.
int ladder_oracle(const GroupSubset& a, int limit) {
  const auto& G = a.group();
  const int n = int(G.order());
  auto rel = [&](int x, int y) { return a.contains(G.mul(Element(x), Element(y))); };
  std::vector<int> as, bs;
  int best = 0;
  std::function<void()> extend = [&]() {
    const int t = int(as.size());
    best = std::max(best, t);
    if (best >= limit) return;
    for (int x = 0; x < n && best < limit; ++x) {
      bool ok = true;
      for (int j = 0; j < t && ok; ++j) ok = !rel(x, bs[j]);
      if (!ok) continue;
      as.push_back(x);
      for (int y = 0; y < n && best < limit; ++y) {
        bool oky = true;
        for (int i = 0; i <= t && oky; ++i) oky = rel(as[i], y);
        if (!oky) continue;
        bs.push_back(y);
        extend();
        bs.pop_back();
      }
      as.pop_back();
    }
  };
  extend();
  return best;
}

// Translate family as bit rows: left gives gA, right gives Ag.
std::vector<std::vector<char>> translate_family(const GroupSubset& a, bool left) {
  const auto& G = a.group();
  const std::size_t n = G.order();
  std::vector<std::vector<char>> fam(n, std::vector<char>(n, 0));
  for (Element g = 0; g < n; ++g)
    for (Element x : a.elements()) fam[g][left ? G.mul(g, x) : G.mul(x, g)] = 1;
  return fam;
}

bool some_k_subset_shattered(const std::vector<std::vector<char>>& fam, std::size_t n, std::size_t k) {
  if (k == 0) return true;
  if ((std::size_t(1) << k) > fam.size()) return false;
  std::vector<std::size_t> pick(k);
  for (std::size_t i = 0; i < k; ++i) pick[i] = i;
  for (;;) {
    std::vector<char> seen(std::size_t(1) << k, 0);
    std::size_t distinct = 0;
    for (const auto& s : fam) {
      std::size_t trace = 0;
      for (std::size_t i = 0; i < k; ++i) trace |= std::size_t(s[pick[i]]) << i;
      if (!seen[trace]) seen[trace] = 1, ++distinct;
    }
    if (distinct == seen.size()) return true;
    std::size_t i = k;
    while (i > 0 && pick[i - 1] == n - k + i - 1) --i;
    if (i == 0) return false;
    ++pick[i - 1];
    for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
}

std::size_t vc_oracle(const std::vector<std::vector<char>>& fam, std::size_t n) {
  std::size_t d = 0;
  while (d < n && some_k_subset_shattered(fam, n, d + 1)) ++d;
  return d;
}

// |Ax xor A| for every x.
std::vector<std::size_t> shift_counts(const GroupSubset& a) {
  const auto& G = a.group();
  const std::size_t n = G.order();
  std::vector<std::size_t> c(n, 0);
  for (Element x = 0; x < n; ++x) {
    const Element xi = G.inv(x);
    for (Element y = 0; y < n; ++y) c[x] += a.contains(G.mul(y, xi)) != a.contains(y);
  }
  return c;
}

std::string hex_of(const GroupSubset& a) { return bits_to_hex(a.bits()); }

struct Outcome {
  bool applicable = false;
  bool ok = true;
  std::string clause;
  std::string detail;
  std::string eps;
};

class Evaluator {
 public:
  Evaluator(const SuiteScope& scope, const Caps& caps, StabilityMemo& memo)
      : scope_(scope), caps_(caps), memo_(memo) {}

  // `only_eps` restricts the eps loop, for minimization.
  Outcome eval(const std::string& inv, const GroupSubset& a, const std::optional<Rational>& only_eps = {}) {
    Outcome o;
    try {
      run(inv, a, only_eps, o);
    } catch (const std::exception& e) {
      o.applicable = true;
      o.ok = false;
      if (o.clause.empty()) o.clause = "raised";
      o.detail = e.what();
    }
    if (o.applicable && scope_.inject == inv) {
      o.ok = !o.ok;
      o.clause = o.ok ? "" : "injected: outcome of " + inv + " flipped";
    }
    return o;
  }

 private:
  // Records one clause; a clause named in `inject` is flipped.
  bool clause(Outcome& o, const std::string& name, bool ok, const std::string& detail = {}) {
    o.applicable = true;
    if (name == scope_.inject) ok = !ok;
    if (!ok && o.ok) {
      o.ok = false;
      o.clause = name;
      o.detail = detail;
    }
    return ok;
  }

  std::vector<Rational> eps_list(const std::optional<Rational>& only) const {
    if (only) return {*only};
    return scope_.eps;
  }

  DecomposeOptions dopts() const {
    DecomposeOptions o;
    o.stability = caps_.stability;
    o.memo = &memo_;
    return o;
  }

  void run(const std::string& inv, const GroupSubset& a, const std::optional<Rational>& only_eps, Outcome& o) {
    const auto& G = a.group();
    const std::size_t n = G.order();
    const auto st = memo_.stability(a);
    const std::size_t k = st.index;

    if (inv == "empty-iff-index-1") {
      clause(o, "index 1 iff empty", (k == 1) == a.empty(), "index " + std::to_string(k));
    } else if (inv == "coset-iff-index-2") {
      if (a.empty()) return;
      const bool coset = coset_oracle(a);
      clause(o, "index 2 iff coset", (k == 2) == coset,
             "index " + std::to_string(k) + ", coset " + (coset ? "yes" : "no"));
    } else if (inv == "stability-brute") {
      if (n > scope_.brute_order) return;
      const int brute = ladder_oracle(a, int(n) + 1);
      clause(o, "index = largest half-graph + 1", st.exact && k == std::size_t(brute) + 1,
             "library " + std::to_string(k) + ", brute force " + std::to_string(brute + 1));
    } else if (inv == "vc-below-index") {
      for (bool left : {true, false}) {
        const auto fam = translate_family(a, left);
        const std::size_t vc = vc_oracle(fam, n);
        const std::string side = left ? "left" : "right";
        clause(o, "VC of " + side + " translates <= index - 1", vc + 1 <= k,
               "VC " + std::to_string(vc) + ", index " + std::to_string(k));
        const std::size_t lib = vc_translates(a, left ? Side::kLeft : Side::kRight);
        clause(o, "library VC of " + side + " translates", lib == vc,
               "library " + std::to_string(lib) + ", oracle " + std::to_string(vc));
      }
    } else if (inv == "translation-invariance") {
      if (n > scope_.translation_order) return;
      for (Element g = 0; g < n; ++g) {
        const auto l = stability_index(translate_left(g, a), caps_.stability).index;
        const auto r = stability_index(translate_right(a, g), caps_.stability).index;
        if (!clause(o, "index(gA) = index(Ag) = index(A)", l == k && r == k,
                    "g = " + std::to_string(g) + ": " + std::to_string(l) + ", " + std::to_string(r) + " vs " +
                        std::to_string(k)))
          return;
      }
    } else if (inv == "complement-bound") {
      const auto kc = memo_.stability(complement(a)).index;
      clause(o, "index(G \\ A) <= index(A) + 1", kc <= k + 1, std::to_string(kc) + " vs " + std::to_string(k));
    } else if (inv == "closure-bounds") {
      if (n > scope_.closure_order || k < 2) return;
      for (std::uint64_t m = 0; m < (std::uint64_t(1) << n); ++m) {
        GroupSubset b(a.handle());
        for (Element x = 0; x < n; ++x)
          if (m >> x & 1) b.insert(x);
        const auto kb = memo_.stability(b).index;
        if (kb < 2) continue;
        const auto cb = closure_bounds(k, kb);
        const auto ki = memo_.stability(intersect(a, b)).index;
        const auto ku = memo_.stability(unite(a, b)).index;
        if (!clause(o, "index(A meet B) within bound", BigInt(static_cast<unsigned long>(ki)) <= cb.intersection,
                    "B = " + hex_of(b)))
          return;
        if (!clause(o, "index(A join B) within bound", BigInt(static_cast<unsigned long>(ku)) <= cb.uni,
                    "B = " + hex_of(b)))
          return;
      }
    } else if (inv == "eta-search") {
      const auto counts = shift_counts(a);
      for (const auto& eps : eps_list(only_eps)) {
        o.eps = to_string(eps);
        const auto sel = select_eta(a, eps, dopts(), false);
        clause(o, "k* from exact phi_A stability", sel.k_star.source == "exact-phi", sel.k_star.source);
        clause(o, "sigma = x^(4k)", sel.sigma.describe() == SigmaMap::power(4 * sel.k).describe(),
               sel.sigma.describe());
        clause(o, "eta >= delta", sel.eta.eta.compare(sel.eta.chain.delta) >= 0);
        const auto& cand = sel.eta.chain.candidates;
        clause(o, "eta is a chain candidate",
               sel.eta.candidate_index < cand.size() && cand[sel.eta.candidate_index] == sel.eta.eta);
        for (Element x = 0; x < n; ++x) {
          const Rational v = make_rational(long(counts[x]), n);
          const bool in_gap = sel.eta.eta.compare(v) >= 0 && sel.eta.sigma_eta.compare(v) < 0;
          if (!clause(o, "no value in (sigma(eta), eta]", !in_gap, "x = " + std::to_string(x))) break;
        }
        if (!o.ok) return;
      }
      o.eps.clear();
    } else if (inv == "decompose-contract" || inv == "normal-contract") {
      if (k > scope_.index_cap) return;
      const bool normal = inv == "normal-contract";
      for (const auto& eps : eps_list(only_eps)) {
        o.eps = to_string(eps);
        const auto r = normal ? decompose_normal(a, eps, dopts()) : decompose(a, eps, dopts());
        for (const auto& c : verify_report(a, eps, r).checks) clause(o, c.name, c.ok, c.detail);
        if (!o.ok) return;
      }
      o.eps.clear();
    } else if (inv == "degenerate-exact") {
      if (k > 2) return;
      for (const auto& eps : eps_list(only_eps)) {
        o.eps = to_string(eps);
        const auto r = decompose(a, eps, dopts());
        clause(o, "D = A", r.D == a);
        clause(o, "error count 0", r.error_count == 0, std::to_string(r.error_count));
        if (!o.ok) return;
      }
      o.eps.clear();
    } else if (inv == "dnf-round-trip") {
      if (k > scope_.index_cap) return;
      const auto counts = shift_counts(a);
      for (const auto& eps : eps_list(only_eps)) {
        o.eps = to_string(eps);
        const auto pair = eta_pair_for_dnf(a, eps, dopts());
        DnfOptions fo;
        fo.stability = caps_.stability;
        fo.seed = scope_.seed;
        const auto f = stab_dnf(a, pair.kappa, pair.lambda, fo);
        GroupSubset expect(a.handle());
        for (Element x = 0; x < n; ++x)
          if (pair.kappa.compare(make_rational(long(counts[x]), n)) >= 0) expect.insert(x);
        clause(o, "formula evaluates to Stab_eta(A)", evaluate_dnf(f) == expect);
        clause(o, "clause count within binomial bound",
               BigInt(static_cast<unsigned long>(f.clauses.size())) <= f.clause_bound,
               std::to_string(f.clauses.size()) + " vs " + f.clause_bound.get_str());
        clause(o, "tuple length within bound (C = 64)", f.length_within_bound);
        if (!o.ok) return;
      }
      o.eps.clear();
    } else if (inv == "vc-tooling") {
      const auto fam = translate_family(a, true);
      const std::size_t d = vc_oracle(fam, n);
      const SetSystem sys = translates_system(a, Side::kLeft);
      std::vector<std::size_t> sizes(fam.size(), 0);
      for (std::size_t i = 0; i < fam.size(); ++i)
        for (char c : fam[i]) sizes[i] += std::size_t(c);
      const std::size_t dn = std::max<std::size_t>(d, 1);
      for (const auto& eps : eps_list(only_eps)) {
        o.eps = to_string(eps);
        const auto net = epsilon_net(sys, eps, dn, scope_.seed);
        bool hits = true;
        for (std::size_t i = 0; i < fam.size() && hits; ++i) {
          if (!(Rational(static_cast<unsigned long>(sizes[i])) > eps * static_cast<unsigned long>(n))) continue;
          hits = std::any_of(net.points.begin(), net.points.end(), [&](std::size_t p) { return fam[i][p]; });
        }
        clause(o, "net meets every large member", hits);
        const Rational net_cap = Rational(static_cast<unsigned long>(8 * dn)) / (eps * eps);
        clause(o, "net size <= 8d/eps^2", Rational(static_cast<unsigned long>(net.points.size())) <= net_cap);

        const auto ap = epsilon_approximation(sys, eps, dn, scope_.seed);
        Rational worst = 0;
        for (std::size_t i = 0; i < fam.size(); ++i) {
          std::size_t hit = 0;
          for (std::size_t p : ap.tuple) hit += std::size_t(fam[i][p]);
          Rational diff = make_rational(long(hit), ap.tuple.size()) - make_rational(long(sizes[i]), n);
          if (diff < 0) diff = -diff;
          worst = std::max(worst, diff);
        }
        clause(o, "approximation within eps", worst <= eps, to_string(worst));
        clause(o, "approximation length within cap", ap.tuple.size() <= approximation_length_cap(eps, dn));

        const auto pk = haussler_packing(sys, eps, d);
        auto dist = [&](std::size_t i, std::size_t j) {
          std::size_t c = 0;
          for (std::size_t p = 0; p < n; ++p) c += fam[i][p] != fam[j][p];
          return Rational(static_cast<unsigned long>(c));
        };
        const Rational far = eps * static_cast<unsigned long>(n);
        bool separated = true, maximal = true;
        for (std::size_t x = 0; x < pk.indices.size(); ++x)
          for (std::size_t y = x + 1; y < pk.indices.size(); ++y) separated &= dist(pk.indices[x], pk.indices[y]) > far;
        for (std::size_t i = 0; i < fam.size(); ++i)
          maximal &= std::any_of(pk.indices.begin(), pk.indices.end(), [&](std::size_t j) { return !(dist(i, j) > far); });
        clause(o, "packing pairwise far apart", separated);
        clause(o, "packing maximal", maximal);
        Rational bound = 1;
        for (std::size_t i = 0; i < d; ++i) bound *= Rational(30) / eps;
        clause(o, "packing size <= (30/eps)^d", Rational(static_cast<unsigned long>(pk.indices.size())) <= bound,
               std::to_string(pk.indices.size()) + " vs " + to_string(bound));
        if (!o.ok) return;
      }
      o.eps.clear();
    } else {
      throw ParseError("unknown invariant: " + inv);
    }
  }

  const SuiteScope& scope_;
  const Caps& caps_;
  StabilityMemo& memo_;
};

struct Unit {
  std::size_t group_pos;
  std::vector<Bits> subsets;
};

}  // namespace

const std::vector<std::string>& suite_invariants() {
  static const std::vector<std::string> names{
      "empty-iff-index-1", "coset-iff-index-2", "stability-brute",  "vc-below-index", "translation-invariance",
      "complement-bound",  "closure-bounds",    "eta-search",       "decompose-contract", "degenerate-exact",
      "dnf-round-trip",    "normal-contract",   "vc-tooling"};
  return names;
}

SuiteResult run_oracle_suite(const SuiteScope& scope, const Caps& caps) {
  SuiteResult out;
  out.scope = scope;
  for (const auto& inv : suite_invariants())
    if (scope.invariants.empty() || scope.invariants.count(inv)) out.invariants.push_back(inv);
  for (const auto& inv : scope.invariants)
    if (std::find(suite_invariants().begin(), suite_invariants().end(), inv) == suite_invariants().end())
      throw ParseError("unknown invariant: " + inv);
  for (const auto& inv : out.invariants) out.tallies[inv];

  std::vector<GroupHandle> groups;
  const auto names = scope.groups.empty() ? dsl_groups_up_to(scope.max_order) : scope.groups;
  for (const auto& name : names) {
    auto g = load_group(name, caps);
    if (g->order() <= scope.max_order) groups.push_back(std::move(g));
  }

  const std::size_t exhaustive = scope.exhaustive_order ? scope.exhaustive_order : scope.max_order;
  std::vector<Unit> units;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const std::size_t n = groups[gi]->order();
    std::vector<Bits> subsets;
    if (n <= exhaustive && n <= 24) {
      for (std::uint64_t m = 0; m < (std::uint64_t(1) << n); ++m) subsets.emplace_back(n, m);
    } else {
      Rng rng(scope.seed ^ (0x9e3779b97f4a7c15ull * (gi + 1)));
      for (std::size_t s = 0; s < scope.samples; ++s) {
        Bits b(n);
        for (std::size_t x = 0; x < n; ++x) b[x] = rng.chance(1, 2);
        subsets.push_back(std::move(b));
      }
    }
    // Chunks keep the work queue balanced across jobs.
    for (std::size_t i = 0; i < subsets.size(); i += 256)
      units.push_back({gi, std::vector<Bits>(subsets.begin() + i, subsets.begin() + std::min(i + 256, subsets.size()))});
  }

  StabilityMemo memo(caps.stability);
  std::vector<std::vector<SuiteRow>> unit_rows(units.size());
  struct FirstFail {
    std::size_t unit = ~std::size_t(0), pos = 0;
    Outcome outcome;
  };
  std::vector<std::vector<FirstFail>> unit_fail(units.size());
  std::vector<std::vector<InvariantTally>> unit_tally(units.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    Evaluator ev(scope, caps, memo);
    for (std::size_t u; (u = next.fetch_add(1)) < units.size();) {
      const auto& g = groups[units[u].group_pos];
      auto& fails = unit_fail[u];
      auto& tally = unit_tally[u];
      fails.assign(out.invariants.size(), {});
      tally.assign(out.invariants.size(), {});
      for (std::size_t pos = 0; pos < units[u].subsets.size(); ++pos) {
        GroupSubset a(g, units[u].subsets[pos]);
        SuiteRow row;
        row.group = g->name();
        row.order = g->order();
        row.subset = hex_of(a);
        row.stability_index = memo.stability(a).index;
        for (std::size_t i = 0; i < out.invariants.size(); ++i) {
          auto oc = ev.eval(out.invariants[i], a);
          char c = '-';
          if (oc.applicable) {
            ++tally[i].checked;
            c = oc.ok ? 'P' : 'F';
            if (!oc.ok) {
              ++tally[i].failed;
              if (fails[i].unit == ~std::size_t(0)) fails[i] = {u, pos, std::move(oc)};
            }
          }
          row.status += c;
        }
        if (scope.keep_rows) unit_rows[u].push_back(std::move(row));
      }
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(scope.jobs, units.size()));
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < jobs; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (std::size_t u = 0; u < units.size(); ++u) {
    for (auto& r : unit_rows[u]) out.rows.push_back(std::move(r));
    for (std::size_t i = 0; i < out.invariants.size(); ++i) {
      out.tallies[out.invariants[i]].checked += unit_tally[u][i].checked;
      out.tallies[out.invariants[i]].failed += unit_tally[u][i].failed;
    }
  }

  // First failure per invariant in canonical order, shrunk one element at a
  // time while the same invariant still fails at the same eps.
  Evaluator ev(scope, caps, memo);
  for (std::size_t i = 0; i < out.invariants.size(); ++i) {
    const FirstFail* first = nullptr;
    for (std::size_t u = 0; u < units.size() && !first; ++u)
      if (unit_fail[u][i].unit != ~std::size_t(0)) first = &unit_fail[u][i];
    if (!first) continue;
    const auto& g = groups[units[first->unit].group_pos];
    GroupSubset cur(g, units[first->unit].subsets[first->pos]);
    Counterexample cx;
    cx.invariant = out.invariants[i];
    cx.group = g->name();
    cx.original = cur.elements();
    cx.eps = first->outcome.eps;
    std::optional<Rational> at;
    if (!cx.eps.empty()) at = parse_rational(cx.eps);
    Outcome last = first->outcome;
    for (bool shrunk = true; shrunk;) {
      shrunk = false;
      for (Element x : cur.elements()) {
        GroupSubset smaller = cur;
        smaller.erase(x);
        auto oc = ev.eval(cx.invariant, smaller, at);
        if (oc.applicable && !oc.ok) {
          cur = std::move(smaller);
          last = std::move(oc);
          shrunk = true;
          break;
        }
      }
    }
    cx.minimized = cur.elements();
    cx.clause = last.clause;
    cx.detail = last.detail;
    out.failures.push_back(std::move(cx));
  }
  return out;
}

std::string suite_csv(const SuiteResult& r) {
  std::ostringstream os;
  os << "group,order,subset,stability_index";
  for (const auto& inv : r.invariants) os << "," << inv;
  os << "\n";
  for (const auto& row : r.rows) {
    os << row.group << "," << row.order << "," << row.subset << "," << row.stability_index;
    for (char c : row.status) os << "," << c;
    os << "\n";
  }
  return os.str();
}

nlohmann::json to_json(const Counterexample& c) {
  nlohmann::json j{{"invariant", c.invariant}, {"clause", c.clause},       {"group", c.group},
                   {"original", c.original},   {"minimized", c.minimized}, {"detail", c.detail}};
  j["epsilon"] = c.eps.empty() ? nlohmann::json(nullptr) : nlohmann::json(c.eps);
  return j;
}

nlohmann::json suite_json(const SuiteResult& r) {
  nlohmann::json scope;
  scope["max_order"] = r.scope.max_order;
  scope["exhaustive_order"] = r.scope.exhaustive_order ? r.scope.exhaustive_order : r.scope.max_order;
  scope["samples"] = r.scope.samples;
  scope["groups"] = r.scope.groups;
  auto eps = nlohmann::json::array();
  for (const auto& e : r.scope.eps) eps.push_back(to_string(e));
  scope["epsilon"] = eps;
  scope["seed"] = r.scope.seed;
  scope["index_cap"] = r.scope.index_cap;
  scope["brute_order"] = r.scope.brute_order;
  scope["translation_order"] = r.scope.translation_order;
  scope["closure_order"] = r.scope.closure_order;
  if (!r.scope.inject.empty()) scope["inject"] = r.scope.inject;
  nlohmann::json tallies = nlohmann::json::object();
  for (const auto& [name, t] : r.tallies) tallies[name] = {{"checked", t.checked}, {"failed", t.failed}};
  auto fails = nlohmann::json::array();
  for (const auto& c : r.failures) fails.push_back(to_json(c));
  return {{"ok", r.ok()},       {"scope", scope},     {"invariants", r.invariants},
          {"rows", r.rows.size()}, {"tallies", tallies}, {"failures", fails}};
}

}  // namespace stabreg::cli
