#include "stabreg/definability.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace stabreg {

namespace {

double log2_of(const Rational& q) {
  long en = 0, ed = 0;
  const double mn = mpz_get_d_2exp(&en, q.get_num_mpz_t());
  const double md = mpz_get_d_2exp(&ed, q.get_den_mpz_t());
  return std::log2(mn / md) + double(en - ed);
}

// Comparisons against the clause threshold lambda + theta = (kappa + lambda)/2.
class Threshold {
 public:
  Threshold(const PowerRational& kappa, const PowerRational& lambda)
      : kappa_(kappa), lambda_(lambda), kq_(kappa.to_rational()), lq_(lambda.to_rational()) {
    if (kq_ && lq_) theta_ = (*kq_ - *lq_) / 2;
  }

  const std::optional<Rational>& theta() const { return theta_; }

  double theta_log2() const {
    if (theta_) return log2_of(*theta_);
    return kappa_.log2_approx() - 1;  // lambda is negligible next to kappa here
  }

  // j/n <= (kappa + lambda)/2
  bool admits(std::size_t j, std::size_t n) const {
    if (j == 0) return true;
    const Rational q = make_rational(long(j), n);
    if (lambda_.compare(q) >= 0) return true;
    if (kappa_.compare(q) <= 0) return false;
    if (!theta_) throw CapExceeded("stab_dnf: clause threshold too small to materialize");
    return 2 * q <= *kq_ + *lq_;
  }

 private:
  PowerRational kappa_, lambda_;
  std::optional<Rational> kq_, lq_, theta_;
};

SetSystem symdiff_system(const GroupSubset& a) {
  SetSystem s;
  s.ground = a.group().order();
  for (Element x = 0; x < s.ground; ++x) s.sets.push_back(symdiff(translate_right(a, x), a).bits());
  return s;
}

GroupSubset literal_set(const DnfFormula& f, std::size_t i) {
  GroupSubset z = translate_left(f.literals[i].g, f.A);
  return f.literals[i].a_in_A ? complement(z) : z;
}

GroupSubset conjugate(const GroupSubset& h, Element g) {
  const auto& G = h.group();
  GroupSubset out(h.handle());
  for (Element x : h.elements()) out.insert(G.mul(G.mul(g, x), G.inv(g)));
  return out;
}

}  // namespace

DnfFormula stab_dnf(const GroupSubset& a, const PowerRational& kappa, const PowerRational& lambda,
                    const DnfOptions& opts) {
  if (!(lambda.compare(kappa) < 0 && kappa.compare(Rational(1)) < 0))
    throw PreconditionError("stab_dnf: need 0 < lambda < kappa < 1");
  const GroupSubset target = stab_set(a, kappa);
  if (!(target == stab_set(a, lambda)))
    throw PreconditionError("stab_dnf: Stab_kappa(A) differs from Stab_lambda(A)");

  const auto& G = a.group();
  const std::size_t order = G.order();
  DnfFormula f(a.handle());
  f.A = a;
  f.kappa = kappa;
  f.lambda = lambda;
  f.seed = opts.seed;
  Threshold th(kappa, lambda);
  f.theta = th.theta();
  f.theta_log2 = th.theta_log2();

  try {
    f.vc_r = vc_translates(a, Side::kRight);
  } catch (const CapExceeded&) {
    // VC_r(A) < k for k-stable A.
    f.vc_r = stability_index(a, opts.stability).index - 1;
    f.vc_exact = false;
  }
  f.d = 10 * f.vc_r;

  const SetSystem sys = symdiff_system(a);
  std::vector<std::size_t> tuple;
  bool random = false;
  if (f.theta) {
    Rational inv_sq = 1 / (*f.theta * *f.theta);
    random = inv_sq < Rational(static_cast<unsigned long>(order));
  }
  if (random) {
    ApproxOptions ao;
    ao.constant = opts.approx_constant;
    auto r = epsilon_approximation(sys, *f.theta, f.d, opts.seed, ao);
    tuple = std::move(r.tuple);
    f.max_discrepancy = r.max_discrepancy;
    f.tuple_source = "random";
  } else {
    // Sampling starts at 1/theta^2 >= |G| points, so every element once is
    // shorter and exact.
    for (std::size_t x = 0; x < order; ++x) tuple.push_back(x);
    f.max_discrepancy = approximation_discrepancy(sys, tuple);
    f.tuple_source = "full-group";
  }
  if (f.theta && f.max_discrepancy > *f.theta)
    throw TheoremViolation("stab_dnf: approximation tuple exceeds accuracy theta");

  for (auto p : tuple) {
    DnfLiteral l;
    l.a = Element(p);
    l.g = G.inv(l.a);
    l.a_in_A = a.contains(l.a);
    f.literals.push_back(l);
  }
  const std::size_t n = f.literals.size();

  const double dd = double(std::max<std::size_t>(f.d, 1));
  const double t = std::log2(dd) - f.theta_log2;
  const double loglog = t > 60 ? std::log2(t) : std::log2(std::log2(std::exp2(t) + 2));
  f.length_bound_log2 = std::log2(double(opts.approx_constant)) + std::log2(dd) - 2 * f.theta_log2 + loglog;
  f.length_within_bound = std::log2(double(n)) <= f.length_bound_log2;

  while (f.max_clause_size < n && th.admits(f.max_clause_size + 1, n)) ++f.max_clause_size;
  f.clause_bound = binomial_prefix_sum(n, f.max_clause_size);

  // Each x lies in exactly one Y_sigma, so the nonempty clauses are the
  // signatures of the group elements.
  std::set<std::vector<std::size_t>> clauses;
  for (Element x = 0; x < order; ++x) {
    std::vector<std::size_t> sig;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& l = f.literals[i];
      if (a.contains(G.mul(l.a, x)) != l.a_in_A) sig.push_back(i);
    }
    if (sig.size() <= f.max_clause_size) clauses.insert(std::move(sig));
  }
  f.clauses.assign(clauses.begin(), clauses.end());

  if (!(evaluate_dnf(f) == target))
    throw TheoremViolation("stab_dnf: formula does not evaluate to Stab_kappa(A)");
  if (BigInt(static_cast<unsigned long>(f.clauses.size())) > f.clause_bound)
    throw TheoremViolation("stab_dnf: clause count exceeds the binomial bound");
  return f;
}

GroupSubset evaluate_dnf(const DnfFormula& f) {
  const GroupHandle& g = f.A.handle();
  std::vector<GroupSubset> z, zc;
  for (std::size_t i = 0; i < f.n(); ++i) {
    z.push_back(literal_set(f, i));
    zc.push_back(complement(z.back()));
  }
  GroupSubset out(g);
  for (const auto& sigma : f.clauses) {
    GroupSubset y = GroupSubset::full(g);
    std::size_t next = 0;
    for (std::size_t i = 0; i < f.n(); ++i) {
      const bool in = next < sigma.size() && sigma[next] == i;
      if (in) ++next;
      y = intersect(y, in ? z[i] : zc[i]);
    }
    out = unite(out, y);
  }
  return out;
}

EtaPair eta_pair_for_dnf(const GroupSubset& a, const Rational& eps, const DecomposeOptions& opts) {
  EtaPair p;
  p.selection = select_eta(a, eps, opts, false);
  p.kappa = p.selection.eta.eta;
  p.lambda = p.selection.eta.sigma_eta;
  return p;
}

NormalDnf normal_stab_dnf(const GroupSubset& a, const Rational& eps, const DecomposeOptions& dopts,
                          const DnfOptions& opts) {
  auto sel = select_eta(a, eps, dopts, true);
  const PowerRational kappa = sel.eta.eta;
  // The snapped sigma has a floor of 1/(2|G|); it only reaches eta when eta
  // is below 1/|G|, where every level in (0, eta] gives the exact stabilizer.
  PowerRational lambda = sel.eta.sigma_eta;
  if (lambda.compare(kappa) >= 0) lambda = kappa / PowerRational(2);

  NormalDnf out(a.handle());
  out.h0 = stab_dnf(a, kappa, lambda, opts);
  const GroupSubset h0 = evaluate_dnf(out.h0);
  out.core = normal_core(Subgroup(h0)).carrier();
  GroupSubset cur = h0;
  out.conjugators.push_back(0);
  for (Element g = 1; g < a.group().order() && !(cur == out.core); ++g) {
    GroupSubset next = intersect(cur, conjugate(h0, g));
    if (next.size() < cur.size()) {
      out.conjugators.push_back(g);
      cur = std::move(next);
    }
  }
  if (!(cur == out.core)) throw TheoremViolation("normal_stab_dnf: conjugates do not cut out the normal core");
  return out;
}

nlohmann::json to_json(const DnfFormula& f) {
  nlohmann::json j;
  j["group"] = f.A.group().name();
  j["A"] = f.A.elements();
  j["kappa"] = f.kappa.to_string();
  j["lambda"] = f.lambda.to_string();
  j["theta"] = f.theta ? nlohmann::json(to_string(*f.theta)) : nlohmann::json(nullptr);
  j["theta_log2"] = f.theta_log2;
  j["vc_r"] = f.vc_r;
  j["vc_exact"] = f.vc_exact;
  j["d"] = f.d;
  j["n"] = f.n();
  j["tuple_source"] = f.tuple_source;
  j["seed"] = f.seed;
  j["max_discrepancy"] = to_string(f.max_discrepancy);
  auto lits = nlohmann::json::array();
  for (const auto& l : f.literals)
    lits.push_back({{"a", l.a}, {"g", l.g}, {"a_in_A", l.a_in_A}, {"literal", l.a_in_A ? "G\\gA" : "gA"}});
  j["literals"] = lits;
  j["clauses"] = f.clauses;
  j["max_clause_size"] = f.max_clause_size;
  j["clause_bound"] = f.clause_bound.get_str();
  j["length_bound_log2"] = f.length_bound_log2;
  j["length_within_bound"] = f.length_within_bound;
  return j;
}

nlohmann::json to_json(const NormalDnf& f) {
  return {{"H0_formula", to_json(f.h0)}, {"conjugators", f.conjugators}, {"H", f.core.elements()}};
}

std::string pretty_print(const DnfFormula& f) {
  const auto& G = f.A.group();
  std::ostringstream os;
  os << "Stab_kappa(A) in " << G.name() << ", kappa = " << f.kappa.to_string()
     << ", lambda = " << f.lambda.to_string() << "\n";
  os << "A = " << format_elements(f.A) << "\n";
  for (std::size_t i = 0; i < f.n(); ++i) {
    const auto& l = f.literals[i];
    os << "  Z" << i + 1 << " = " << (l.a_in_A ? "G \\ " : "") << G.label(l.g) << " A"
       << "   (a" << i + 1 << " = " << G.label(l.a) << (l.a_in_A ? " in A)" : " not in A)") << "\n";
  }
  os << "Stab_kappa(A) = union of " << f.clauses.size() << " clause" << (f.clauses.size() == 1 ? "" : "s") << ":\n";
  for (const auto& sigma : f.clauses) {
    os << "  {x : ";
    std::size_t next = 0;
    for (std::size_t i = 0; i < f.n(); ++i) {
      const bool in = next < sigma.size() && sigma[next] == i;
      if (in) ++next;
      os << (i ? ", " : "") << "x " << (in ? "in" : "notin") << " Z" << i + 1;
    }
    os << "}\n";
  }
  return os.str();
}

}  // namespace stabreg
