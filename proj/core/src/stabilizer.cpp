#include "stabreg/stabilizer.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <mpfr.h>
#include <nlohmann/json.hpp>

namespace stabreg {

namespace {

// sigma(eta) < v <= eta for the least profile value above sigma(eta).
std::optional<Rational> gap_blocker(const std::vector<Rational>& sorted, const PowerRational& eta,
                                    const PowerRational& sig) {
  // First value strictly greater than sigma(eta).
  auto it = std::partition_point(sorted.begin(), sorted.end(), [&](const Rational& v) {
    return sgn(v) <= 0 || sig.compare(v) >= 0;
  });
  if (it == sorted.end()) return std::nullopt;
  if (sgn(*it) > 0 && eta.compare(*it) >= 0) return *it;
  return std::nullopt;
}

// Rational lower bound on 2^(-y) for y > 0, at 256 bits.
Rational exp2_neg_lower(const PowerRational& y) {
  mpfr_t v, yy;
  mpfr_inits2(256, v, yy, static_cast<mpfr_ptr>(nullptr));
  if (auto q = y.to_rational(1 << 16)) {
    mpfr_set_q(yy, q->get_mpq_t(), MPFR_RNDU);
  } else {
    // Not materializable: bound through log2 with a one-bit margin.
    mpfr_set_d(yy, std::ceil(y.log2_approx()) + 1, MPFR_RNDU);
    mpfr_exp2(yy, yy, MPFR_RNDU);
  }
  mpfr_neg(yy, yy, MPFR_RNDD);
  mpfr_exp2(v, yy, MPFR_RNDD);
  mpq_class out;
  mpfr_get_q(out.get_mpq_t(), v);
  mpfr_clears(v, yy, static_cast<mpfr_ptr>(nullptr));
  return out;
}

}  // namespace

std::vector<Rational> StabilizerProfile::distinct_values() const {
  std::vector<Rational> out;
  for (const auto& v : values) {
    Rational q(static_cast<unsigned long>(v.count), static_cast<unsigned long>(normalizer));
    q.canonicalize();
    out.push_back(q);
  }
  return out;
}

StabilizerProfile stab_profile(const GroupSubset& a) {
  const auto& G = a.group();
  StabilizerProfile p;
  p.domain_label = "x in G, X = G";
  p.normalizer = G.order();
  p.count_of.resize(G.order());
  std::map<std::size_t, ProfileValue> acc;
  for (Element x = 0; x < G.order(); ++x) {
    std::size_t c = symdiff_count(translate_right(a, x), a);
    p.count_of[x] = c;
    auto [it, fresh] = acc.try_emplace(c, ProfileValue{c, 0, x});
    ++it->second.multiplicity;
  }
  for (auto& [c, v] : acc) p.values.push_back(v);
  return p;
}

GroupSubset stab_set(const StabilizerProfile& p, const GroupHandle& g, const PowerRational& eps) {
  GroupSubset out(g);
  // Counts ascend, so one comparison per distinct count suffices.
  std::vector<bool> keep;
  for (const auto& v : p.values) {
    bool in = v.count == 0 ||
              eps.compare(Rational(static_cast<unsigned long>(v.count), static_cast<unsigned long>(p.normalizer))) >= 0;
    keep.push_back(in);
  }
  for (Element x = 0; x < p.count_of.size(); ++x) {
    auto it = std::lower_bound(p.values.begin(), p.values.end(), p.count_of[x],
                               [](const ProfileValue& v, std::size_t c) { return v.count < c; });
    if (keep[std::size_t(it - p.values.begin())]) out.insert(x);
  }
  return out;
}

GroupSubset stab_set(const GroupSubset& a, const PowerRational& eps) {
  return stab_set(stab_profile(a), a.handle(), eps);
}

GroupSubset stab_set(const GroupSubset& a, const Rational& eps) {
  if (sgn(eps) < 0) throw PreconditionError("stab_set: eps must be nonnegative");
  GroupSubset out(a.handle());
  const auto& G = a.group();
  const Rational limit = eps * static_cast<unsigned long>(G.order());
  for (Element x = 0; x < G.order(); ++x)
    if (Rational(static_cast<unsigned long>(symdiff_count(translate_right(a, x), a))) <= limit) out.insert(x);
  return out;
}

SigmaMap SigmaMap::power(unsigned long p) {
  if (p < 1) throw PreconditionError("sigma: exponent must be at least 1");
  SigmaMap s;
  s.kind_ = Kind::kPower;
  s.p_ = p;
  return s;
}

SigmaMap SigmaMap::scaled_power(unsigned long p, const Rational& c) {
  if (c < 1) throw PreconditionError("sigma: scale must be at least 1");
  SigmaMap s = power(p);
  s.kind_ = Kind::kScaledPower;
  s.c_ = c;
  return s;
}

SigmaMap SigmaMap::snapped_exp(unsigned long k, std::size_t grid) {
  if (k < 1 || grid < 1) throw PreconditionError("sigma: snapped exponential needs k, grid >= 1");
  SigmaMap s;
  s.kind_ = Kind::kSnappedExp;
  s.p_ = k;
  s.grid_ = grid;
  return s;
}

PowerRational SigmaMap::operator()(const PowerRational& x) const {
  switch (kind_) {
    case Kind::kPower:
      return x.pow(long(p_));
    case Kind::kScaledPower:
      return x.pow(long(p_)) / PowerRational(c_);
    case Kind::kSnappedExp: {
      const unsigned long den = 2 * grid_;
      PowerRational y = x.pow(-long(p_));
      unsigned long j = 0;
      // 2^-y is far below the grid once y exceeds 2^20.
      if (y.log2_approx() < 20) {
        Rational v = exp2_neg_lower(y) * den;
        BigInt c;
        mpz_cdiv_q(c.get_mpz_t(), v.get_num_mpz_t(), v.get_den_mpz_t());
        c -= 1;
        if (c > 0) j = c.get_ui();
      }
      return PowerRational(make_rational(long(std::max(j, 1ul)), den));
    }
  }
  return x;
}

std::string SigmaMap::describe() const {
  switch (kind_) {
    case Kind::kPower:
      return "x^" + std::to_string(p_);
    case Kind::kScaledPower:
      return "x^" + std::to_string(p_) + "/(" + to_string(c_) + ")";
    case Kind::kSnappedExp:
      return "snap_" + std::to_string(2 * grid_) + "(2^(-x^-" + std::to_string(p_) + "))";
  }
  return "";
}

PowerRational tau(const EtaSearchConfig& cfg, const PowerRational& x) {
  PowerRational half(1, 2);
  PowerRational s = cfg.sigma(x * half);
  PowerRational denom(8 * long(cfg.k - 1));
  PowerRational r(cfg.r);
  return x * s * s / (denom * r * r);
}

SigmaChain sigma_chain(const EtaSearchConfig& cfg) {
  if (cfg.k < 2) throw PreconditionError("sigma_chain: k must be at least 2");
  if (cfg.r < 1) throw PreconditionError("sigma_chain: r must be at least 1");
  if (sgn(cfg.eps) <= 0 || cfg.eps >= 1) throw PreconditionError("sigma_chain: eps must lie in (0, 1)");
  SigmaChain out;
  const PowerRational half(1, 2);
  PowerRational cur(cfg.eps);
  out.candidates.push_back(cur);
  for (std::size_t n = 1; n <= cfg.k; ++n) {
    PowerRational next = tau(cfg, cur);
    if (next.compare(cur) >= 0) throw PreconditionError("sigma_chain: sigma does not decrease the chain");
    cur = std::move(next);
    if (n < cfg.k) out.candidates.push_back(cur * half);
  }
  out.delta = cur;
  return out;
}

EtaResult find_eta(std::vector<Rational> values, const EtaSearchConfig& cfg) {
  for (const auto& v : values)
    if (sgn(v) < 0 || v > 1) throw PreconditionError("find_eta: values must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  EtaResult res;
  res.chain = sigma_chain(cfg);
  for (std::size_t i = 0; i < res.chain.candidates.size(); ++i) {
    const PowerRational& eta = res.chain.candidates[i];
    PowerRational sig = cfg.sigma(eta);
    if (auto b = gap_blocker(values, eta, sig)) {
      res.blocked.emplace_back(i, *b);
      continue;
    }
    res.eta = eta;
    res.sigma_eta = sig;
    res.candidate_index = i;
    return res;
  }
  std::string msg = "eta-search failed on all " + std::to_string(res.chain.candidates.size()) +
                    " candidates (sigma = " + cfg.sigma.describe() + ", k = " + std::to_string(cfg.k) +
                    "): the relation is not " + std::to_string(cfg.k) + "-stable";
  throw EtaSearchFailure(msg, res.chain, res.blocked);
}

EtaResult eta_for_stab(const GroupSubset& a, const EtaSearchConfig& cfg) {
  if (cfg.r != 1) throw PreconditionError("eta_for_stab: r must be 1");
  return find_eta(stab_profile(a).distinct_values(), cfg);
}

LemmaWitness lemma_witness(const GroupSubset& a, const EtaSearchConfig& cfg) {
  if (cfg.r != 1) throw PreconditionError("lemma_witness: r must be 1");
  const auto& G = a.group();
  const std::size_t n = G.order();
  const auto profile = stab_profile(a);
  SigmaChain chain;
  try {
    eta_for_stab(a, cfg);
    throw PreconditionError("lemma_witness: the eta-search succeeds on this input");
  } catch (const EtaSearchFailure& f) {
    chain = f.chain;
  }
  const std::size_t k = cfg.k;

  // Blocking x for candidate i: sigma(eta) < |A xor Ax|/n <= eta, least x.
  auto blocking = [&](std::size_t i) -> Element {
    const auto& eta = chain.candidates[i];
    const auto sig = cfg.sigma(eta);
    for (Element x = 0; x < n; ++x) {
      Rational mu(static_cast<unsigned long>(profile.count_of[x]), static_cast<unsigned long>(n));
      mu.canonicalize();
      if (sgn(mu) > 0 && sig.compare(mu) < 0 && eta.compare(mu) >= 0) return x;
    }
    throw Error("lemma_witness: no blocking column at candidate " + std::to_string(i));
  };

  LemmaWitness out;
  std::vector<Bits> right;
  for (Element y = 0; y < n; ++y) right.push_back(translate_right(a, y).bits());

  // Stage 1.
  Element x1 = blocking(0);
  out.blocking.push_back(x1);
  std::vector<std::size_t> cols{std::size_t(x1)};  // column (e, x1)
  std::vector<Bits> cells{right[0] ^ right[x1]};
  PowerRational tau_n = tau(cfg, chain.candidates[0]);  // tau^1(eps)
  auto check_density = [&](const PowerRational& bound) {
    for (const auto& c : cells) {
      Rational mu(static_cast<unsigned long>(c.count()), static_cast<unsigned long>(n));
      mu.canonicalize();
      if (sgn(mu) == 0 || bound.compare(mu) >= 0) out.density_bounds_held = false;
    }
  };
  check_density(tau_n);

  for (std::size_t stage = 1; stage < k; ++stage) {
    Element xc = blocking(stage);
    out.blocking.push_back(xc);
    const Bits b = cells.back();
    // C g = A g xor A xc g; pick g maximizing |B meet Cg|, least g on ties.
    Element best = 0;
    std::size_t best_hits = 0;
    bool have = false;
    for (Element g = 0; g < n; ++g) {
      Bits cg = right[g] ^ right[G.mul(xc, g)];
      std::size_t hits = (b & cg).count();
      if (!have || hits > best_hits) {
        best = g;
        best_hits = hits;
        have = true;
      }
    }
    out.translates.push_back(best);
    Bits cg = right[best] ^ right[G.mul(xc, best)];
    for (auto& c : cells) c -= cg;
    Bits top = b & cg;
    cells.push_back(top);
    cols.push_back(std::size_t(best) * n + G.mul(xc, best));
    for (std::size_t t = 0; t < cells.size(); ++t)
      if (cells[t].none())
        throw Error("lemma_witness: construction stalled at stage " + std::to_string(stage + 1) + ", cell " +
                    std::to_string(t + 1) + " is empty");
    tau_n = tau(cfg, tau_n);
    check_density(tau_n);
  }

  // phi(a_t, b_j) iff j <= t; reversing both sides gives i <= j.
  for (std::size_t i = 0; i < k; ++i) {
    out.witness.a.push_back(cells[k - 1 - i].find_first());
    out.witness.b.push_back(cols[k - 1 - i]);
  }
  // Check against the k columns used rather than all n^2 of phi_A.
  BinaryRelation used(n, k);
  HalfGraphWitness local{out.witness.a, {}};
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t c = out.witness.b[j];
    used.set_column(j, right[c / n] ^ right[c % n]);
    local.b.push_back(j);
  }
  if (!verify_half_graph(used, local)) throw Error("lemma_witness: extracted half-graph failed verification");
  return out;
}

}  // namespace stabreg

namespace stabreg {

nlohmann::json to_json(const StabilizerProfile& p) {
  auto vals = nlohmann::json::array();
  for (const auto& v : p.values)
    vals.push_back({{"count", v.count},
                    {"value", to_string(make_rational(long(v.count), p.normalizer))},
                    {"multiplicity", v.multiplicity},
                    {"sample", v.sample}});
  return {{"domain", p.domain_label}, {"normalizer", p.normalizer}, {"values", vals}};
}

nlohmann::json to_json(const SigmaChain& c) {
  auto cand = nlohmann::json::array();
  for (const auto& x : c.candidates) cand.push_back(x.to_string());
  return {{"candidates", cand}, {"delta", c.delta.to_string()}};
}

nlohmann::json to_json(const EtaResult& r) {
  auto blocked = nlohmann::json::array();
  for (const auto& [i, v] : r.blocked) blocked.push_back({{"candidate", i}, {"value", to_string(v)}});
  return {{"eta", r.eta.to_string()},
          {"sigma_eta", r.sigma_eta.to_string()},
          {"candidate_index", r.candidate_index},
          {"chain", to_json(r.chain)},
          {"blocked", blocked}};
}

nlohmann::json to_json(const LemmaWitness& w) {
  return {{"half_graph", to_json(w.witness)},
          {"blocking", w.blocking},
          {"translates", w.translates},
          {"density_bounds_held", w.density_bounds_held}};
}

}  // namespace stabreg
