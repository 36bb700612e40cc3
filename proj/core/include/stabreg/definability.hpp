#ifndef STABREG_DEFINABILITY_HPP
#define STABREG_DEFINABILITY_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "stabreg/group.hpp"
#include "stabreg/rational.hpp"
#include "stabreg/regularity.hpp"
#include "stabreg/setsys.hpp"

namespace stabreg {

/// Z_a = {x : a in Ax^-1 xor A}, written as the literal g A or G \ g A with
/// g = a^-1.
struct DnfLiteral {
  Element a = 0;
  Element g = 0;
  bool a_in_A = false;  // Z_a = G \ gA when true, gA otherwise
};

/// Stab_kappa(A) as a union of clauses Y_sigma, where Y_sigma meets Z_i for
/// i in sigma and avoids it otherwise.
struct DnfFormula {
  explicit DnfFormula(const GroupHandle& g) : A(g) {}

  GroupSubset A;
  std::vector<DnfLiteral> literals;               // one per tuple entry
  std::vector<std::vector<std::size_t>> clauses;  // sigma, ascending; lexicographic

  PowerRational kappa;
  PowerRational lambda;
  std::optional<Rational> theta;  // (kappa - lambda)/2 when materializable
  double theta_log2 = 0;

  std::size_t vc_r = 0;
  bool vc_exact = true;
  std::size_t d = 0;  // 10 * vc_r, the VC bound for {Ax xor A}
  std::size_t n() const { return literals.size(); }
  std::string tuple_source;  // "full-group" or "random"
  Rational max_discrepancy;
  std::uint64_t seed = 0;

  std::size_t max_clause_size = 0;  // floor((lambda + theta) n)
  BigInt clause_bound;              // sum_{j <= max_clause_size} C(n, j)
  double length_bound_log2 = 0;     // log2 of C d theta^-2 log2(d/theta + 2)
  bool length_within_bound = false;
};

struct DnfOptions {
  std::uint64_t seed = 1;
  std::size_t approx_constant = 64;
  VcOptions vc;
  StabilityOptions stability;
};

/// Requires 0 < lambda < kappa < 1 and Stab_kappa(A) = Stab_lambda(A).
/// The result is checked to evaluate to Stab_kappa(A) before returning.
DnfFormula stab_dnf(const GroupSubset& a, const PowerRational& kappa, const PowerRational& lambda,
                    const DnfOptions& opts = {});

GroupSubset evaluate_dnf(const DnfFormula& f);

struct EtaPair {
  PowerRational kappa;   // eta
  PowerRational lambda;  // sigma(eta)
  EtaSelection selection;
};

/// The eta-search with sigma = x^(4k): (eta, eta^(4k)).
EtaPair eta_pair_for_dnf(const GroupSubset& a, const Rational& eps, const DecomposeOptions& opts = {});

/// H0 from the normal eta-search as a formula, plus conjugators g with
/// H = the intersection of g H0 g^-1.
struct NormalDnf {
  explicit NormalDnf(const GroupHandle& g) : h0(g), core(g) {}
  DnfFormula h0;
  std::vector<Element> conjugators;
  GroupSubset core;
};

NormalDnf normal_stab_dnf(const GroupSubset& a, const Rational& eps, const DecomposeOptions& dopts = {},
                          const DnfOptions& opts = {});

nlohmann::json to_json(const DnfFormula& f);
nlohmann::json to_json(const NormalDnf& f);

/// Set-builder text: literal table, then one line per clause.
std::string pretty_print(const DnfFormula& f);

}  // namespace stabreg

#endif  // STABREG_DEFINABILITY_HPP
