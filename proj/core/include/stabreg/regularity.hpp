#ifndef STABREG_REGULARITY_HPP
#define STABREG_REGULARITY_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "stabreg/errors.hpp"
#include "stabreg/group.hpp"
#include "stabreg/rational.hpp"
#include "stabreg/stability.hpp"
#include "stabreg/stabilizer.hpp"

namespace stabreg {

struct DecomposeOptions {
  /// Use this k instead of computing the stability index.
  std::optional<std::size_t> supplied_k;
  /// Skip the check that A has no half-graph of size supplied_k.
  bool override_k_check = false;
  /// Caps for the stability and phi_A searches.
  StabilityOptions stability;
  /// Grid for the snapped exponential in the normal variant; 0 means |G|.
  std::size_t grid = 0;
  /// Shared cache for the stability and phi_A indices; its own options
  /// replace `stability` for those two searches. Not owned.
  StabilityMemo* memo = nullptr;
};

struct CosetClass {
  Element rep = 0;           // least element of the coset
  std::size_t in_a = 0;      // |C meet A|
  std::size_t size = 0;      // |H|
  bool dense = false;        // |C meet A| >= eta |H| / m
};

/// exp[eta^-k - 4 M log M] > 8 (k-1) eta^-3 with M = (30/eta)^(k-1), base 2,
/// compared in log2.
struct DaggerCheck {
  bool holds = false;
  double lhs_log2 = 0;  // log2 of the exponent's argument side, or -inf
  double rhs_log2 = 0;
};

struct BoundsLedger {
  PowerRational index_bound;  // (30/eta)^(k-1)
  bool index_bound_held = false;
  PowerRational error_bound;  // eta |H|
  PowerRational delta;        // tau^(k*)(eps)
  /// N_k = k^(2^(2^(2k))); log2 log2 N_k when k >= 2.
  std::string asymptotic_exponent;
  std::optional<double> asymptotic_exponent_log2log2;
  Rational eps_guard;  // 1 / (8 (k-1) 30^(4k-4))
  bool eps_exceeds_guard = false;
  // Normal variant only.
  std::optional<BigInt> m0_factorial;
  bool factorial_bound_held = true;
  std::optional<DaggerCheck> dagger;
};

struct RegularityReport {
  explicit RegularityReport(const GroupHandle& g) : a(g), H(g), D(g) {}

  std::string variant;  // "decompose" or "decompose-normal"
  GroupSubset a;
  Rational eps;
  std::size_t k_used = 0;
  bool k_exact = true;      // k is the exact stability index
  bool k_supplied = false;
  bool k_unverified = false;  // supplied with the check overridden
  std::size_t k_star_used = 0;
  std::string k_star_source;
  std::string sigma;
  EtaResult eta;
  GroupSubset H;
  std::size_t m = 0;
  std::optional<GroupSubset> H0;  // normal variant: Stab_eta before the core
  std::size_t m0 = 0;
  std::vector<CosetClass> cosets;
  GroupSubset D;
  std::size_t error_count = 0;
  bool dichotomy_eta_held = false;  // at level eta |H| / m
  bool dichotomy_eps_held = false;  // at level eps |H| / m
  BoundsLedger bounds;
};

/// The eta-search failed although k* was meant to bound phi_A; carries the
/// replayed half-graph when the replay succeeded.
class DecomposeFailure : public TheoremViolation {
 public:
  DecomposeFailure(const std::string& what, std::optional<LemmaWitness> w)
      : TheoremViolation(what), witness(std::move(w)) {}
  std::optional<LemmaWitness> witness;
};

/// The eta-search shared by the decompositions and the definability module.
struct EtaSelection {
  std::size_t k = 1;
  bool k_exact = true;
  bool k_supplied = false;
  bool k_unverified = false;
  KStarChoice k_star;
  SigmaMap sigma;
  EtaResult eta;
};

/// k, k*, sigma = x^(4k) (or the snapped 2^(-x^-k) when `normal`), and eta.
/// Throws DecomposeFailure when the search fails.
EtaSelection select_eta(const GroupSubset& a, const Rational& eps, const DecomposeOptions& opts, bool normal);

/// Subgroup H = Stab_eta(A) of polynomial index and D a union of left
/// cosets with |A xor D| < eps |H|. Throws TheoremViolation when a
/// conclusion fails and PreconditionError on bad input.
RegularityReport decompose(const GroupSubset& a, const Rational& eps, const DecomposeOptions& opts = {});

/// Normal variant: sigma = snapped 2^(-x^-k), H the normal core of Stab_eta(A).
RegularityReport decompose_normal(const GroupSubset& a, const Rational& eps, const DecomposeOptions& opts = {});

struct VerifyCheck {
  std::string name;
  bool ok = false;
  std::string detail;
};

struct VerifyLedger {
  std::vector<VerifyCheck> checks;
  bool ok() const;
  std::string failures() const;
};

/// Recomputes every claim of a report from the multiplication table alone.
VerifyLedger verify_report(const GroupSubset& a, const Rational& eps, const RegularityReport& r);

nlohmann::json to_json(const RegularityReport& r);
nlohmann::json to_json(const VerifyLedger& v);

}  // namespace stabreg

#endif  // STABREG_REGULARITY_HPP
