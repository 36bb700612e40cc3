#ifndef STABREG_STABILIZER_HPP
#define STABREG_STABILIZER_HPP

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "stabreg/errors.hpp"
#include "stabreg/group.hpp"
#include "stabreg/rational.hpp"
#include "stabreg/stability.hpp"

namespace stabreg {

struct ProfileValue {
  std::size_t count = 0;  // |Ax xor A|
  std::size_t multiplicity = 0;
  Element sample = 0;  // least x with this count
};

/// Exact values |Ax xor A| / normalizer over a domain of x.
struct StabilizerProfile {
  std::string domain_label;
  std::size_t normalizer = 1;
  std::vector<ProfileValue> values;     // ascending count
  std::vector<std::size_t> count_of;    // per element; finite-group profiles only

  /// Distinct values count / normalizer, ascending.
  std::vector<Rational> distinct_values() const;
};

StabilizerProfile stab_profile(const GroupSubset& a);

/// {x : |Ax xor A| <= eps |G|}.
GroupSubset stab_set(const GroupSubset& a, const Rational& eps);
GroupSubset stab_set(const GroupSubset& a, const PowerRational& eps);
GroupSubset stab_set(const StabilizerProfile& p, const GroupHandle& g, const PowerRational& eps);

/// An increasing map (0,1) -> (0,1) with exact evaluation.
class SigmaMap {
 public:
  enum class Kind { kPower, kScaledPower, kSnappedExp };

  /// x^p.
  static SigmaMap power(unsigned long p);
  /// x^p / c, c >= 1.
  static SigmaMap scaled_power(unsigned long p, const Rational& c);
  /// Largest j/(2 grid) strictly below 2^(-x^-k), and at least 1/(2 grid).
  /// Values on the grid j/grid cannot tell it apart from 2^(-x^-k) itself.
  static SigmaMap snapped_exp(unsigned long k, std::size_t grid);

  PowerRational operator()(const PowerRational& x) const;

  Kind kind() const { return kind_; }
  unsigned long exponent() const { return p_; }
  std::string describe() const;

 private:
  Kind kind_ = Kind::kPower;
  unsigned long p_ = 1;
  Rational c_ = 1;
  std::size_t grid_ = 1;
};

struct EtaSearchConfig {
  SigmaMap sigma = SigmaMap::power(2);
  std::size_t k = 2;  // stability bound for the relation, chain length
  Rational r = 1;     // covering ratio |X^-1 X| / |X|
  Rational eps = Rational(1, 4);
};

/// tau(x) = x sigma(x/2)^2 / (8 (k-1) r^2).
PowerRational tau(const EtaSearchConfig& cfg, const PowerRational& x);

struct SigmaChain {
  std::vector<PowerRational> candidates;  // eps, tau(eps)/2, ..., tau^(k-1)(eps)/2
  PowerRational delta;                    // tau^k(eps)
};

SigmaChain sigma_chain(const EtaSearchConfig& cfg);

struct EtaResult {
  PowerRational eta;
  PowerRational sigma_eta;
  std::size_t candidate_index = 0;
  SigmaChain chain;
  /// Candidates that failed, with the least value in their gap.
  std::vector<std::pair<std::size_t, Rational>> blocked;
};

/// No candidate had an empty gap: the relation is not k-stable.
class EtaSearchFailure : public TheoremViolation {
 public:
  EtaSearchFailure(const std::string& what, SigmaChain chain, std::vector<std::pair<std::size_t, Rational>> blocked)
      : TheoremViolation(what), chain(std::move(chain)), blocked(std::move(blocked)) {}
  SigmaChain chain;
  std::vector<std::pair<std::size_t, Rational>> blocked;
};

/// First chain candidate eta with no value in (sigma(eta), eta].
EtaResult find_eta(std::vector<Rational> values, const EtaSearchConfig& cfg);

/// find_eta over the profile values of A; cfg.r must be 1.
EtaResult eta_for_stab(const GroupSubset& a, const EtaSearchConfig& cfg);

struct LemmaWitness {
  /// Half-graph for phi_A with columns indexed y*n + z.
  HalfGraphWitness witness;
  std::vector<Element> blocking;    // x with A xor Ax blocking each stage
  std::vector<Element> translates;  // g chosen by averaging, stage 2 onward
  /// Whether every stage met the density bound the argument predicts.
  bool density_bounds_held = true;
};

/// Replays the proof of the gap lemma on phi_A when the eta-search fails,
/// producing a half-graph of size cfg.k. Throws PreconditionError when the
/// search succeeds.
LemmaWitness lemma_witness(const GroupSubset& a, const EtaSearchConfig& cfg);

nlohmann::json to_json(const StabilizerProfile& p);
nlohmann::json to_json(const SigmaChain& c);
nlohmann::json to_json(const EtaResult& r);
nlohmann::json to_json(const LemmaWitness& w);

}  // namespace stabreg

#endif  // STABREG_STABILIZER_HPP
