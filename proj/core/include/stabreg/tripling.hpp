#ifndef STABREG_TRIPLING_HPP
#define STABREG_TRIPLING_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "stabreg/errors.hpp"
#include "stabreg/group.hpp"
#include "stabreg/rational.hpp"
#include "stabreg/stability.hpp"
#include "stabreg/stabilizer.hpp"

namespace stabreg {

/// An element of a represented group: up to four integer coordinates, the
/// unused ones zero.
struct RepElement {
  std::array<std::int64_t, 4> v{};
  friend auto operator<=>(const RepElement&, const RepElement&) = default;
};

/// A group given by its operations. Elements are coordinate tuples.
class RepGroup {
 public:
  virtual ~RepGroup() = default;
  virtual std::string name() const = 0;
  virtual std::size_t arity() const = 0;
  virtual RepElement identity() const { return {}; }
  virtual RepElement mul(const RepElement& a, const RepElement& b) const = 0;
  virtual RepElement inv(const RepElement& a) const = 0;
  /// Throws ParseError when the tuple is not an element.
  virtual void validate(const RepElement& a) const = 0;
  /// The underlying finite group when this wraps one.
  virtual GroupHandle finite() const { return nullptr; }
};

using RepGroupHandle = std::shared_ptr<const RepGroup>;

/// "Z", "Z^d" (d <= 4), "Z^dx<DSL>" (d <= 3), "H3" (Heisenberg over the
/// integers, triples (a, b, c) with (a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab')),
/// "H3/n" (the same mod n), "finite:<DSL>".
RepGroupHandle make_rep_group(std::string_view spec);

std::string format_element(const RepGroup& g, const RepElement& x);
/// "(1,2,3)" or "5"; whitespace ignored.
RepElement parse_element(const RepGroup& g, std::string_view text);

/// A finite set of elements, kept sorted and duplicate-free.
class ElementSet {
 public:
  ElementSet() = default;
  explicit ElementSet(std::vector<RepElement> elements);

  std::size_t size() const { return el_.size(); }
  bool empty() const { return el_.empty(); }
  bool contains(const RepElement& x) const;
  const std::vector<RepElement>& elements() const { return el_; }
  /// Position of x, or size() when absent.
  std::size_t index_of(const RepElement& x) const;

  friend bool operator==(const ElementSet&, const ElementSet&) = default;

 private:
  std::vector<RepElement> el_;
};

struct TriplingCaps {
  /// Largest |A| * |B| a product set may evaluate.
  std::uint64_t product_evaluations = 10'000'000;
};

ElementSet product_set(const RepGroup& g, const ElementSet& a, const ElementSet& b, const TriplingCaps& caps = {});
ElementSet inverse_set(const RepGroup& g, const ElementSet& a);
ElementSet right_translate(const RepGroup& g, const ElementSet& a, const RepElement& x);  // Ax
ElementSet set_symdiff(const ElementSet& a, const ElementSet& b);
std::size_t symdiff_size(const ElementSet& a, const ElementSet& b);

/// |A A^-1 A| / |A|.
Rational alternation_ratio(const RepGroup& g, const ElementSet& a, const TriplingCaps& caps = {});

struct RuzsaCheck {
  std::size_t lhs = 0;      // |(A^-1 A)^3|
  Rational rhs;             // c^4 |A A^-1 A|
  Rational c;
  bool holds = false;
};

/// |(A^-1 A)^3| <= c^4 |A A^-1 A| with c the alternation ratio.
RuzsaCheck ruzsa_check(const RepGroup& g, const ElementSet& a, const TriplingCaps& caps = {});

/// Every ElementSet handed to ruzsa_check is counted here, with the number
/// of failures; tests read it to confirm the check never failed.
struct RuzsaTally {
  std::size_t checked = 0;
  std::size_t failed = 0;
};
RuzsaTally ruzsa_tally();

/// Values |Ag xor A| / |X|, X = A A^-1 A, over g in A^-1 A or A^-1 X with
/// Ag xor A inside X.
struct RelativeProfile {
  StabilizerProfile profile;  // normalizer |X|; samples index `domain`
  std::vector<RepElement> domain;
  std::vector<std::size_t> counts;  // |Ag xor A| per domain entry
  std::size_t x_size = 0;
};

RelativeProfile relative_values(const RepGroup& g, const ElementSet& a, const TriplingCaps& caps = {});

/// Stability index of x y in A, searched on rows A and columns A^-1 A. Every
/// half-graph can be moved there by (x, y) -> (x b, b^-1 y), so the search
/// is exact whenever it completes; otherwise the bound |A| + 1 is reported.
StabilityResult rep_stability_index(const RepGroup& g, const ElementSet& a, const StabilityOptions& opts = {});
bool rep_has_half_graph(const RepGroup& g, const ElementSet& a, std::size_t k, const StabilityOptions& opts = {});

struct TriplingOptions {
  std::optional<std::size_t> supplied_k;
  bool override_k_check = false;
  StabilityOptions stability;
  TriplingCaps caps;
  std::size_t associativity_samples = 2000;
  std::uint64_t seed = 1;
};

struct TriplingCoset {
  RepElement rep;          // in A
  std::size_t in_a = 0;    // |gH meet A|
  std::size_t out_a = 0;   // |gH \ A|
  bool dense = false;      // in D
};

struct TriplingLedger {
  bool h_subgroup = false;
  bool h_inside_AinvA = false;
  bool a_inside_CH = false;
  PowerRational cover_bound;  // (30 c / eta)^(k-1)
  bool cover_bound_held = false;
  PowerRational error_bound;  // eta |H|
  RuzsaCheck ruzsa;
  Rational eps_guard;  // 1 / (8 (k-1) (30c)^(4k-4))
  bool eps_exceeds_guard = false;
  std::size_t associativity_samples = 0;
  bool associativity_held = true;
  std::string asymptotic_exponent;
};

struct TriplingReport {
  RepGroupHandle group;
  ElementSet a;
  Rational eps;
  Rational c;
  std::size_t x_size = 0;
  std::size_t k_used = 1;
  bool k_exact = true;
  bool k_supplied = false;
  bool k_unverified = false;
  std::size_t k_star_used = 2;
  std::string k_star_source;
  std::string sigma;
  EtaResult eta;
  /// Thresholds: the search runs on |Ag xor A| <= eta |X|, H uses eta |A|.
  PowerRational threshold_x;
  PowerRational threshold_a;
  std::size_t relative_domain = 0;
  ElementSet H;
  std::vector<TriplingCoset> cosets;  // C, one per coset meeting A
  std::vector<RepElement> C;
  std::vector<RepElement> D;
  std::size_t error_count = 0;  // |A xor DH|
  bool dichotomy_eta_held = false;
  bool dichotomy_eps_held = false;
  TriplingLedger ledger;
};

/// Subgroup H inside A^-1 A, A covered by at most (30c/eta)^(k-1) cosets of
/// H with representatives in A, and D with |A xor DH| < eps |H|.
TriplingReport decompose_tripling(const RepGroupHandle& g, const ElementSet& a, const Rational& eps,
                                  const TriplingOptions& opts = {});

struct TriplingCheck {
  std::string name;
  bool ok = false;
  std::string detail;
};

/// Recomputes the ledger from the group operations alone.
std::vector<TriplingCheck> verify_tripling(const RepGroup& g, const ElementSet& a, const Rational& eps,
                                           const TriplingReport& r);
bool all_ok(const std::vector<TriplingCheck>& checks);

nlohmann::json element_json(const RepGroup& g, const RepElement& x);
nlohmann::json to_json(const RepGroup& g, const ElementSet& s);
nlohmann::json to_json(const TriplingReport& r);
nlohmann::json to_json(const std::vector<TriplingCheck>& checks);

/// Sets for the CLI: a JSON array of elements, "interval:lo,hi" on the first
/// coordinate, or "subgroup:g1;g2;..." generated by the listed elements
/// (finite closure, capped), optionally joined by "+" as unions.
ElementSet parse_element_set(const RepGroup& g, std::string_view spec, const TriplingCaps& caps = {});

}  // namespace stabreg

#endif  // STABREG_TRIPLING_HPP
