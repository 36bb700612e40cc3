#ifndef STABREG_STABILITY_HPP
#define STABREG_STABILITY_HPP

#include <cstddef>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "stabreg/group.hpp"
#include "stabreg/rational.hpp"

namespace stabreg {

/// phi(a, b) for a < left_size, b < right_size, stored column-wise.
class BinaryRelation {
 public:
  BinaryRelation(std::size_t left_size, std::size_t right_size);

  std::size_t left_size() const { return left_; }
  std::size_t right_size() const { return cols_.size(); }

  bool holds(std::size_t a, std::size_t b) const { return cols_[b].test(a); }
  void set(std::size_t a, std::size_t b, bool v = true) { cols_[b].set(a, v); }

  /// {a : phi(a, b)}.
  const Bits& column(std::size_t b) const { return cols_[b]; }
  void set_column(std::size_t b, Bits col);

  bool empty() const;

 private:
  std::size_t left_;
  std::vector<Bits> cols_;
};

/// phi(a_i, b_j) iff i <= j, 0-based here.
struct HalfGraphWitness {
  std::vector<std::size_t> a;
  std::vector<std::size_t> b;
  std::size_t size() const { return a.size(); }
};

bool verify_half_graph(const BinaryRelation& rel, const HalfGraphWitness& w);

struct SearchOptions {
  std::size_t row_cap = 128;
  std::size_t cell_cap = std::size_t(1) << 21;  // left_size * right_size
  std::size_t node_cap = 50'000'000;
  std::size_t memo_cap = std::size_t(1) << 21;
  /// Columns one of which may be assumed to be b_1 (by a symmetry of the
  /// relation). Empty means no restriction.
  std::vector<std::size_t> first_columns;
};

enum class SearchStatus { kFound, kAbsent, kIndeterminate };

struct HalfGraphResult {
  SearchStatus status = SearchStatus::kAbsent;
  std::optional<HalfGraphWitness> witness;
  std::size_t nodes = 0;
};

/// Depth-first search for a half-graph of size k. Absence is exhaustive.
HalfGraphResult half_graph(const BinaryRelation& rel, std::size_t k, const SearchOptions& opts = {});

struct StabilityOptions {
  std::size_t k_cap = 7;
  SearchOptions search;
};

struct StabilityResult {
  /// Least k with no half-graph of size k when exact; otherwise an upper bound.
  std::size_t index = 1;
  bool exact = true;
  std::size_t lower = 1;
  std::size_t counting_bound = 0;
  std::optional<HalfGraphWitness> witness;  // a largest half-graph found
  std::string method;                       // "search", "search+count", "count"
};

/// Iterative deepening up to opts.k_cap; `upper` is a known valid bound on
/// the index and ends the search early.
StabilityResult stability_of_relation(const BinaryRelation& rel, std::size_t upper, const StabilityOptions& opts = {});

/// a x b -> [ab in A]; column b is A b^-1.
BinaryRelation translation_relation(const GroupSubset& a);

/// x ; (y, z) -> [x in Ay xor Az]; column y*n + z.
BinaryRelation phi_A_relation(const GroupSubset& a);

/// Index bound from counting: min(|A|, n - |A| + 1) + 1.
std::size_t stability_counting_bound(const GroupSubset& a);

/// Index bound for phi_A: 2 min(|A|, n - |A|) + 1, and at most n + 1.
std::size_t phi_counting_bound(const GroupSubset& a);

StabilityResult stability_index(const GroupSubset& a, const StabilityOptions& opts = {});
StabilityResult phi_stability(const GroupSubset& a, const StabilityOptions& opts = {});

/// True when A has a half-graph of size k (exact; uses no k cap).
bool has_half_graph(const GroupSubset& a, std::size_t k);

/// Upper bound on R(k, l): exact for the known small values, else C(k+l-2, k-1).
BigInt ramsey_upper(unsigned long k, unsigned long l);
bool ramsey_exact_known(unsigned long k, unsigned long l);

/// A nonnegative integer that may be too large to materialize.
struct BigBound {
  std::optional<BigInt> value;
  double log2 = 0;

  std::string to_string() const;
  /// min(value, cap) as a machine integer.
  std::size_t clamp(std::size_t cap) const;
};

struct KStarBound {
  BigBound sharp;  // Ramsey table / binomial
  BigBound crude;  // R(k, l) <= 2^(k+l-2)
};

/// R(R(k,k+1), R(k,k+1)) + 1.
KStarBound k_star_bound(unsigned long k);

/// Stability of G \ A, A meet B and A join B from the indices of A and B.
/// The union bound is R(ka+1, kb+1) + 1; R(ka, kb) + 1 already fails for
/// two cosets in S/3.
struct ClosureBounds {
  unsigned long complement;
  BigInt intersection;
  BigInt uni;
};

ClosureBounds closure_bounds(unsigned long ka, unsigned long kb);

/// The stability bound for phi_A fed to the eta-search.
struct KStarChoice {
  std::size_t value = 0;
  std::string source;  // "exact-phi", "ramsey", "counting"
  StabilityResult phi;
  KStarBound ramsey;
};

KStarChoice choose_k_star(const GroupSubset& a, std::size_t k, const StabilityOptions& opts = {});
/// Same choice from an already computed phi_A result.
KStarChoice choose_k_star(StabilityResult phi, std::size_t k);

nlohmann::json to_json(const HalfGraphWitness& w);
nlohmann::json to_json(const StabilityResult& r);

/// Thread-safe cache of stability and phi_A indices keyed by the orbit of A
/// under x -> gxh; both indices are invariant under it.
class StabilityMemo {
 public:
  explicit StabilityMemo(StabilityOptions opts = {}) : opts_(std::move(opts)) {}

  StabilityResult stability(const GroupSubset& a);
  StabilityResult phi(const GroupSubset& a);

  std::size_t size() const;

 private:
  struct Entry {
    std::optional<StabilityResult> stab;
    std::optional<StabilityResult> phi;
  };
  Bits canonical(const GroupSubset& a) const;

  StabilityOptions opts_;
  mutable std::mutex mu_;
  std::map<std::pair<const FiniteGroup*, Bits>, Entry> cache_;
  std::set<GroupHandle> keep_;  // pins the groups whose addresses key the cache
};

}  // namespace stabreg

#endif  // STABREG_STABILITY_HPP
