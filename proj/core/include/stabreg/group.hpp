#ifndef STABREG_GROUP_HPP
#define STABREG_GROUP_HPP

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/dynamic_bitset.hpp>

namespace stabreg {

/// Dense element index 0..n-1; 0 is always the identity.
using Element = std::uint32_t;

using Bits = boost::dynamic_bitset<std::uint64_t>;

struct GroupBuildOptions {
  std::size_t order_cap = 5040;
  /// Associativity is checked on every triple up to this order and on
  /// seeded random triples above it.
  std::size_t full_associativity_limit = 512;
  std::size_t sampled_triples = 1'000'000;
  std::uint64_t seed = 0x5eed;
};

/// A finite group given by its multiplication table. Immutable.
class FiniteGroup {
 public:
  /// Validates the Latin-square property, identity at 0, inverses, and
  /// associativity (exhaustive or sampled per options).
  static std::shared_ptr<const FiniteGroup> from_table(const std::vector<std::vector<Element>>& mul,
                                                       std::string name,
                                                       const GroupBuildOptions& opts = {},
                                                       std::vector<std::string> labels = {});

  std::size_t order() const { return n_; }
  Element mul(Element a, Element b) const { return table_[std::size_t(a) * n_ + b]; }
  Element inv(Element a) const { return inv_[a]; }
  static constexpr Element identity() { return 0; }

  const std::string& name() const { return name_; }
  std::string label(Element a) const;
  bool is_abelian() const;

  /// Row a of the table: b -> a*b.
  std::span<const std::uint16_t> row(Element a) const {
    return {table_.data() + std::size_t(a) * n_, n_};
  }

 private:
  FiniteGroup() = default;

  std::size_t n_ = 0;
  std::vector<std::uint16_t> table_;
  std::vector<std::uint16_t> inv_;
  std::string name_;
  std::vector<std::string> labels_;
};

using GroupHandle = std::shared_ptr<const FiniteGroup>;

/// Group DSL: `Z/n`, `D/n` (order 2n), `S/n`, `Q/8`, joined by `x`.
GroupHandle build_group(std::string_view spec, const GroupBuildOptions& opts = {});

/// Cayley JSON: { "order": n, "mul": [[...], ...] }. Relabels so the
/// identity is element 0 when the file anchors it elsewhere.
GroupHandle group_from_cayley_json(std::string_view json_text, const GroupBuildOptions& opts = {});
GroupHandle group_from_cayley_file(const std::string& path, const GroupBuildOptions& opts = {});

GroupHandle direct_product(const FiniteGroup& a, const FiniteGroup& b, const GroupBuildOptions& opts = {});

/// Isomorphic copy: element x of `g` becomes perm[x]. perm[0] must be 0.
GroupHandle relabel(const FiniteGroup& g, std::span<const Element> perm);

/// Full exhaustive associativity check.
bool is_associative(const FiniteGroup& g);

/// A subset of a finite group as a bit-vector over element indices.
class GroupSubset {
 public:
  explicit GroupSubset(GroupHandle group);
  GroupSubset(GroupHandle group, Bits bits);
  static GroupSubset from_elements(GroupHandle group, std::span<const Element> elements);
  static GroupSubset full(GroupHandle group);

  bool contains(Element x) const { return bits_.test(x); }
  void insert(Element x) { bits_.set(x); }
  void erase(Element x) { bits_.reset(x); }

  std::size_t size() const { return bits_.count(); }
  bool empty() const { return bits_.none(); }
  std::vector<Element> elements() const;

  const Bits& bits() const { return bits_; }
  const FiniteGroup& group() const { return *group_; }
  const GroupHandle& handle() const { return group_; }

  friend bool operator==(const GroupSubset& a, const GroupSubset& b) {
    return a.group_ == b.group_ && a.bits_ == b.bits_;
  }

 private:
  GroupHandle group_;
  Bits bits_;
};

std::string format_elements(const GroupSubset& s);

// Subset algebra. Binary operations throw GroupMismatch on different groups.
GroupSubset translate_left(Element g, const GroupSubset& a);   // gA
GroupSubset translate_right(const GroupSubset& a, Element g);  // Ag
GroupSubset complement(const GroupSubset& a);
GroupSubset intersect(const GroupSubset& a, const GroupSubset& b);
GroupSubset unite(const GroupSubset& a, const GroupSubset& b);
GroupSubset symdiff(const GroupSubset& a, const GroupSubset& b);
std::size_t symdiff_count(const GroupSubset& a, const GroupSubset& b);
GroupSubset inverse_of(const GroupSubset& a);                  // A^-1
GroupSubset product(const GroupSubset& a, const GroupSubset& b);  // AB

bool is_subgroup(const GroupSubset& s);

/// A verified subgroup with its index.
class Subgroup {
 public:
  /// Throws PreconditionError when `carrier` is not a subgroup.
  explicit Subgroup(GroupSubset carrier);

  static Subgroup trivial(GroupHandle g);
  static Subgroup whole(GroupHandle g);
  static Subgroup generated_by(GroupHandle g, std::span<const Element> gens);

  const GroupSubset& carrier() const { return carrier_; }
  std::size_t order() const { return carrier_.size(); }
  std::size_t index() const { return index_; }
  bool contains(Element x) const { return carrier_.contains(x); }

  friend bool operator==(const Subgroup& a, const Subgroup& b) { return a.carrier_ == b.carrier_; }

 private:
  GroupSubset carrier_;
  std::size_t index_;
};

struct CosetDecomposition {
  Subgroup subgroup;
  std::vector<Element> reps;          // least element of each left coset, ascending
  std::vector<std::size_t> coset_of;  // element -> position in reps

  std::size_t count() const { return reps.size(); }
  GroupSubset coset(std::size_t i) const;
};

CosetDecomposition left_cosets(const Subgroup& h);

bool is_normal(const Subgroup& h);

/// Largest normal subgroup contained in h: intersection of all conjugates.
Subgroup normal_core(const Subgroup& h);

/// True when `a` is gH for some subgroup H.
bool is_coset(const GroupSubset& a);

/// Every subgroup, by closure of joins of cyclic subgroups. Small groups only.
std::vector<Subgroup> all_subgroups(const GroupHandle& g);

/// DSL names of every cyclic, dihedral and quaternion group, S/3, and every
/// direct product of those factors with order <= max_order, ascending by
/// order. This is the family the exhaustive sweeps run over.
std::vector<std::string> dsl_groups_up_to(std::size_t max_order);

}  // namespace stabreg

#endif  // STABREG_GROUP_HPP
