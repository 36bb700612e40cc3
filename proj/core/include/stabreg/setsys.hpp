#ifndef STABREG_SETSYS_HPP
#define STABREG_SETSYS_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "stabreg/errors.hpp"
#include "stabreg/group.hpp"
#include "stabreg/rational.hpp"

namespace stabreg {

/// A family of subsets of {0..ground-1}. Duplicates are allowed.
struct SetSystem {
  std::size_t ground = 0;
  std::vector<Bits> sets;
  std::vector<std::string> labels;  // empty, or one per set

  /// Distinct sets, first occurrence kept.
  SetSystem deduplicated() const;
};

struct VcOptions {
  std::size_t ground_cap = 64;
  /// Stop after certifying this many levels; 0 means no depth cap.
  std::size_t depth_cap = 0;
};

struct VcCertificate {
  std::size_t dimension = 0;
  std::vector<std::size_t> witness;  // shattered, |witness| = dimension
  bool lower_bound_only = false;
  /// Shattered sets found per size; the first size with none proves the bound.
  std::vector<std::size_t> shattered_per_level;
  std::size_t candidates_tested = 0;
};

VcCertificate vc_dimension(const SetSystem& s, const VcOptions& opts = {});

/// True when every subset of `points` is the trace of some member set.
bool shatters(const SetSystem& s, const std::vector<std::size_t>& points);

enum class Side { kLeft, kRight };

/// {gA : g in G} or {Ag : g in G}, labeled by g.
SetSystem translates_system(const GroupSubset& a, Side side);

/// VC dimension of the left or right translates of A.
std::size_t vc_translates(const GroupSubset& a, Side side);

struct NetOptions {
  std::size_t retries = 32;
};

struct NetResult {
  std::vector<std::size_t> points;  // ascending, distinct
  std::size_t size_bound = 0;       // ceil(8 d / eps^2)
  std::size_t attempts = 0;
  bool greedy = false;
};

class NetFailure : public Error {
 public:
  NetFailure(const std::string& what, std::vector<std::size_t> best)
      : Error(what), best(std::move(best)) {}
  std::vector<std::size_t> best;
};

/// Points meeting every member of size > eps*ground, at most 8d/eps^2 of them.
NetResult epsilon_net(const SetSystem& s, const Rational& eps, std::size_t d, std::uint64_t seed,
                      const NetOptions& opts = {});

bool is_epsilon_net(const SetSystem& s, const Rational& eps, const std::vector<std::size_t>& points);

struct PackingResult {
  std::vector<std::size_t> indices;  // into the input system, ascending
  SetSystem packing;
  std::optional<Rational> bound;  // (30/eps)^d when d was supplied
};

/// Greedy maximal family with pairwise |U xor V| > eps*ground. When d is
/// given, throws TheoremViolation if the family exceeds (30/eps)^d.
PackingResult haussler_packing(const SetSystem& s, const Rational& eps,
                               std::optional<std::size_t> d = std::nullopt);

struct ApproxOptions {
  std::size_t constant = 64;
  std::size_t retries = 32;
};

struct ApproxResult {
  std::vector<std::size_t> tuple;  // repeats allowed
  Rational max_discrepancy;
  std::size_t length_cap = 0;
  std::size_t attempts = 0;
};

class ApproxFailure : public Error {
 public:
  ApproxFailure(const std::string& what, Rational best) : Error(what), best_discrepancy(std::move(best)) {}
  Rational best_discrepancy;
};

/// Largest allowed tuple length: ceil(C d eps^-2 log2(d/eps + 2)).
std::size_t approximation_length_cap(const Rational& eps, std::size_t d, std::size_t constant = 64);

/// A tuple whose averages are within eps of every member density.
ApproxResult epsilon_approximation(const SetSystem& s, const Rational& eps, std::size_t d,
                                   std::uint64_t seed, const ApproxOptions& opts = {});

/// max over member sets of |Av_tuple(U) - |U|/ground|, exact.
Rational approximation_discrepancy(const SetSystem& s, const std::vector<std::size_t>& tuple);

/// Greedy F with X inside AF; each step takes the g maximizing |Ag meet uncovered|.
std::vector<Element> find_right_cover(const GroupSubset& x, const GroupSubset& a);

std::string bits_to_hex(const Bits& b);
Bits bits_from_hex(const std::string& hex, std::size_t size);

nlohmann::json to_json(const SetSystem& s);
SetSystem set_system_from_json(const nlohmann::json& j);

}  // namespace stabreg

#endif  // STABREG_SETSYS_HPP
