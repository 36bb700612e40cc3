#ifndef STABREG_HARNESS_HPP
#define STABREG_HARNESS_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "stabreg/definability.hpp"
#include "stabreg/regularity.hpp"
#include "stabreg/tripling.hpp"

namespace stabreg::cli {

/// Exit code for an exception escaping a command.
int exit_code_for(const std::exception& e);

struct Caps {
  GroupBuildOptions group;
  StabilityOptions stability;
  TriplingCaps tripling;
  std::size_t vc_ground_cap = 64;
};

/// "k_cap=7,node_cap=1000000,row_cap=128,cell_cap=...,memo_cap=...,
/// order_cap=5040,product_evaluations=10000000,vc_ground_cap=64".
void apply_caps(Caps& caps, std::string_view assignments);
/// Reads STABREG_CAPS when set.
Caps caps_from_env();

/// DSL spec, "cayley:<path>", or a path ending in .json.
GroupHandle load_group(std::string_view spec, const Caps& caps = {});

/// Subset grammar:
///   "0,4,8" "{0,4,8}" "[0,4,8]" "{}"   explicit element indices
///   "coset:g,h1;h2"                    g<h1,h2>
///   "union-cosets:h1;h2|g1;g2"         g1<h1,h2> u g2<h1,h2>
///   "random:p,seed"                    each element kept with probability p
///   "perturb:base,t,seed"              base with exactly t memberships flipped
GroupSubset parse_subset(const GroupHandle& g, std::string_view spec);

struct TaskSpec {
  std::string group;
  std::string subset;
  std::vector<Rational> eps{Rational(1, 4)};
  /// decompose, decompose-normal, dnf, dnf-normal, tripling, analyze
  std::string mode = "decompose";
  std::uint64_t seed = 1;
  std::optional<std::size_t> k;
  bool override_k = false;

  std::string key() const;
};

TaskSpec task_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TaskSpec& t);

struct CommandOutput {
  nlohmann::json report;
  int exit_code = kExitOk;
  /// Invariant name -> passed, for the checks the command ran.
  std::map<std::string, bool> checks;
};

nlohmann::json analyze_json(const GroupSubset& a, const Caps& caps);
CommandOutput run_decompose(const GroupSubset& a, const Rational& eps, const DecomposeOptions& opts, bool normal,
                            bool verify);
CommandOutput run_dnf(const GroupSubset& a, const Rational& eps, const DecomposeOptions& opts, bool normal,
                      std::uint64_t seed, bool verify);
CommandOutput run_tripling(const RepGroupHandle& g, const ElementSet& a, const Rational& eps,
                           const TriplingOptions& opts, bool verify);

/// Runs one (task, eps) pair; exceptions become exit codes.
CommandOutput run_task(const TaskSpec& t, const Rational& eps, const Caps& caps, bool verify);

struct SweepRow {
  std::string key;
  std::string mode;
  Rational eps;
  int exit_code = 0;
  std::map<std::string, bool> checks;
  nlohmann::json summary;
  double millis = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // ordered by (key, eps)
  bool ok() const;
};

SweepResult run_sweep(const std::vector<TaskSpec>& tasks, const Caps& caps, std::size_t jobs, bool verify);
/// Rows as CSV; `timing` adds the millisecond column.
std::string sweep_csv(const SweepResult& r, bool timing);
nlohmann::json sweep_json(const SweepResult& r, bool timing);

// Oracle suite ---------------------------------------------------------------

/// Invariant names, in evaluation order.
const std::vector<std::string>& suite_invariants();

struct SuiteScope {
  std::size_t max_order = 8;
  /// Groups above this order are sampled (`samples` subsets each) instead of
  /// enumerated; 0 means max_order.
  std::size_t exhaustive_order = 0;
  std::size_t samples = 256;
  /// Explicit group list; empty means every DSL group up to max_order.
  std::vector<std::string> groups;
  std::vector<Rational> eps{Rational(1, 2), Rational(1, 4), Rational(1, 8)};
  std::uint64_t seed = 1;
  /// Only these invariants; empty means all.
  std::set<std::string> invariants;
  /// Contract invariants run for stability index at most this.
  std::size_t index_cap = 4;
  /// Orders up to which the costlier invariants run.
  std::size_t brute_order = 8;
  std::size_t translation_order = 8;
  std::size_t closure_order = 6;
  /// Flip the outcome of this invariant or of a named clause inside one.
  std::string inject;
  std::size_t jobs = 1;
  /// Keep per-subset rows; summaries and failures are kept regardless.
  bool keep_rows = true;
};

struct InvariantTally {
  std::size_t checked = 0;
  std::size_t failed = 0;
};

struct SuiteRow {
  std::string group;
  std::size_t order = 0;
  std::string subset;  // hex bit mask
  std::size_t stability_index = 0;
  /// One char per entry of SuiteResult::invariants: 'P', 'F', or '-' when
  /// the invariant does not apply.
  std::string status;
};

struct Counterexample {
  std::string invariant;
  std::string clause;
  std::string group;
  std::vector<Element> original;
  std::vector<Element> minimized;
  std::string eps;  // empty when the invariant takes no eps
  std::string detail;
};

struct SuiteResult {
  SuiteScope scope;
  std::vector<std::string> invariants;  // evaluated, in order
  std::vector<SuiteRow> rows;
  std::map<std::string, InvariantTally> tallies;
  std::vector<Counterexample> failures;  // first failure per invariant, minimized
  bool ok() const { return failures.empty(); }
};

SuiteResult run_oracle_suite(const SuiteScope& scope, const Caps& caps = {});
std::string suite_csv(const SuiteResult& r);
nlohmann::json suite_json(const SuiteResult& r);
nlohmann::json to_json(const Counterexample& c);

/// Runs the command-line driver; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace stabreg::cli

#endif  // STABREG_HARNESS_HPP
