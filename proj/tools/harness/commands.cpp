#include <algorithm>
#include <atomic>
#include <chrono>
#include <mutex>
#include <sstream>
#include <thread>

#include "harness.hpp"

namespace stabreg::cli {

namespace {

nlohmann::json vc_json(const VcCertificate& c) {
  return {{"dimension", c.dimension}, {"witness", c.witness}, {"lower_bound_only", c.lower_bound_only}};
}

nlohmann::json error_json(const std::exception& e) {
  nlohmann::json j{{"error", e.what()}, {"exit_code", exit_code_for(e)}};
  if (auto* f = dynamic_cast<const DecomposeFailure*>(&e); f && f->witness) j["lemma_witness"] = to_json(*f->witness);
  return j;
}

void record(CommandOutput& out, const std::vector<std::pair<std::string, bool>>& checks) {
  for (const auto& [name, ok] : checks) {
    out.checks[name] = ok;
    if (!ok) out.exit_code = kExitTheoremViolation;
  }
}

}  // namespace

nlohmann::json analyze_json(const GroupSubset& a, const Caps& caps) {
  nlohmann::json j;
  j["group"] = a.group().name();
  j["order"] = a.group().order();
  j["A"] = a.elements();
  j["size"] = a.size();
  j["is_coset"] = !a.empty() && is_coset(a);
  j["stability"] = to_json(stability_index(a, caps.stability));
  VcOptions vo;
  vo.ground_cap = caps.vc_ground_cap;
  j["vc_left"] = vc_json(vc_dimension(translates_system(a, Side::kLeft), vo));
  j["vc_right"] = vc_json(vc_dimension(translates_system(a, Side::kRight), vo));
  const auto p = stab_profile(a);
  // count -> multiplicity, the shape of the |Ax xor A| distribution
  nlohmann::json summary = nlohmann::json::object();
  for (const auto& v : p.values) summary[std::to_string(v.count)] = v.multiplicity;
  j["profile"] = {{"normalizer", p.normalizer}, {"counts", summary}, {"distinct_values", p.values.size()}};
  j["phi_stability"] = to_json(phi_stability(a, caps.stability));
  return j;
}

CommandOutput run_decompose(const GroupSubset& a, const Rational& eps, const DecomposeOptions& opts, bool normal,
                            bool verify) {
  CommandOutput out;
  const auto r = normal ? decompose_normal(a, eps, opts) : decompose(a, eps, opts);
  out.report = to_json(r);
  if (verify) {
    const auto v = verify_report(a, eps, r);
    out.report["verify"] = to_json(v);
    std::vector<std::pair<std::string, bool>> checks;
    for (const auto& c : v.checks) checks.emplace_back(c.name, c.ok);
    record(out, checks);
  }
  return out;
}

CommandOutput run_dnf(const GroupSubset& a, const Rational& eps, const DecomposeOptions& opts, bool normal,
                      std::uint64_t seed, bool verify) {
  CommandOutput out;
  DnfOptions dopts;
  dopts.seed = seed;
  dopts.stability = opts.stability;
  if (normal) {
    const auto nd = normal_stab_dnf(a, eps, opts, dopts);
    out.report = to_json(nd);
    out.report["text"] = pretty_print(nd.h0);
    const GroupSubset h0 = evaluate_dnf(nd.h0);
    const bool round_trip = h0 == stab_set(a, nd.h0.kappa);
    out.report["round_trip"] = round_trip;
    if (verify) {
      GroupSubset cut = GroupSubset::full(a.handle());
      const auto& G = a.group();
      for (Element g : nd.conjugators) {
        GroupSubset c(a.handle());
        for (Element x : h0.elements()) c.insert(G.mul(G.mul(g, x), G.inv(g)));
        cut = intersect(cut, c);
      }
      record(out, {{"round trip", round_trip},
                   {"conjugates cut out H", cut == nd.core},
                   {"H is normal", is_normal(Subgroup(nd.core))}});
    }
    return out;
  }
  const auto pair = eta_pair_for_dnf(a, eps, opts);
  const auto f = stab_dnf(a, pair.kappa, pair.lambda, dopts);
  out.report = to_json(f);
  out.report["text"] = pretty_print(f);
  const bool round_trip = evaluate_dnf(f) == stab_set(a, pair.kappa);
  out.report["round_trip"] = round_trip;
  if (verify)
    record(out, {{"round trip", round_trip},
                 {"clause count within bound", BigInt(static_cast<unsigned long>(f.clauses.size())) <= f.clause_bound},
                 {"length within bound", f.length_within_bound}});
  return out;
}

CommandOutput run_tripling(const RepGroupHandle& g, const ElementSet& a, const Rational& eps,
                           const TriplingOptions& opts, bool verify) {
  CommandOutput out;
  const auto r = decompose_tripling(g, a, eps, opts);
  out.report = to_json(r);
  if (verify) {
    const auto v = verify_tripling(*g, a, eps, r);
    out.report["verify"] = to_json(v);
    std::vector<std::pair<std::string, bool>> checks;
    for (const auto& c : v) checks.emplace_back(c.name, c.ok);
    record(out, checks);
  }
  return out;
}

CommandOutput run_task(const TaskSpec& t, const Rational& eps, const Caps& caps, bool verify) {
  try {
    if (t.mode == "tripling") {
      auto g = make_rep_group(t.group);
      TriplingOptions o;
      o.supplied_k = t.k;
      o.override_k_check = t.override_k;
      o.stability = caps.stability;
      o.caps = caps.tripling;
      o.seed = t.seed;
      return run_tripling(g, parse_element_set(*g, t.subset, caps.tripling), eps, o, verify);
    }
    auto g = load_group(t.group, caps);
    const auto a = parse_subset(g, t.subset);
    DecomposeOptions o;
    o.supplied_k = t.k;
    o.override_k_check = t.override_k;
    o.stability = caps.stability;
    if (t.mode == "analyze") return {analyze_json(a, caps), kExitOk, {}};
    if (t.mode == "decompose") return run_decompose(a, eps, o, false, verify);
    if (t.mode == "decompose-normal") return run_decompose(a, eps, o, true, verify);
    if (t.mode == "dnf") return run_dnf(a, eps, o, false, t.seed, verify);
    if (t.mode == "dnf-normal") return run_dnf(a, eps, o, true, t.seed, verify);
    throw ParseError("unknown mode: " + t.mode);
  } catch (const std::exception& e) {
    return {error_json(e), exit_code_for(e), {}};
  }
}

bool SweepResult::ok() const {
  return std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) {
    return r.exit_code == kExitOk &&
           std::all_of(r.checks.begin(), r.checks.end(), [](const auto& c) { return c.second; });
  });
}

SweepResult run_sweep(const std::vector<TaskSpec>& tasks, const Caps& caps, std::size_t jobs, bool verify) {
  std::vector<std::pair<const TaskSpec*, Rational>> work;
  for (const auto& t : tasks)
    for (const auto& e : t.eps) work.emplace_back(&t, e);
  SweepResult out;
  out.rows.resize(work.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i; (i = next.fetch_add(1)) < work.size();) {
      const auto& [t, eps] = work[i];
      const auto t0 = std::chrono::steady_clock::now();
      auto res = run_task(*t, eps, caps, verify);
      SweepRow& row = out.rows[i];
      row.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      row.key = t->key();
      row.mode = t->mode;
      row.eps = eps;
      row.exit_code = res.exit_code;
      row.checks = std::move(res.checks);
      nlohmann::json s;
      for (const char* f : {"error", "k_used", "k_star_used", "eta", "index", "error_count", "c", "tuple_source",
                            "round_trip", "stability"})
        if (res.report.contains(f)) s[f] = res.report[f];
      if (res.report.contains("H")) s["H_size"] = res.report["H"].size();
      if (res.report.contains("clauses")) s["clauses"] = res.report["clauses"].size();
      row.summary = std::move(s);
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(jobs, work.size()));
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  std::stable_sort(out.rows.begin(), out.rows.end(), [](const SweepRow& x, const SweepRow& y) {
    return x.key != y.key ? x.key < y.key : x.eps < y.eps;
  });
  return out;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

}  // namespace

std::string sweep_csv(const SweepResult& r, bool timing) {
  std::ostringstream os;
  os << "task,mode,epsilon,exit_code,checks_passed,checks_failed,failed_checks,summary";
  if (timing) os << ",millis";
  os << "\n";
  for (const auto& row : r.rows) {
    std::size_t pass = 0;
    std::string failed;
    for (const auto& [name, ok] : row.checks) {
      if (ok) {
        ++pass;
      } else {
        failed += (failed.empty() ? "" : ";") + name;
      }
    }
    os << csv_field(row.key) << "," << row.mode << "," << to_string(row.eps) << "," << row.exit_code << "," << pass
       << "," << row.checks.size() - pass << "," << csv_field(failed) << "," << csv_field(row.summary.dump());
    if (timing) os << "," << row.millis;
    os << "\n";
  }
  return os.str();
}

nlohmann::json sweep_json(const SweepResult& r, bool timing) {
  auto rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    nlohmann::json j{{"task", row.key},       {"mode", row.mode},     {"epsilon", to_string(row.eps)},
                     {"exit_code", row.exit_code}, {"checks", row.checks}, {"summary", row.summary}};
    if (timing) j["millis"] = row.millis;
    rows.push_back(std::move(j));
  }
  return {{"ok", r.ok()}, {"rows", rows}};
}

}  // namespace stabreg::cli
