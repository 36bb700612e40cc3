#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "harness.hpp"

namespace stabreg::cli {

namespace {

namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PreconditionError("cannot write " + path.string());
  out << text;
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    write_file(out_path, text);
  }
}

// Config keys become "--key value" arguments unless the flag was given on
// the command line. Arrays repeat the flag; true booleans add a bare flag.
std::vector<std::string> config_args(const nlohmann::json& cfg, const std::vector<std::string>& argv) {
  std::vector<std::string> extra;
  auto given = [&](const std::string& flag) {
    for (const auto& a : argv)
      if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    return false;
  };
  auto scalar = [](const nlohmann::json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
  for (const auto& [key, value] : cfg.items()) {
    if (key == "command" || key == "tasks") continue;
    const std::string flag = "--" + key;
    if (given(flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) extra.push_back(flag);
    } else if (value.is_array()) {
      for (const auto& v : value) {
        extra.push_back(flag);
        extra.push_back(scalar(v));
      }
    } else {
      extra.push_back(flag);
      extra.push_back(scalar(value));
    }
  }
  return extra;
}

struct Common {
  std::string group;
  std::string set;
  std::string eps = "1/4";
  std::optional<std::size_t> k;
  bool override_k = false;
  bool verify = false;
  std::uint64_t seed = 1;
  std::string out;
};

void add_task_flags(CLI::App* c, Common& o, bool with_eps) {
  c->add_option("--group,-g", o.group, "group DSL spec, cayley:<file>, or a Cayley JSON path")->required();
  c->add_option("--set,-A", o.set, "subset spec")->required();
  if (!with_eps) return;
  c->add_option("--epsilon,-e", o.eps, "epsilon as p/q")->capture_default_str();
  c->add_option("--k", o.k, "use this stability bound instead of computing it");
  c->add_flag("--override-k", o.override_k, "skip the half-graph check of --k");
  c->add_flag("--verify", o.verify, "run the independent verifier; failures exit 2");
  c->add_option("--seed", o.seed, "seed for randomized steps")->capture_default_str();
}

int finish(const CommandOutput& r, const std::string& out) {
  emit(out, r.report.dump(2) + "\n");
  return r.exit_code;
}

}  // namespace

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);

  // Pre-scan for --config so its keys can fill unspecified flags.
  nlohmann::json cfg = nlohmann::json::object();
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    if (path.empty()) continue;
    try {
      cfg = nlohmann::json::parse(read_file(path));
    } catch (const std::exception& e) {
      std::cerr << "error: config " << path << ": " << e.what() << "\n";
      return kExitPrecondition;
    }
    if (!cfg.is_object()) {
      std::cerr << "error: config must be a JSON object\n";
      return kExitPrecondition;
    }
  }
  // Already loaded; keep it out of the subcommand's argument list.
  for (std::size_t i = 0; i < args.size();) {
    if (args[i] == "--config" && i + 1 < args.size()) args.erase(args.begin() + i, args.begin() + i + 2);
    else if (args[i].rfind("--config=", 0) == 0) args.erase(args.begin() + i);
    else ++i;
  }
  if (cfg.contains("command")) {
    static const std::set<std::string> commands{"analyze", "decompose", "decompose-normal", "dnf",
                                                "tripling", "oracle-suite", "sweep"};
    const bool has_command =
        std::any_of(args.begin(), args.end(), [](const std::string& a) { return commands.count(a) > 0; });
    if (!has_command) args.insert(args.begin(), cfg["command"].get<std::string>());
  }
  for (auto& a : config_args(cfg, args)) args.push_back(std::move(a));

  CLI::App app{"stabreg: stable sets in groups, regularity decompositions, and oracle suites"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, caps_text;
  app.add_option("--config", config_path, "JSON file whose keys mirror the long flags");
  app.add_option("--caps", caps_text, "cap overrides, e.g. k_cap=8,node_cap=1000000 (also STABREG_CAPS)");

  Common an, de, dn, nf, tr;
  auto* c_an = app.add_subcommand("analyze", "stability index, VC dimensions, stabilizer profile");
  add_task_flags(c_an, an, false);
  c_an->add_option("--out,-o", an.out, "output file (default stdout)");

  auto* c_de = app.add_subcommand("decompose", "coset decomposition with a stabilizer subgroup");
  add_task_flags(c_de, de, true);
  c_de->add_option("--out,-o", de.out, "output file (default stdout)");

  auto* c_dn = app.add_subcommand("decompose-normal", "coset decomposition with a normal subgroup");
  add_task_flags(c_dn, dn, true);
  c_dn->add_option("--out,-o", dn.out, "output file (default stdout)");

  std::string dnf_mode = "standard";
  bool dnf_text = false;
  auto* c_nf = app.add_subcommand("dnf", "Boolean formula over translates defining the stabilizer");
  add_task_flags(c_nf, nf, true);
  c_nf->add_option("--mode", dnf_mode, "standard or normal")->check(CLI::IsMember({"standard", "normal"}));
  c_nf->add_flag("--text", dnf_text, "print the formula instead of JSON");
  c_nf->add_option("--out,-o", nf.out, "output file (default stdout)");

  auto* c_tr = app.add_subcommand("tripling", "decomposition for sets of small alternation in represented groups");
  add_task_flags(c_tr, tr, true);
  c_tr->add_option("--out,-o", tr.out, "output file (default stdout)");

  SuiteScope scope;
  std::vector<std::string> suite_eps, suite_inv;
  std::string suite_out;
  bool no_rows = false;
  auto* c_os = app.add_subcommand("oracle-suite", "exhaustive invariant checks over small groups");
  c_os->add_option("--max-order", scope.max_order, "largest group order")->capture_default_str();
  c_os->add_option("--exhaustive-order", scope.exhaustive_order, "enumerate all subsets up to this order; 0 = max");
  c_os->add_option("--samples", scope.samples, "subsets sampled per larger group")->capture_default_str();
  c_os->add_option("--groups", scope.groups, "explicit group specs instead of all DSL groups");
  c_os->add_option("--epsilon,-e", suite_eps, "epsilon grid (default 1/2 1/4 1/8)");
  c_os->add_option("--seed", scope.seed, "seed")->capture_default_str();
  c_os->add_option("--invariant", suite_inv, "restrict to these invariants");
  c_os->add_option("--index-cap", scope.index_cap, "contract checks for stability index up to this")
      ->capture_default_str();
  c_os->add_option("--inject", scope.inject, "flip this invariant or clause (harness self-test)");
  c_os->add_option("--jobs,-j", scope.jobs, "worker threads")->capture_default_str();
  c_os->add_flag("--no-rows", no_rows, "omit per-subset rows from the CSV");
  c_os->add_option("--out,-o", suite_out, "output directory for suite.csv, suite.json, counterexample.json");

  std::string tasks_path, sweep_out, sweep_mode;
  std::size_t sweep_jobs = 1;
  bool sweep_verify = false, sweep_timing = false;
  auto* c_sw = app.add_subcommand("sweep", "run a task list, one row per task and epsilon");
  c_sw->add_option("--tasks", tasks_path, "JSON array of tasks (or 'tasks' in --config)");
  c_sw->add_option("--mode", sweep_mode, "mode for tasks that name none");
  c_sw->add_option("--jobs,-j", sweep_jobs, "worker threads")->capture_default_str();
  c_sw->add_flag("--verify", sweep_verify, "verify every report");
  c_sw->add_flag("--timing", sweep_timing, "add wall-clock milliseconds per row");
  c_sw->add_option("--out,-o", sweep_out, "output directory for sweep.csv and sweep.json");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitPrecondition;
  }

  try {
    Caps caps = caps_from_env();
    apply_caps(caps, caps_text);

    auto task_of = [](const Common& o, const std::string& mode) {
      TaskSpec t;
      t.group = o.group;
      t.subset = o.set;
      t.eps = {parse_rational(o.eps)};
      t.mode = mode;
      t.seed = o.seed;
      t.k = o.k;
      t.override_k = o.override_k;
      return t;
    };
    auto single = [&](const Common& o, const std::string& mode) {
      const TaskSpec t = task_of(o, mode);
      return finish(run_task(t, t.eps.front(), caps, o.verify), o.out);
    };

    if (*c_an) {
      auto g = load_group(an.group, caps);
      emit(an.out, analyze_json(parse_subset(g, an.set), caps).dump(2) + "\n");
      return kExitOk;
    }
    if (*c_de) return single(de, "decompose");
    if (*c_dn) return single(dn, "decompose-normal");
    if (*c_tr) return single(tr, "tripling");
    if (*c_nf) {
      const TaskSpec t = task_of(nf, dnf_mode == "normal" ? "dnf-normal" : "dnf");
      auto r = run_task(t, t.eps.front(), caps, nf.verify);
      if (dnf_text && r.report.contains("text")) {
        emit(nf.out, r.report["text"].get<std::string>());
        return r.exit_code;
      }
      return finish(r, nf.out);
    }
    if (*c_os) {
      if (!suite_eps.empty()) {
        scope.eps.clear();
        for (const auto& e : suite_eps) scope.eps.push_back(parse_rational(e));
      }
      scope.invariants.insert(suite_inv.begin(), suite_inv.end());
      const auto res = run_oracle_suite(scope, caps);
      const auto summary = suite_json(res);
      if (!suite_out.empty()) {
        const fs::path dir(suite_out);
        SuiteResult shown = res;
        if (no_rows) shown.rows.clear();
        write_file(dir / "suite.csv", suite_csv(shown));
        write_file(dir / "suite.json", summary.dump(2) + "\n");
        if (!res.ok()) {
          auto cx = nlohmann::json::array();
          for (const auto& c : res.failures) cx.push_back(to_json(c));
          write_file(dir / "counterexample.json", cx.dump(2) + "\n");
        }
      }
      std::cout << summary.dump(2) << "\n";
      return res.ok() ? kExitOk : kExitTheoremViolation;
    }
    if (*c_sw) {
      nlohmann::json list;
      if (!tasks_path.empty()) list = nlohmann::json::parse(read_file(tasks_path));
      else if (cfg.contains("tasks")) list = cfg["tasks"];
      else throw ParseError("sweep: give --tasks or a config with 'tasks'");
      if (list.is_object() && list.contains("tasks")) list = list["tasks"];
      if (!list.is_array()) throw ParseError("sweep: tasks must be a JSON array");
      std::vector<TaskSpec> tasks;
      for (const auto& j : list) {
        auto t = task_from_json(j);
        if (!j.contains("mode") && !sweep_mode.empty()) t.mode = sweep_mode;
        tasks.push_back(std::move(t));
      }
      const auto res = run_sweep(tasks, caps, sweep_jobs, sweep_verify);
      const auto js = sweep_json(res, sweep_timing);
      if (!sweep_out.empty()) {
        write_file(fs::path(sweep_out) / "sweep.csv", sweep_csv(res, sweep_timing));
        write_file(fs::path(sweep_out) / "sweep.json", js.dump(2) + "\n");
      }
      std::cout << js.dump(2) << "\n";
      return res.ok() ? kExitOk : kExitTheoremViolation;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::cout << nlohmann::json{{"error", e.what()}, {"exit_code", exit_code_for(e)}}.dump(2) << "\n";
    return exit_code_for(e);
  }
  return kExitFailure;
}

}  // namespace stabreg::cli
