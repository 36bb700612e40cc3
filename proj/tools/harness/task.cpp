#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>

#include "harness.hpp"
#include "stabreg/random.hpp"

namespace stabreg::cli {

namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::uint64_t parse_u64(std::string_view s, const char* what) {
  const std::string t = trim(s);
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty())
    throw ParseError(std::string("expected a nonnegative integer for ") + what + ", got '" + t + "'");
  return v;
}

Element parse_element_index(const FiniteGroup& g, std::string_view s) {
  const auto v = parse_u64(s, "an element index");
  if (v >= g.order())
    throw ParseError("element " + std::to_string(v) + " out of range for " + g.name() + " of order " +
                     std::to_string(g.order()));
  return Element(v);
}

std::vector<Element> parse_index_list(const FiniteGroup& g, std::string_view s, char sep) {
  std::vector<Element> out;
  const std::string t = trim(s);
  if (t.empty()) return out;
  for (const auto& part : split(t, sep)) out.push_back(parse_element_index(g, part));
  return out;
}

GroupSubset coset_union(const GroupHandle& g, std::string_view gens, const std::vector<Element>& reps) {
  const auto h = Subgroup::generated_by(g, parse_index_list(*g, gens, ';'));
  GroupSubset out(g);
  for (Element r : reps) out = unite(out, translate_left(r, h.carrier()));
  return out;
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const TheoremViolation*>(&e)) return kExitTheoremViolation;
  if (dynamic_cast<const PreconditionError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
      dynamic_cast<const GroupMismatch*>(&e))
    return kExitPrecondition;
  if (dynamic_cast<const CapExceeded*>(&e)) return kExitCap;
  return kExitFailure;
}

void apply_caps(Caps& caps, std::string_view assignments) {
  const std::string t = trim(assignments);
  if (t.empty()) return;
  for (const auto& item : split(t, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ParseError("cap assignment without '=': " + item);
    const std::string name = trim(std::string_view(item).substr(0, eq));
    const std::uint64_t v = parse_u64(std::string_view(item).substr(eq + 1), name.c_str());
    if (name == "k_cap") caps.stability.k_cap = v;
    else if (name == "row_cap") caps.stability.search.row_cap = v;
    else if (name == "cell_cap") caps.stability.search.cell_cap = v;
    else if (name == "node_cap") caps.stability.search.node_cap = v;
    else if (name == "memo_cap") caps.stability.search.memo_cap = v;
    else if (name == "order_cap") caps.group.order_cap = v;
    else if (name == "product_evaluations") caps.tripling.product_evaluations = v;
    else if (name == "vc_ground_cap") caps.vc_ground_cap = v;
    else throw ParseError("unknown cap: " + name);
  }
}

Caps caps_from_env() {
  Caps c;
  if (const char* s = std::getenv("STABREG_CAPS")) apply_caps(c, s);
  return c;
}

GroupHandle load_group(std::string_view spec, const Caps& caps) {
  const std::string s = trim(spec);
  if (s.rfind("cayley:", 0) == 0) return group_from_cayley_file(s.substr(7), caps.group);
  if (s.size() > 5 && s.compare(s.size() - 5, 5, ".json") == 0) return group_from_cayley_file(s, caps.group);
  return build_group(s, caps.group);
}

GroupSubset parse_subset(const GroupHandle& g, std::string_view spec) {
  std::string s = trim(spec);
  const auto colon = s.find(':');
  const std::string kind = colon == std::string::npos ? "" : s.substr(0, colon);
  const std::string body = colon == std::string::npos ? "" : s.substr(colon + 1);

  if (kind == "coset") {
    const auto comma = body.find(',');
    if (comma == std::string::npos) throw ParseError("coset: expected 'coset:g,h1;h2'");
    return coset_union(g, std::string_view(body).substr(comma + 1),
                       {parse_element_index(*g, std::string_view(body).substr(0, comma))});
  }
  if (kind == "union-cosets") {
    const auto bar = body.find('|');
    if (bar == std::string::npos) throw ParseError("union-cosets: expected 'union-cosets:h1;h2|g1;g2'");
    return coset_union(g, std::string_view(body).substr(0, bar),
                       parse_index_list(*g, std::string_view(body).substr(bar + 1), ';'));
  }
  if (kind == "random") {
    const auto parts = split(body, ',');
    if (parts.size() != 2) throw ParseError("random: expected 'random:p,seed'");
    const Rational p = parse_rational(parts[0]);
    if (p < 0 || p > 1) throw ParseError("random: p must lie in [0, 1]");
    if (!p.get_den().fits_ulong_p()) throw ParseError("random: denominator of p too large");
    Rng rng(parse_u64(parts[1], "the seed"));
    GroupSubset out(g);
    for (Element x = 0; x < g->order(); ++x)
      if (rng.chance(p.get_num().get_ui(), p.get_den().get_ui())) out.insert(x);
    return out;
  }
  if (kind == "perturb") {
    // The base may contain commas; t and the seed are the last two fields.
    const auto last = body.rfind(',');
    const auto mid = last == std::string::npos || last == 0 ? std::string::npos : body.rfind(',', last - 1);
    if (mid == std::string::npos) throw ParseError("perturb: expected 'perturb:base,t,seed'");
    GroupSubset out = parse_subset(g, std::string_view(body).substr(0, mid));
    const auto t = parse_u64(std::string_view(body).substr(mid + 1, last - mid - 1), "t");
    if (t > g->order()) throw ParseError("perturb: t exceeds the group order");
    Rng rng(parse_u64(std::string_view(body).substr(last + 1), "the seed"));
    // Partial Fisher-Yates: the first t entries are distinct uniform picks.
    std::vector<Element> order(g->order());
    for (Element x = 0; x < g->order(); ++x) order[x] = x;
    for (std::size_t i = 0; i < t; ++i) {
      std::swap(order[i], order[i + rng.below(order.size() - i)]);
      if (out.contains(order[i])) out.erase(order[i]);
      else out.insert(order[i]);
    }
    return out;
  }
  if (!kind.empty()) throw ParseError("unknown subset kind: " + kind);

  if (!s.empty() && (s.front() == '{' || s.front() == '[')) {
    const char close = s.front() == '{' ? '}' : ']';
    if (s.back() != close) throw ParseError("unbalanced subset literal: " + s);
    s = s.substr(1, s.size() - 2);
  }
  return GroupSubset::from_elements(g, parse_index_list(*g, s, ','));
}

std::string TaskSpec::key() const {
  std::string k = mode + "|" + group + "|" + subset + "|seed=" + std::to_string(seed);
  if (this->k) k += "|k=" + std::to_string(*this->k) + (override_k ? "!" : "");
  return k;
}

TaskSpec task_from_json(const nlohmann::json& j) {
  TaskSpec t;
  if (!j.is_object()) throw ParseError("task must be a JSON object");
  t.group = j.at("group").get<std::string>();
  t.subset = j.value("subset", std::string());
  if (j.contains("epsilon")) {
    t.eps.clear();
    const auto& e = j["epsilon"];
    if (e.is_array()) {
      for (const auto& x : e) t.eps.push_back(parse_rational(x.get<std::string>()));
    } else {
      t.eps.push_back(parse_rational(e.get<std::string>()));
    }
  }
  t.mode = j.value("mode", t.mode);
  t.seed = j.value("seed", t.seed);
  if (j.contains("k")) t.k = j["k"].get<std::size_t>();
  t.override_k = j.value("override_k", false);
  return t;
}

nlohmann::json to_json(const TaskSpec& t) {
  nlohmann::json j{{"group", t.group}, {"subset", t.subset}, {"mode", t.mode}, {"seed", t.seed}};
  auto e = nlohmann::json::array();
  for (const auto& q : t.eps) e.push_back(to_string(q));
  j["epsilon"] = e;
  if (t.k) j["k"] = *t.k;
  if (t.override_k) j["override_k"] = true;
  return j;
}

}  // namespace stabreg::cli
