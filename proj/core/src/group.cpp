#include "stabreg/group.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "stabreg/errors.hpp"

namespace stabreg {

namespace {

using Table = std::vector<std::vector<Element>>;

void require_same_group(const GroupSubset& a, const GroupSubset& b) {
  if (a.handle() != b.handle() && &a.group() != &b.group())
    throw GroupMismatch("subsets belong to different groups: " + a.group().name() + " vs " +
                        b.group().name());
}

std::size_t parse_size(std::string_view digits, std::string_view whole) {
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](unsigned char c) { return std::isdigit(c); }))
    throw ParseError("group spec: expected a positive integer in '" + std::string(whole) + "'");
  if (digits.size() > 9) throw CapExceeded("group spec: order too large in '" + std::string(whole) + "'");
  return std::stoul(std::string(digits));
}

Table cyclic_table(std::size_t n) {
  Table t(n, std::vector<Element>(n));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) t[a][b] = Element((a + b) % n);
  return t;
}

// r^i s^f is stored at i + n*f.
Table dihedral_table(std::size_t n, std::vector<std::string>& labels) {
  const std::size_t order = 2 * n;
  Table t(order, std::vector<Element>(order));
  for (std::size_t x = 0; x < order; ++x) {
    std::size_t i = x % n, f = x / n;
    for (std::size_t y = 0; y < order; ++y) {
      std::size_t j = y % n, g = y / n;
      std::size_t k = f ? (i + n - j) % n : (i + j) % n;
      t[x][y] = Element(k + n * (f ^ g));
    }
    std::string l = i == 0 ? std::string("e") : (i == 1 ? std::string("r") : "r^" + std::to_string(i));
    if (f) l = (i == 0 ? std::string("s") : l + "s");
    labels.push_back(l);
  }
  return t;
}

std::size_t lehmer_rank(const std::vector<int>& p) {
  const std::size_t m = p.size();
  std::size_t rank = 0;
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t smaller = 0;
    for (std::size_t j = i + 1; j < m; ++j) smaller += p[j] < p[i];
    rank = rank * (m - i) + smaller;
  }
  return rank;
}

// Permutations in lexicographic order (identity first); a*b applies b first.
Table symmetric_table(std::size_t m, std::size_t cap, std::vector<std::string>& labels) {
  std::size_t order = 1;
  for (std::size_t i = 2; i <= m; ++i) {
    order *= i;
    if (order > cap) throw CapExceeded("S/" + std::to_string(m) + " exceeds order cap " + std::to_string(cap));
  }
  std::vector<std::vector<int>> perms;
  std::vector<int> p(m);
  std::iota(p.begin(), p.end(), 0);
  do {
    perms.push_back(p);
    std::string l = "[";
    for (std::size_t i = 0; i < m; ++i) l += (i ? " " : "") + std::to_string(p[i]);
    labels.push_back(l + "]");
  } while (std::next_permutation(p.begin(), p.end()));
  Table t(order, std::vector<Element>(order));
  std::vector<int> c(m);
  for (std::size_t a = 0; a < order; ++a)
    for (std::size_t b = 0; b < order; ++b) {
      for (std::size_t x = 0; x < m; ++x) c[x] = perms[a][perms[b][x]];
      t[a][b] = Element(lehmer_rank(c));
    }
  return t;
}

// 1,-1,i,-i,j,-j,k,-k: unit u in {1,i,j,k} with sign bit s stored at 2u+s.
Table quaternion_table(std::vector<std::string>& labels) {
  // unit product table: (u*v) = sign * unit
  static const int unit[4][4] = {{0, 1, 2, 3}, {1, 0, 3, 2}, {2, 3, 0, 1}, {3, 2, 1, 0}};
  static const int neg[4][4] = {{0, 0, 0, 0}, {0, 1, 0, 1}, {0, 1, 1, 0}, {0, 0, 1, 1}};
  static const char* names[4] = {"1", "i", "j", "k"};
  Table t(8, std::vector<Element>(8));
  for (int x = 0; x < 8; ++x) {
    for (int y = 0; y < 8; ++y) {
      int u = x / 2, v = y / 2;
      int s = (x % 2) ^ (y % 2) ^ neg[u][v];
      t[x][y] = Element(2 * unit[u][v] + s);
    }
    labels.push_back(std::string(x % 2 ? "-" : "") + names[x / 2]);
  }
  return t;
}

GroupHandle build_factor(std::string_view tok, const GroupBuildOptions& opts) {
  auto slash = tok.find('/');
  if (slash != 1 || tok.size() < 3) throw ParseError("group spec: malformed factor '" + std::string(tok) + "'");
  char kind = tok[0];
  std::size_t n = parse_size(tok.substr(2), tok);
  if (n == 0) throw ParseError("group spec: zero order in '" + std::string(tok) + "'");
  std::vector<std::string> labels;
  std::string name(tok);
  switch (kind) {
    case 'Z':
      if (n > opts.order_cap) break;
      return FiniteGroup::from_table(cyclic_table(n), name, opts);
    case 'D':
      if (2 * n > opts.order_cap) break;
      return FiniteGroup::from_table(dihedral_table(n, labels), name, opts, std::move(labels));
    case 'S': {
      auto t = symmetric_table(n, opts.order_cap, labels);
      return FiniteGroup::from_table(t, name, opts, std::move(labels));
    }
    case 'Q':
      if (n != 8) throw ParseError("group spec: only Q/8 is supported");
      return FiniteGroup::from_table(quaternion_table(labels), name, opts, std::move(labels));
    default:
      throw ParseError("group spec: unknown family '" + std::string(1, kind) + "'");
  }
  throw CapExceeded("group '" + name + "' exceeds order cap " + std::to_string(opts.order_cap));
}

}  // namespace

std::shared_ptr<const FiniteGroup> FiniteGroup::from_table(const std::vector<std::vector<Element>>& mul,
                                                           std::string name, const GroupBuildOptions& opts,
                                                           std::vector<std::string> labels) {
  const std::size_t n = mul.size();
  if (n == 0) throw PreconditionError("group table is empty");
  if (n > opts.order_cap) throw CapExceeded("group order " + std::to_string(n) + " exceeds cap");
  if (n > 65535) throw CapExceeded("group order exceeds 65535");
  std::shared_ptr<FiniteGroup> g(new FiniteGroup());
  g->n_ = n;
  g->name_ = std::move(name);
  g->table_.resize(n * n);
  std::vector<char> seen(n);
  for (std::size_t a = 0; a < n; ++a) {
    if (mul[a].size() != n) throw PreconditionError("group table row " + std::to_string(a) + " has wrong length");
    std::fill(seen.begin(), seen.end(), 0);
    for (std::size_t b = 0; b < n; ++b) {
      Element v = mul[a][b];
      if (v >= n || seen[v]) throw PreconditionError("group table is not a Latin square (row " + std::to_string(a) + ")");
      seen[v] = 1;
      g->table_[a * n + b] = std::uint16_t(v);
    }
  }
  for (std::size_t b = 0; b < n; ++b) {
    std::fill(seen.begin(), seen.end(), 0);
    for (std::size_t a = 0; a < n; ++a) {
      Element v = mul[a][b];
      if (seen[v]) throw PreconditionError("group table is not a Latin square (column " + std::to_string(b) + ")");
      seen[v] = 1;
    }
  }
  for (std::size_t x = 0; x < n; ++x)
    if (mul[0][x] != x || mul[x][0] != x) throw PreconditionError("element 0 is not the identity");
  g->inv_.resize(n);
  for (std::size_t x = 0; x < n; ++x) {
    auto r = g->row(Element(x));
    auto it = std::find(r.begin(), r.end(), std::uint16_t(0));
    std::size_t y = std::size_t(it - r.begin());
    if (mul[y][x] != 0) throw PreconditionError("element " + std::to_string(x) + " has no two-sided inverse");
    g->inv_[x] = std::uint16_t(y);
  }
  if (n <= opts.full_associativity_limit) {
    if (!is_associative(*g)) throw PreconditionError("group table is not associative");
  } else {
    std::mt19937_64 rng(opts.seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t t = 0; t < opts.sampled_triples; ++t) {
      Element x = Element(pick(rng)), y = Element(pick(rng)), z = Element(pick(rng));
      if (g->mul(g->mul(x, y), z) != g->mul(x, g->mul(y, z)))
        throw PreconditionError("group table is not associative (sampled)");
    }
  }
  if (!labels.empty() && labels.size() != n) throw PreconditionError("label count differs from group order");
  g->labels_ = std::move(labels);
  return g;
}

std::string FiniteGroup::label(Element a) const {
  if (!labels_.empty()) return labels_[a];
  return std::to_string(a);
}

bool FiniteGroup::is_abelian() const {
  for (std::size_t a = 0; a < n_; ++a)
    for (std::size_t b = a + 1; b < n_; ++b)
      if (mul(Element(a), Element(b)) != mul(Element(b), Element(a))) return false;
  return true;
}

bool is_associative(const FiniteGroup& g) {
  const std::size_t n = g.order();
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) {
      auto xy = g.mul(Element(x), Element(y));
      auto rxy = g.row(xy);
      auto ry = g.row(Element(y));
      for (std::size_t z = 0; z < n; ++z)
        if (rxy[z] != g.mul(Element(x), ry[z])) return false;
    }
  return true;
}

GroupHandle build_group(std::string_view spec, const GroupBuildOptions& opts) {
  std::string s;
  for (char c : spec)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  if (s.empty()) throw ParseError("empty group spec");
  std::vector<std::string> toks;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find('x', start);
    toks.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  std::size_t total = 1;
  for (const auto& t : toks) {
    if (t.empty()) throw ParseError("group spec: empty factor in '" + s + "'");
    auto slash = t.find('/');
    std::size_t n = slash == std::string::npos ? 0 : parse_size(std::string_view(t).substr(slash + 1), t);
    std::size_t factor = t[0] == 'D' ? 2 * n : n;
    if (t[0] == 'S') {
      factor = 1;
      for (std::size_t i = 2; i <= n && factor <= opts.order_cap; ++i) factor *= i;
    }
    total *= std::max<std::size_t>(factor, 1);
    if (total > opts.order_cap)
      throw CapExceeded("group '" + s + "' exceeds order cap " + std::to_string(opts.order_cap));
  }
  GroupHandle g = build_factor(toks[0], opts);
  for (std::size_t i = 1; i < toks.size(); ++i) g = direct_product(*g, *build_factor(toks[i], opts), opts);
  if (toks.size() > 1) {
    // direct_product names the result "AxB"; keep the caller's canonical spelling.
    std::vector<std::string> labels;
    for (Element x = 0; x < g->order(); ++x) labels.push_back(g->label(x));
    std::vector<std::vector<Element>> t(g->order(), std::vector<Element>(g->order()));
    for (Element a = 0; a < g->order(); ++a)
      for (Element b = 0; b < g->order(); ++b) t[a][b] = g->mul(a, b);
    GroupBuildOptions quick = opts;
    quick.full_associativity_limit = 0;
    quick.sampled_triples = 0;
    g = FiniteGroup::from_table(t, s, quick, std::move(labels));
  }
  return g;
}

GroupHandle direct_product(const FiniteGroup& a, const FiniteGroup& b, const GroupBuildOptions& opts) {
  const std::size_t na = a.order(), nb = b.order(), n = na * nb;
  if (n > opts.order_cap) throw CapExceeded("direct product exceeds order cap " + std::to_string(opts.order_cap));
  Table t(n, std::vector<Element>(n));
  std::vector<std::string> labels(n);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y)
      t[x][y] = Element(a.mul(Element(x / nb), Element(y / nb)) * nb + b.mul(Element(x % nb), Element(y % nb)));
    labels[x] = "(" + a.label(Element(x / nb)) + "," + b.label(Element(x % nb)) + ")";
  }
  // A product of verified groups is a group; skip the cubic re-check.
  GroupBuildOptions quick = opts;
  quick.full_associativity_limit = 0;
  quick.sampled_triples = 0;
  return FiniteGroup::from_table(t, a.name() + "x" + b.name(), quick, std::move(labels));
}

GroupHandle relabel(const FiniteGroup& g, std::span<const Element> perm) {
  const std::size_t n = g.order();
  if (perm.size() != n) throw PreconditionError("relabel: permutation has wrong length");
  std::vector<char> seen(n);
  for (Element p : perm) {
    if (p >= n || seen[p]) throw PreconditionError("relabel: not a permutation");
    seen[p] = 1;
  }
  if (perm[0] != 0) throw PreconditionError("relabel: identity must stay at 0");
  Table t(n, std::vector<Element>(n));
  std::vector<std::string> labels(n);
  for (Element a = 0; a < n; ++a) {
    for (Element b = 0; b < n; ++b) t[perm[a]][perm[b]] = perm[g.mul(a, b)];
    labels[perm[a]] = g.label(a);
  }
  GroupBuildOptions quick;
  quick.order_cap = std::max<std::size_t>(n, quick.order_cap);
  quick.full_associativity_limit = 0;
  quick.sampled_triples = 0;
  return FiniteGroup::from_table(t, g.name(), quick, std::move(labels));
}

GroupHandle group_from_cayley_json(std::string_view json_text, const GroupBuildOptions& opts) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("cayley json: ") + e.what());
  }
  if (!j.is_object() || !j.contains("mul") || !j["mul"].is_array())
    throw ParseError("cayley json: expected an object with a 'mul' array");
  Table t;
  try {
    t = j["mul"].get<Table>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("cayley json: ") + e.what());
  }
  const std::size_t n = t.size();
  if (j.contains("order") && j["order"].get<std::size_t>() != n)
    throw ParseError("cayley json: 'order' disagrees with table size");
  if (n == 0) throw ParseError("cayley json: empty table");
  if (n > opts.order_cap) throw CapExceeded("cayley table exceeds order cap " + std::to_string(opts.order_cap));
  for (const auto& r : t)
    if (r.size() != n) throw PreconditionError("cayley json: table is not square");
  std::string name = j.value("name", std::string("cayley/") + std::to_string(n));
  std::optional<Element> e;
  for (Element x = 0; x < n && !e; ++x) {
    bool ok = true;
    for (Element y = 0; y < n && ok; ++y) ok = t[x][y] == y && t[y][x] == y;
    if (ok) e = x;
  }
  if (!e) throw PreconditionError("cayley json: table has no identity element");
  if (*e != 0) {
    std::vector<Element> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::swap(perm[0], perm[*e]);
    Table u(n, std::vector<Element>(n));
    for (Element a = 0; a < n; ++a)
      for (Element b = 0; b < n; ++b) {
        if (t[a][b] >= n) throw PreconditionError("cayley json: entry out of range");
        u[perm[a]][perm[b]] = perm[t[a][b]];
      }
    std::vector<std::string> labels(n);
    for (Element a = 0; a < n; ++a) labels[perm[a]] = std::to_string(a);
    return FiniteGroup::from_table(u, name, opts, std::move(labels));
  }
  return FiniteGroup::from_table(t, name, opts);
}

GroupHandle group_from_cayley_file(const std::string& path, const GroupBuildOptions& opts) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open cayley file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return group_from_cayley_json(ss.str(), opts);
}

GroupSubset::GroupSubset(GroupHandle group) : group_(std::move(group)) {
  if (!group_) throw PreconditionError("null group");
  bits_.resize(group_->order());
}

GroupSubset::GroupSubset(GroupHandle group, Bits bits) : group_(std::move(group)), bits_(std::move(bits)) {
  if (!group_) throw PreconditionError("null group");
  if (bits_.size() != group_->order()) throw PreconditionError("bit-vector length differs from group order");
}

GroupSubset GroupSubset::from_elements(GroupHandle group, std::span<const Element> elements) {
  GroupSubset s(std::move(group));
  for (Element x : elements) {
    if (x >= s.group().order())
      throw PreconditionError("element " + std::to_string(x) + " out of range for " + s.group().name());
    s.insert(x);
  }
  return s;
}

GroupSubset GroupSubset::full(GroupHandle group) {
  GroupSubset s(std::move(group));
  s.bits_.set();
  return s;
}

std::vector<Element> GroupSubset::elements() const {
  std::vector<Element> out;
  out.reserve(size());
  for (auto i = bits_.find_first(); i != Bits::npos; i = bits_.find_next(i)) out.push_back(Element(i));
  return out;
}

std::string format_elements(const GroupSubset& s) {
  std::string out = "{";
  bool first = true;
  for (Element x : s.elements()) {
    if (!first) out += ",";
    first = false;
    out += std::to_string(x);
  }
  return out + "}";
}

GroupSubset translate_left(Element g, const GroupSubset& a) {
  GroupSubset out(a.handle());
  const auto r = a.group().row(g);
  for (auto i = a.bits().find_first(); i != Bits::npos; i = a.bits().find_next(i)) out.insert(r[i]);
  return out;
}

GroupSubset translate_right(const GroupSubset& a, Element g) {
  GroupSubset out(a.handle());
  const auto& G = a.group();
  for (auto i = a.bits().find_first(); i != Bits::npos; i = a.bits().find_next(i))
    out.insert(G.mul(Element(i), g));
  return out;
}

GroupSubset complement(const GroupSubset& a) { return GroupSubset(a.handle(), ~a.bits()); }

GroupSubset intersect(const GroupSubset& a, const GroupSubset& b) {
  require_same_group(a, b);
  return GroupSubset(a.handle(), a.bits() & b.bits());
}

GroupSubset unite(const GroupSubset& a, const GroupSubset& b) {
  require_same_group(a, b);
  return GroupSubset(a.handle(), a.bits() | b.bits());
}

GroupSubset symdiff(const GroupSubset& a, const GroupSubset& b) {
  require_same_group(a, b);
  return GroupSubset(a.handle(), a.bits() ^ b.bits());
}

std::size_t symdiff_count(const GroupSubset& a, const GroupSubset& b) {
  require_same_group(a, b);
  return (a.bits() ^ b.bits()).count();
}

GroupSubset inverse_of(const GroupSubset& a) {
  GroupSubset out(a.handle());
  for (Element x : a.elements()) out.insert(a.group().inv(x));
  return out;
}

GroupSubset product(const GroupSubset& a, const GroupSubset& b) {
  require_same_group(a, b);
  GroupSubset out(a.handle());
  auto be = b.elements();
  for (Element x : a.elements()) {
    auto r = a.group().row(x);
    for (Element y : be) out.insert(r[y]);
  }
  return out;
}

bool is_subgroup(const GroupSubset& s) {
  if (s.empty()) return false;
  const auto& G = s.group();
  auto el = s.elements();
  for (Element x : el) {
    if (!s.contains(G.inv(x))) return false;
    auto r = G.row(x);
    for (Element y : el)
      if (!s.contains(r[y])) return false;
  }
  return true;
}

Subgroup::Subgroup(GroupSubset carrier) : carrier_(std::move(carrier)) {
  if (!is_subgroup(carrier_)) throw PreconditionError("not a subgroup: " + format_elements(carrier_));
  index_ = carrier_.group().order() / carrier_.size();
}

Subgroup Subgroup::trivial(GroupHandle g) {
  GroupSubset s(std::move(g));
  s.insert(FiniteGroup::identity());
  return Subgroup(std::move(s));
}

Subgroup Subgroup::whole(GroupHandle g) { return Subgroup(GroupSubset::full(std::move(g))); }

Subgroup Subgroup::generated_by(GroupHandle g, std::span<const Element> gens) {
  GroupSubset s(g);
  s.insert(FiniteGroup::identity());
  std::vector<Element> frontier{FiniteGroup::identity()};
  while (!frontier.empty()) {
    std::vector<Element> next;
    for (Element x : frontier)
      for (Element y : gens) {
        if (y >= g->order()) throw PreconditionError("generator out of range");
        Element z = g->mul(x, y);
        if (!s.contains(z)) {
          s.insert(z);
          next.push_back(z);
        }
      }
    frontier = std::move(next);
  }
  return Subgroup(std::move(s));
}

GroupSubset CosetDecomposition::coset(std::size_t i) const {
  return translate_left(reps.at(i), subgroup.carrier());
}

CosetDecomposition left_cosets(const Subgroup& h) {
  const auto& G = h.carrier().group();
  const std::size_t n = G.order();
  constexpr std::size_t kUnset = ~std::size_t(0);
  CosetDecomposition out{h, {}, std::vector<std::size_t>(n, kUnset)};
  auto hel = h.carrier().elements();
  for (Element g = 0; g < n; ++g) {
    if (out.coset_of[g] != kUnset) continue;
    std::size_t pos = out.reps.size();
    out.reps.push_back(g);
    auto r = G.row(g);
    for (Element x : hel) out.coset_of[r[x]] = pos;
  }
  return out;
}

bool is_normal(const Subgroup& h) {
  const auto& G = h.carrier().group();
  auto hel = h.carrier().elements();
  for (Element g = 0; g < G.order(); ++g) {
    Element gi = G.inv(g);
    for (Element x : hel)
      if (!h.contains(G.mul(G.mul(g, x), gi))) return false;
  }
  return true;
}

Subgroup normal_core(const Subgroup& h) {
  const auto& G = h.carrier().group();
  GroupSubset core(h.carrier().handle());
  for (Element x : h.carrier().elements()) {
    bool keep = true;
    for (Element g = 0; g < G.order() && keep; ++g) keep = h.contains(G.mul(G.mul(G.inv(g), x), g));
    if (keep) core.insert(x);
  }
  return Subgroup(std::move(core));
}

bool is_coset(const GroupSubset& a) {
  if (a.empty()) return false;
  Element first = Element(a.bits().find_first());
  return is_subgroup(translate_left(a.group().inv(first), a));
}

std::vector<Subgroup> all_subgroups(const GroupHandle& g) {
  std::vector<Subgroup> subs;
  std::set<Bits> seen;
  auto add = [&](Subgroup s) {
    if (seen.insert(s.carrier().bits()).second) subs.push_back(std::move(s));
  };
  for (Element x = 0; x < g->order(); ++x) {
    Element gen[1] = {x};
    add(Subgroup::generated_by(g, gen));
  }
  for (std::size_t i = 0; i < subs.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) {
      auto gens = unite(subs[i].carrier(), subs[j].carrier()).elements();
      add(Subgroup::generated_by(g, gens));
    }
  std::sort(subs.begin(), subs.end(), [](const Subgroup& a, const Subgroup& b) {
    if (a.order() != b.order()) return a.order() < b.order();
    return a.carrier().elements() < b.carrier().elements();
  });
  return subs;
}

std::vector<std::string> dsl_groups_up_to(std::size_t max_order) {
  struct Factor {
    std::string name;
    std::size_t order;
  };
  std::vector<Factor> factors;
  for (std::size_t n = 2; n <= max_order; ++n) factors.push_back({"Z/" + std::to_string(n), n});
  for (std::size_t n = 3; 2 * n <= max_order; ++n) factors.push_back({"D/" + std::to_string(n), 2 * n});
  if (max_order >= 8) factors.push_back({"Q/8", 8});
  std::stable_sort(factors.begin(), factors.end(), [](const Factor& a, const Factor& b) { return a.order < b.order; });

  std::vector<std::pair<std::size_t, std::string>> out;
  if (max_order >= 1) out.emplace_back(1, "Z/1");
  if (max_order >= 4) out.emplace_back(4, "D/2");
  if (max_order >= 6) out.emplace_back(6, "S/3");
  if (max_order >= 24) out.emplace_back(24, "S/4");
  // Non-decreasing factor sequences; single factors are the groups themselves.
  std::vector<std::size_t> stack;
  auto rec = [&](auto&& self, std::size_t from, std::size_t order) -> void {
    if (!stack.empty()) {
      std::string name;
      for (std::size_t i : stack) name += (name.empty() ? "" : "x") + factors[i].name;
      out.emplace_back(order, name);
    }
    for (std::size_t i = from; i < factors.size(); ++i) {
      if (order * factors[i].order > max_order) continue;
      stack.push_back(i);
      self(self, i, order * factors[i].order);
      stack.pop_back();
    }
  };
  rec(rec, 0, 1);
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::string> names;
  for (auto& [o, n] : out) names.push_back(std::move(n));
  return names;
}

}  // namespace stabreg
