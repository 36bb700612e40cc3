#include "stabreg/stability.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "stabreg/errors.hpp"

namespace stabreg {

namespace {

__extension__ typedef unsigned __int128 RowMask;

int popcount(RowMask m) {
  return __builtin_popcountll(std::uint64_t(m)) + __builtin_popcountll(std::uint64_t(m >> 64));
}

int lowest(RowMask m) {
  auto lo = std::uint64_t(m);
  if (lo) return __builtin_ctzll(lo);
  return 64 + __builtin_ctzll(std::uint64_t(m >> 64));
}

RowMask to_mask(const Bits& b) {
  RowMask m = 0;
  for (auto i = b.find_first(); i != Bits::npos; i = b.find_next(i)) m |= RowMask(1) << i;
  return m;
}

struct StateHash {
  std::size_t operator()(const std::vector<RowMask>& v) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ull ^ v.size();
    for (RowMask m : v) {
      for (std::uint64_t w : {std::uint64_t(m), std::uint64_t(m >> 64)}) {
        h ^= w + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        h *= 0xff51afd7ed558ccdull;
      }
    }
    return std::size_t(h);
  }
};

// Columns are chosen in order b_1..b_k. cells[t] holds the rows that can
// still serve as a_{t+1}: in every chosen b_j with j >= t+1 and in none
// before. `rest` holds rows in no chosen column yet.
class Searcher {
 public:
  Searcher(std::vector<RowMask> cols, std::vector<std::size_t> first, std::size_t k, const SearchOptions& opts)
      : cols_(std::move(cols)), first_(std::move(first)), k_(k), opts_(opts) {}

  SearchStatus run(RowMask all_rows) {
    stack_.assign(k_ * (k_ + 1), 0);
    try {
      return dfs(0, all_rows) ? SearchStatus::kFound : SearchStatus::kAbsent;
    } catch (const CapExceeded&) {
      return SearchStatus::kIndeterminate;
    }
  }

  const std::vector<std::size_t>& chosen() const { return chosen_; }
  const std::vector<RowMask>& final_cells() const { return final_; }
  std::size_t nodes() const { return nodes_; }

 private:
  RowMask* cells_at(std::size_t t) { return stack_.data() + t * k_; }

  // Memo key: the cells as a multiset (later columns treat them alike), then
  // the rows still unused.
  void make_key(const RowMask* cells, std::size_t n, RowMask rest) {
    key_.assign(cells, cells + n);
    std::sort(key_.begin(), key_.end());
    key_.push_back(rest);
  }

  // cand_[t] lists the columns meeting every cell and `rest` at depth t;
  // both only shrink, so each level filters its parent's list.
  bool dfs(std::size_t t, RowMask rest) {
    if (t == k_) {
      final_.assign(cells_at(t), cells_at(t) + t);
      return true;
    }
    if (++nodes_ > opts_.node_cap) throw CapExceeded("half-graph search node cap");
    const std::size_t need_after = k_ - t - 1;
    const auto& options = (t == 0 && !first_.empty()) ? first_ : cand_[t];
    const RowMask* cells = cells_at(t);
    RowMask* next = cells_at(t + 1);
    auto& child = cand_[t + 1];
    for (std::size_t c : options) {
      const RowMask s = cols_[c];
      const RowMask fresh = rest & s;
      if (!fresh) continue;
      const RowMask left = rest & ~s;
      if (need_after > 0 && std::size_t(popcount(left)) < need_after) continue;
      bool ok = true;
      for (std::size_t i = 0; i < t && ok; ++i) {
        next[i] = cells[i] & s;
        ok = next[i] != 0;
      }
      if (!ok) continue;
      next[t] = fresh;
      if (need_after > 0) {
        make_key(next, t + 1, left);
        if (failed_.count(key_)) continue;
        child.clear();
        for (std::size_t c2 : cand_[t]) {
          const RowMask s2 = cols_[c2];
          bool meets = (s2 & left) != 0;
          for (std::size_t i = 0; i <= t && meets; ++i) meets = (s2 & next[i]) != 0;
          if (meets) child.push_back(c2);
        }
        if (child.size() < need_after) {
          if (failed_.size() >= opts_.memo_cap) failed_.clear();
          failed_.insert(key_);
          continue;
        }
      }
      chosen_.push_back(c);
      if (dfs(t + 1, left)) return true;
      chosen_.pop_back();
      if (need_after > 0) {
        // The child overwrote key_; rebuild it for this state.
        make_key(next, t + 1, left);
        if (failed_.size() >= opts_.memo_cap) failed_.clear();
        failed_.insert(key_);
      }
    }
    return false;
  }

 public:
  void set_all(std::size_t n) {
    cand_.assign(k_ + 1, {});
    cand_[0].resize(n);
    for (std::size_t i = 0; i < n; ++i) cand_[0][i] = i;
  }

 private:
  std::vector<RowMask> cols_;
  std::vector<std::size_t> first_;
  std::vector<std::vector<std::size_t>> cand_;
  std::size_t k_;
  const SearchOptions& opts_;
  std::vector<std::size_t> chosen_;
  std::vector<RowMask> final_;
  std::vector<RowMask> stack_;  // cells per depth, k slots each
  std::vector<RowMask> key_;
  std::unordered_set<std::vector<RowMask>, StateHash> failed_;
  std::size_t nodes_ = 0;
};

double log2_binomial(double n, double k) {
  return (std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1)) / std::log(2.0);
}

constexpr double kMaterializeBits = 1 << 20;

BigBound ramsey_bound_big(const BigBound& k, const BigBound& l, bool crude) {
  BigBound out;
  if (k.value && l.value && k.value->fits_ulong_p() && l.value->fits_ulong_p()) {
    unsigned long kk = k.value->get_ui(), ll = l.value->get_ui();
    if (!crude && ramsey_exact_known(kk, ll)) {
      out.value = ramsey_upper(kk, ll);
      out.log2 = std::log2(out.value->get_d());
      return out;
    }
    double lg = crude ? double(kk + ll - 2) : log2_binomial(double(kk + ll - 2), double(kk - 1));
    out.log2 = lg;
    if (lg <= kMaterializeBits) {
      if (crude) {
        BigInt v;
        mpz_ui_pow_ui(v.get_mpz_t(), 2, kk + ll - 2);
        out.value = v;
      } else {
        out.value = ramsey_upper(kk, ll);
      }
    }
    return out;
  }
  // Only log2 sizes are available; k + l - 2 is dominated by its larger term.
  double a = k.log2, b = l.log2;
  double sum_log = std::max(a, b) + std::log2(1 + std::exp2(std::min(a, b) - std::max(a, b)));
  out.log2 = std::exp2(sum_log);  // both bounds are at most 2^(k+l-2)
  return out;
}

BigBound plus_one(BigBound b) {
  if (b.value) *b.value += 1;
  return b;
}

}  // namespace

BinaryRelation::BinaryRelation(std::size_t left_size, std::size_t right_size)
    : left_(left_size), cols_(right_size, Bits(left_size)) {}

void BinaryRelation::set_column(std::size_t b, Bits col) {
  if (col.size() != left_) throw PreconditionError("relation column has wrong length");
  cols_.at(b) = std::move(col);
}

bool BinaryRelation::empty() const {
  return std::all_of(cols_.begin(), cols_.end(), [](const Bits& c) { return c.none(); });
}

bool verify_half_graph(const BinaryRelation& rel, const HalfGraphWitness& w) {
  if (w.a.size() != w.b.size()) return false;
  for (std::size_t i = 0; i < w.a.size(); ++i) {
    if (w.a[i] >= rel.left_size()) return false;
    for (std::size_t j = 0; j < w.b.size(); ++j) {
      if (w.b[j] >= rel.right_size()) return false;
      if (rel.holds(w.a[i], w.b[j]) != (i <= j)) return false;
    }
  }
  return true;
}

HalfGraphResult half_graph(const BinaryRelation& rel, std::size_t k, const SearchOptions& opts) {
  if (k == 0) throw PreconditionError("half_graph: k must be at least 1");
  if (rel.left_size() > opts.row_cap || rel.left_size() > 128)
    throw CapExceeded("half_graph: " + std::to_string(rel.left_size()) + " rows exceed the row cap");
  if (rel.left_size() * rel.right_size() > opts.cell_cap)
    throw CapExceeded("half_graph: relation size exceeds the cell cap");
  HalfGraphResult out;
  if (k > rel.left_size()) return out;

  // Distinct nonempty columns, first occurrence kept.
  std::vector<RowMask> cols;
  std::vector<std::size_t> origin;
  std::vector<std::size_t> remap(rel.right_size(), std::size_t(-1));
  {
    std::vector<std::pair<RowMask, std::size_t>> order;
    for (std::size_t b = 0; b < rel.right_size(); ++b) {
      RowMask m = to_mask(rel.column(b));
      if (m) order.emplace_back(m, b);
    }
    std::stable_sort(order.begin(), order.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (i == 0 || order[i].first != order[i - 1].first) {
        cols.push_back(order[i].first);
        origin.push_back(order[i].second);
      }
      remap[order[i].second] = cols.size() - 1;
    }
    // Keep a deterministic order by original column index.
    std::vector<std::size_t> perm(cols.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::sort(perm.begin(), perm.end(), [&](std::size_t x, std::size_t y) { return origin[x] < origin[y]; });
    std::vector<RowMask> c2;
    std::vector<std::size_t> o2, inv(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
      c2.push_back(cols[perm[i]]);
      o2.push_back(origin[perm[i]]);
      inv[perm[i]] = i;
    }
    for (auto& r : remap)
      if (r != std::size_t(-1)) r = inv[r];
    cols = std::move(c2);
    origin = std::move(o2);
  }
  if (cols.empty()) return out;

  std::vector<std::size_t> first;
  for (std::size_t b : opts.first_columns) {
    if (b >= rel.right_size()) throw PreconditionError("half_graph: first column out of range");
    if (remap[b] != std::size_t(-1)) first.push_back(remap[b]);
  }
  std::sort(first.begin(), first.end());
  first.erase(std::unique(first.begin(), first.end()), first.end());
  if (!opts.first_columns.empty() && first.empty()) return out;

  RowMask all = 0;
  for (std::size_t a = 0; a < rel.left_size(); ++a) all |= RowMask(1) << a;
  Searcher s(cols, first, k, opts);
  s.set_all(cols.size());
  out.status = s.run(all);
  out.nodes = s.nodes();
  if (out.status == SearchStatus::kFound) {
    HalfGraphWitness w;
    for (std::size_t t = 0; t < k; ++t) {
      w.a.push_back(std::size_t(lowest(s.final_cells()[t])));
      w.b.push_back(origin[s.chosen()[t]]);
    }
    if (!verify_half_graph(rel, w)) throw Error("half_graph: internal witness failed verification");
    out.witness = std::move(w);
  }
  return out;
}

StabilityResult stability_of_relation(const BinaryRelation& rel, std::size_t upper, const StabilityOptions& opts) {
  StabilityResult r;
  r.counting_bound = upper;
  r.method = "search";
  r.index = 1;
  r.lower = 1;
  for (std::size_t k = 1;; ++k) {
    // A half-graph of size k would give index >= k + 1 > upper.
    if (k + 1 > upper) {
      r.index = upper;
      r.lower = upper;
      r.method = "search+count";
      return r;
    }
    if (k > opts.k_cap) {
      r.index = upper;
      r.exact = r.lower == upper;
      r.method = r.exact ? "search+count" : "count";
      return r;
    }
    HalfGraphResult h;
    try {
      h = half_graph(rel, k, opts.search);
    } catch (const CapExceeded&) {
      h.status = SearchStatus::kIndeterminate;
    }
    if (h.status == SearchStatus::kAbsent) {
      r.index = k;
      r.lower = k;
      return r;
    }
    if (h.status == SearchStatus::kIndeterminate) {
      r.index = upper;
      r.exact = r.lower == upper;
      r.method = r.exact ? "search+count" : "count";
      return r;
    }
    r.witness = h.witness;
    r.lower = k + 1;
  }
}

BinaryRelation translation_relation(const GroupSubset& a) {
  const auto& G = a.group();
  BinaryRelation rel(G.order(), G.order());
  for (Element b = 0; b < G.order(); ++b) rel.set_column(b, translate_right(a, G.inv(b)).bits());
  return rel;
}

BinaryRelation phi_A_relation(const GroupSubset& a) {
  const auto& G = a.group();
  const std::size_t n = G.order();
  std::vector<Bits> right;
  for (Element y = 0; y < n; ++y) right.push_back(translate_right(a, y).bits());
  BinaryRelation rel(n, n * n);
  for (Element y = 0; y < n; ++y)
    for (Element z = 0; z < n; ++z) rel.set_column(std::size_t(y) * n + z, right[y] ^ right[z]);
  return rel;
}

std::size_t stability_counting_bound(const GroupSubset& a) {
  const std::size_t n = a.group().order(), s = a.size();
  return std::min(s, n - s + 1) + 1;
}

std::size_t phi_counting_bound(const GroupSubset& a) {
  const std::size_t n = a.group().order(), s = a.size();
  return std::min(2 * std::min(s, n - s) + 1, n + 1);
}

StabilityResult stability_index(const GroupSubset& a, const StabilityOptions& opts) {
  if (a.empty()) {
    StabilityResult r;
    r.counting_bound = 1;
    r.method = "search";
    return r;
  }
  StabilityOptions o = opts;
  o.search.first_columns = {0};  // (a, b) -> (ah, h^-1 b) lets b_1 = e
  return stability_of_relation(translation_relation(a), stability_counting_bound(a), o);
}

StabilityResult phi_stability(const GroupSubset& a, const StabilityOptions& opts) {
  const std::size_t n = a.group().order();
  StabilityOptions o = opts;
  // (x; y, z) -> (xh; yh, zh) lets b_1 = (e, w).
  o.search.first_columns.clear();
  for (std::size_t w = 0; w < n; ++w) o.search.first_columns.push_back(w);
  return stability_of_relation(phi_A_relation(a), phi_counting_bound(a), o);
}

bool has_half_graph(const GroupSubset& a, std::size_t k) {
  if (k == 0) return true;
  if (k > a.size()) return false;
  SearchOptions o;
  o.first_columns = {0};
  o.node_cap = ~std::size_t(0);
  return half_graph(translation_relation(a), k, o).status == SearchStatus::kFound;
}

bool ramsey_exact_known(unsigned long k, unsigned long l) {
  if (k > l) std::swap(k, l);
  if (k <= 2) return true;
  return (k == 3 && l <= 5) || (k == 4 && l == 4);
}

BigInt ramsey_upper(unsigned long k, unsigned long l) {
  if (k > l) std::swap(k, l);
  if (k == 0) return 0;
  if (k == 1) return 1;
  if (k == 2) return l;
  if (k == 3 && l == 3) return 6;
  if (k == 3 && l == 4) return 9;
  if (k == 3 && l == 5) return 14;
  if (k == 4 && l == 4) return 18;
  return binomial(k + l - 2, k - 1);
}

std::string BigBound::to_string() const {
  if (value) return value->get_str();
  char buf[64];
  std::snprintf(buf, sizeof buf, "2^%.6g", log2);
  return buf;
}

std::size_t BigBound::clamp(std::size_t cap) const {
  if (value && value->fits_ulong_p() && value->get_ui() < cap) return value->get_ui();
  return cap;
}

KStarBound k_star_bound(unsigned long k) {
  if (k < 2) throw PreconditionError("k_star_bound: k must be at least 2");
  KStarBound out;
  for (bool crude : {false, true}) {
    BigBound kb{BigInt(k), std::log2(double(k))};
    BigBound lb{BigInt(k + 1), std::log2(double(k + 1))};
    BigBound m = ramsey_bound_big(kb, lb, crude);
    BigBound outer = plus_one(ramsey_bound_big(m, m, crude));
    (crude ? out.crude : out.sharp) = outer;
  }
  return out;
}

ClosureBounds closure_bounds(unsigned long ka, unsigned long kb) {
  if (ka < 2 || kb < 2) throw PreconditionError("closure_bounds: indices must be at least 2");
  // The union is the complement of an intersection of complements.
  return {ka + 1, ramsey_upper(ka, kb), ramsey_upper(ka + 1, kb + 1) + 1};
}

KStarChoice choose_k_star(StabilityResult phi, std::size_t k) {
  KStarChoice c;
  c.ramsey = k_star_bound(std::max<std::size_t>(k, 2));
  c.phi = std::move(phi);
  const std::size_t ram = c.ramsey.sharp.clamp(~std::size_t(0));
  c.value = c.phi.index;
  c.source = c.phi.exact ? "exact-phi" : "counting";
  if (!c.phi.exact && ram < c.value) {
    c.value = ram;
    c.source = "ramsey";
  }
  if (c.value < 2) c.value = 2;  // the chain needs k >= 2
  return c;
}

KStarChoice choose_k_star(const GroupSubset& a, std::size_t k, const StabilityOptions& opts) {
  return choose_k_star(phi_stability(a, opts), k);
}

Bits StabilityMemo::canonical(const GroupSubset& a) const {
  const auto& G = a.group();
  Bits best = a.bits();
  for (Element h = 0; h < G.order(); ++h) {
    GroupSubset ah = translate_right(a, h);
    for (Element g = 0; g < G.order(); ++g) {
      Bits b = translate_left(g, ah).bits();
      if (b < best) best = std::move(b);
    }
  }
  return best;
}

StabilityResult StabilityMemo::stability(const GroupSubset& a) {
  auto key = std::make_pair(&a.group(), canonical(a));
  {
    std::lock_guard<std::mutex> lk(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end() && it->second.stab) return *it->second.stab;
  }
  StabilityResult r = stability_index(GroupSubset(a.handle(), key.second), opts_);
  r.witness.reset();
  std::lock_guard<std::mutex> lk(mu_);
  keep_.insert(a.handle());
  cache_[key].stab = r;
  return r;
}

StabilityResult StabilityMemo::phi(const GroupSubset& a) {
  auto key = std::make_pair(&a.group(), canonical(a));
  {
    std::lock_guard<std::mutex> lk(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end() && it->second.phi) return *it->second.phi;
  }
  StabilityResult r = phi_stability(GroupSubset(a.handle(), key.second), opts_);
  r.witness.reset();
  std::lock_guard<std::mutex> lk(mu_);
  keep_.insert(a.handle());
  cache_[key].phi = r;
  return r;
}

std::size_t StabilityMemo::size() const {
  std::lock_guard<std::mutex> lk(mu_);
  return cache_.size();
}

}  // namespace stabreg

namespace stabreg {

nlohmann::json to_json(const HalfGraphWitness& w) { return {{"a", w.a}, {"b", w.b}}; }

nlohmann::json to_json(const StabilityResult& r) {
  nlohmann::json j{{"index", r.index},
                   {"exact", r.exact},
                   {"lower", r.lower},
                   {"counting_bound", r.counting_bound},
                   {"method", r.method}};
  if (r.witness) j["witness"] = to_json(*r.witness);
  return j;
}

}  // namespace stabreg
