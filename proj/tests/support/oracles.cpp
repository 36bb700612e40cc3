#include "oracles.hpp"

#include <algorithm>
#include <functional>

namespace oracle {

int popcount(Mask m) { return __builtin_popcountll(m); }

Mask mask_of(const stabreg::GroupSubset& s) {
  Mask m = 0;
  for (auto x : s.elements()) m |= Mask(1) << x;
  return m;
}

stabreg::GroupSubset subset_of(const stabreg::GroupHandle& g, Mask m) {
  stabreg::GroupSubset s(g);
  for (Element x = 0; x < g->order(); ++x)
    if (m >> x & 1) s.insert(x);
  return s;
}

namespace {

bool in(Mask m, Element x) { return m >> x & 1; }

// Generic ladder search: rel(a, col) over rows 0..rows-1 and columns 0..cols-1.
int ladder(int rows, int cols, int limit, const std::function<bool(int, int)>& rel) {
  std::vector<int> as, bs;
  int best = 0;
  std::function<void()> extend = [&]() {
    int t = int(as.size());
    best = std::max(best, t);
    if (best >= limit || t >= limit) return;
    for (int a = 0; a < rows; ++a) {
      bool ok = true;
      for (int j = 0; j < t && ok; ++j) ok = !rel(a, bs[j]);
      if (!ok) continue;
      as.push_back(a);
      for (int b = 0; b < cols; ++b) {
        bool okb = true;
        for (int i = 0; i <= t && okb; ++i) okb = rel(as[i], b);
        if (!okb) continue;
        bs.push_back(b);
        extend();
        bs.pop_back();
        if (best >= limit) break;
      }
      as.pop_back();
      if (best >= limit) return;
    }
  };
  extend();
  return best;
}

}  // namespace

int largest_half_graph(const FiniteGroup& g, Mask a, int limit) {
  const int n = int(g.order());
  return ladder(n, n, limit, [&](int x, int y) { return in(a, g.mul(Element(x), Element(y))); });
}

int largest_phi_half_graph(const FiniteGroup& g, Mask a, int limit) {
  const int n = int(g.order());
  // x in Ay iff x y^-1 in A.
  auto in_ay = [&](int x, int y) { return in(a, g.mul(Element(x), g.inv(Element(y)))); };
  return ladder(n, n * n, limit, [&](int x, int c) { return in_ay(x, c / n) != in_ay(x, c % n); });
}

std::vector<Mask> subgroups(const FiniteGroup& g) {
  const int n = int(g.order());
  std::vector<Mask> out;
  for (Mask m = 1; m < (Mask(1) << n); ++m) {
    if (!in(m, 0)) continue;
    bool closed = true;
    for (int x = 0; x < n && closed; ++x) {
      if (!in(m, Element(x))) continue;
      if (!in(m, g.inv(Element(x)))) closed = false;
      for (int y = 0; y < n && closed; ++y)
        if (in(m, Element(y)) && !in(m, g.mul(Element(x), Element(y)))) closed = false;
    }
    if (closed) out.push_back(m);
  }
  return out;
}

bool is_left_coset_of_some_subgroup(const FiniteGroup& g, Mask a, const std::vector<Mask>& subs) {
  const int n = int(g.order());
  for (Mask h : subs)
    for (int x = 0; x < n; ++x) {
      Mask c = 0;
      for (int y = 0; y < n; ++y)
        if (in(h, Element(y))) c |= Mask(1) << g.mul(Element(x), Element(y));
      if (c == a) return true;
    }
  return false;
}

int vc_dimension(const std::vector<Mask>& sets, int ground) {
  int best = 0;
  for (Mask t = 0; t < (Mask(1) << ground); ++t) {
    int sz = popcount(t);
    if (sz <= best) continue;
    std::vector<Mask> traces;
    for (Mask s : sets) traces.push_back(s & t);
    std::sort(traces.begin(), traces.end());
    traces.erase(std::unique(traces.begin(), traces.end()), traces.end());
    if (traces.size() == (std::size_t(1) << sz)) best = sz;
  }
  return best;
}

std::vector<Mask> left_translates(const FiniteGroup& g, Mask a) {
  const int n = int(g.order());
  std::vector<Mask> out;
  for (int x = 0; x < n; ++x) {
    Mask c = 0;
    for (int y = 0; y < n; ++y)
      if (in(a, Element(y))) c |= Mask(1) << g.mul(Element(x), Element(y));
    out.push_back(c);
  }
  return out;
}

std::vector<Mask> right_translates(const FiniteGroup& g, Mask a) {
  const int n = int(g.order());
  std::vector<Mask> out;
  for (int x = 0; x < n; ++x) {
    Mask c = 0;
    for (int y = 0; y < n; ++y)
      if (in(a, Element(y))) c |= Mask(1) << g.mul(Element(y), Element(x));
    out.push_back(c);
  }
  return out;
}

}  // namespace oracle
