#include "stabreg/setsys.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "stabreg/random.hpp"

namespace stabreg {

namespace {

// Trace pattern of member j on points, as an integer mask.
std::uint64_t trace_mask(const std::vector<Bits>& columns, const std::vector<std::size_t>& points, std::size_t j) {
  std::uint64_t m = 0;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (columns[points[i]].test(j)) m |= std::uint64_t(1) << i;
  return m;
}

std::vector<Bits> columns_of(const SetSystem& s) {
  std::vector<Bits> cols(s.ground, Bits(s.sets.size()));
  for (std::size_t j = 0; j < s.sets.size(); ++j)
    for (auto e = s.sets[j].find_first(); e != Bits::npos; e = s.sets[j].find_next(e)) cols[e].set(j);
  return cols;
}

bool shattered_by(const std::vector<Bits>& columns, std::size_t members, const std::vector<std::size_t>& points) {
  if (points.size() >= 63) return false;
  const std::uint64_t need = std::uint64_t(1) << points.size();
  if (members < need) return false;
  std::vector<char> seen(need, 0);
  std::uint64_t distinct = 0;
  for (std::size_t j = 0; j < members && distinct < need; ++j) {
    auto m = trace_mask(columns, points, j);
    if (!seen[m]) {
      seen[m] = 1;
      ++distinct;
    }
  }
  return distinct == need;
}

bool heavy(std::size_t size, const Rational& eps, std::size_t ground) {
  return Rational(static_cast<unsigned long>(size)) > eps * static_cast<unsigned long>(ground);
}

std::size_t ceil_rational(const Rational& q) {
  BigInt c;
  mpz_cdiv_q(c.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  if (!c.fits_ulong_p()) throw CapExceeded("bound does not fit in a machine word");
  return c.get_ui();
}

void check_eps(const Rational& eps, const char* what) {
  if (sgn(eps) <= 0 || eps > Rational(1, 2)) throw PreconditionError(std::string(what) + ": need 0 < eps <= 1/2");
}

}  // namespace

SetSystem SetSystem::deduplicated() const {
  SetSystem out;
  out.ground = ground;
  std::set<Bits> seen;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (!seen.insert(sets[i]).second) continue;
    out.sets.push_back(sets[i]);
    if (!labels.empty()) out.labels.push_back(labels[i]);
  }
  return out;
}

bool shatters(const SetSystem& s, const std::vector<std::size_t>& points) {
  for (auto p : points)
    if (p >= s.ground) throw PreconditionError("shatters: point outside ground set");
  auto d = s.deduplicated();
  return shattered_by(columns_of(d), d.sets.size(), points);
}

VcCertificate vc_dimension(const SetSystem& s, const VcOptions& opts) {
  if (s.ground > opts.ground_cap && opts.depth_cap == 0)
    throw CapExceeded("vc_dimension: ground size " + std::to_string(s.ground) + " exceeds cap " +
                      std::to_string(opts.ground_cap) + " and no depth cap was given");
  VcCertificate cert;
  auto d = s.deduplicated();
  const std::size_t members = d.sets.size();
  if (members == 0) {
    cert.shattered_per_level = {0};
    return cert;
  }
  auto columns = columns_of(d);
  std::vector<std::vector<std::size_t>> level{{}};
  std::set<std::vector<std::size_t>> known{{}};
  cert.shattered_per_level.push_back(1);
  for (std::size_t size = 1;; ++size) {
    if (opts.depth_cap != 0 && size > opts.depth_cap) {
      cert.lower_bound_only = true;
      break;
    }
    // A shattered set of this size needs 2^size distinct members.
    if (size >= 63 || (std::uint64_t(1) << size) > members) {
      cert.shattered_per_level.push_back(0);
      break;
    }
    std::vector<std::vector<std::size_t>> next;
    for (const auto& t : level) {
      std::size_t start = t.empty() ? 0 : t.back() + 1;
      for (std::size_t e = start; e < d.ground; ++e) {
        std::vector<std::size_t> cand = t;
        cand.push_back(e);
        bool subsets_ok = true;
        for (std::size_t drop = 0; drop + 1 < cand.size() && subsets_ok; ++drop) {
          std::vector<std::size_t> sub;
          for (std::size_t i = 0; i < cand.size(); ++i)
            if (i != drop) sub.push_back(cand[i]);
          subsets_ok = known.count(sub) > 0;
        }
        if (!subsets_ok) continue;
        ++cert.candidates_tested;
        if (shattered_by(columns, members, cand)) next.push_back(std::move(cand));
      }
    }
    cert.shattered_per_level.push_back(next.size());
    if (next.empty()) break;
    cert.dimension = size;
    cert.witness = next.front();
    for (const auto& t : next) known.insert(t);
    level = std::move(next);
  }
  return cert;
}

SetSystem translates_system(const GroupSubset& a, Side side) {
  const auto& G = a.group();
  SetSystem s;
  s.ground = G.order();
  for (Element g = 0; g < G.order(); ++g) {
    s.sets.push_back((side == Side::kLeft ? translate_left(g, a) : translate_right(a, g)).bits());
    s.labels.push_back(std::to_string(g));
  }
  return s;
}

std::size_t vc_translates(const GroupSubset& a, Side side) {
  VcOptions opts;
  opts.ground_cap = std::max<std::size_t>(opts.ground_cap, a.group().order());
  return vc_dimension(translates_system(a, side), opts).dimension;
}

bool is_epsilon_net(const SetSystem& s, const Rational& eps, const std::vector<std::size_t>& points) {
  Bits f(s.ground);
  for (auto p : points) {
    if (p >= s.ground) return false;
    f.set(p);
  }
  for (const auto& u : s.sets)
    if (heavy(u.count(), eps, s.ground) && !u.intersects(f)) return false;
  return true;
}

NetResult epsilon_net(const SetSystem& s, const Rational& eps, std::size_t d, std::uint64_t seed,
                      const NetOptions& opts) {
  check_eps(eps, "epsilon_net");
  NetResult out;
  // d = 0 would make the bound 0 even when a heavy set must be hit.
  const std::size_t dd = std::max<std::size_t>(d, 1);
  out.size_bound = ceil_rational(Rational(8 * static_cast<unsigned long>(dd)) / (eps * eps));
  std::vector<const Bits*> heavy_sets;
  for (const auto& u : s.sets)
    if (heavy(u.count(), eps, s.ground)) heavy_sets.push_back(&u);
  if (heavy_sets.empty()) return out;

  Rng rng(seed);
  for (std::size_t attempt = 0; attempt < opts.retries; ++attempt) {
    ++out.attempts;
    std::set<std::size_t> pts;
    for (std::size_t i = 0; i < out.size_bound; ++i) pts.insert(rng.below(s.ground));
    std::vector<std::size_t> cand(pts.begin(), pts.end());
    if (is_epsilon_net(s, eps, cand)) {
      out.points = std::move(cand);
      return out;
    }
  }

  // Greedy hitting set; ties go to the smallest point.
  std::vector<char> hit(heavy_sets.size(), 0);
  std::size_t remaining = heavy_sets.size();
  std::vector<std::size_t> greedy;
  while (remaining > 0) {
    std::size_t best = 0, best_gain = 0;
    for (std::size_t p = 0; p < s.ground; ++p) {
      std::size_t gain = 0;
      for (std::size_t j = 0; j < heavy_sets.size(); ++j) gain += !hit[j] && heavy_sets[j]->test(p);
      if (gain > best_gain) {
        best_gain = gain;
        best = p;
      }
    }
    greedy.push_back(best);
    for (std::size_t j = 0; j < heavy_sets.size(); ++j)
      if (!hit[j] && heavy_sets[j]->test(best)) {
        hit[j] = 1;
        --remaining;
      }
  }
  std::sort(greedy.begin(), greedy.end());
  if (greedy.size() > out.size_bound)
    throw NetFailure("epsilon_net: no net within size bound " + std::to_string(out.size_bound) +
                         " after " + std::to_string(out.attempts) + " samples and greedy fallback",
                     greedy);
  out.points = std::move(greedy);
  out.greedy = true;
  return out;
}

PackingResult haussler_packing(const SetSystem& s, const Rational& eps, std::optional<std::size_t> d) {
  check_eps(eps, "haussler_packing");
  PackingResult out;
  out.packing.ground = s.ground;
  const Rational thresh = eps * static_cast<unsigned long>(s.ground);
  for (std::size_t i = 0; i < s.sets.size(); ++i) {
    bool far = true;
    for (const auto& v : out.packing.sets)
      if (Rational(static_cast<unsigned long>((s.sets[i] ^ v).count())) <= thresh) {
        far = false;
        break;
      }
    if (!far) continue;
    out.indices.push_back(i);
    out.packing.sets.push_back(s.sets[i]);
    if (!s.labels.empty()) out.packing.labels.push_back(s.labels[i]);
  }
  if (d) {
    Rational base = Rational(30) / eps;
    Rational bound = 1;
    for (std::size_t i = 0; i < *d; ++i) bound *= base;
    out.bound = bound;
    if (Rational(static_cast<unsigned long>(out.indices.size())) > bound)
      throw TheoremViolation("haussler_packing: " + std::to_string(out.indices.size()) +
                             " members exceed (30/eps)^d = " + to_string(bound) + " for d = " + std::to_string(*d));
  }
  return out;
}

std::size_t approximation_length_cap(const Rational& eps, std::size_t d, std::size_t constant) {
  const double dd = static_cast<double>(std::max<std::size_t>(d, 1));
  const double e = eps.get_d();
  const double v = static_cast<double>(constant) * dd / (e * e) * std::log2(dd / e + 2.0);
  if (!(v < 1e15)) throw CapExceeded("approximation length cap too large");
  return static_cast<std::size_t>(std::ceil(v));
}

Rational approximation_discrepancy(const SetSystem& s, const std::vector<std::size_t>& tuple) {
  Rational worst = 0;
  if (tuple.empty() || s.ground == 0) return s.sets.empty() ? Rational(0) : Rational(1);
  std::vector<std::size_t> mult(s.ground, 0);
  for (auto p : tuple) {
    if (p >= s.ground) throw PreconditionError("approximation tuple point outside ground set");
    ++mult[p];
  }
  const auto n = static_cast<unsigned long>(tuple.size());
  const auto N = static_cast<unsigned long>(s.ground);
  for (const auto& u : s.sets) {
    unsigned long hits = 0;
    for (auto e = u.find_first(); e != Bits::npos; e = u.find_next(e)) hits += mult[e];
    Rational diff = Rational(hits, n) - Rational(static_cast<unsigned long>(u.count()), N);
    diff.canonicalize();
    if (abs(diff) > worst) worst = abs(diff);
  }
  return worst;
}

ApproxResult epsilon_approximation(const SetSystem& s, const Rational& eps, std::size_t d, std::uint64_t seed,
                                   const ApproxOptions& opts) {
  if (sgn(eps) <= 0) throw PreconditionError("epsilon_approximation: need eps > 0");
  if (s.ground == 0) throw PreconditionError("epsilon_approximation: empty ground set");
  ApproxResult out;
  out.length_cap = approximation_length_cap(eps, d, opts.constant);
  Rng rng(seed);
  std::size_t length = std::min(out.length_cap, std::max<std::size_t>(1, ceil_rational(1 / (eps * eps))));
  std::optional<Rational> best;
  while (true) {
    const bool at_cap = length >= out.length_cap;
    const std::size_t tries = at_cap ? opts.retries : std::min<std::size_t>(opts.retries, 4);
    for (std::size_t t = 0; t < tries; ++t) {
      ++out.attempts;
      std::vector<std::size_t> tuple(length);
      for (auto& p : tuple) p = rng.below(s.ground);
      std::sort(tuple.begin(), tuple.end());
      Rational disc = approximation_discrepancy(s, tuple);
      if (!best || disc < *best) best = disc;
      if (disc <= eps) {
        out.tuple = std::move(tuple);
        out.max_discrepancy = disc;
        return out;
      }
    }
    if (at_cap) break;
    length = std::min(out.length_cap, length * 2);
  }
  throw ApproxFailure("epsilon_approximation: best discrepancy " + to_string(*best) + " exceeds " +
                          to_string(eps) + " at length cap " + std::to_string(out.length_cap),
                      *best);
}

std::vector<Element> find_right_cover(const GroupSubset& x, const GroupSubset& a) {
  if (x.handle() != a.handle()) throw GroupMismatch("find_right_cover: different groups");
  std::vector<Element> f;
  if (x.empty()) return f;
  if (a.empty()) throw PreconditionError("find_right_cover: A is empty, X cannot be covered");
  const auto& G = a.group();
  std::vector<Bits> shifted;
  for (Element g = 0; g < G.order(); ++g) shifted.push_back(translate_right(a, g).bits());
  Bits uncovered = x.bits();
  while (uncovered.any()) {
    Element best = 0;
    std::size_t best_gain = 0;
    for (Element g = 0; g < G.order(); ++g) {
      std::size_t gain = (shifted[g] & uncovered).count();
      if (gain > best_gain) {
        best_gain = gain;
        best = g;
      }
    }
    f.push_back(best);
    uncovered -= shifted[best];
  }
  return f;
}

std::string bits_to_hex(const Bits& b) {
  static const char* digits = "0123456789abcdef";
  const std::size_t nd = (b.size() + 3) / 4;
  std::string out(nd, '0');
  for (std::size_t k = 0; k < nd; ++k) {
    unsigned v = 0;
    for (unsigned i = 0; i < 4; ++i)
      if (4 * k + i < b.size() && b.test(4 * k + i)) v |= 1u << i;
    out[nd - 1 - k] = digits[v];
  }
  return out;
}

Bits bits_from_hex(const std::string& hex, std::size_t size) {
  if (hex.size() != (size + 3) / 4) throw ParseError("hex bit-vector has wrong length");
  Bits b(size);
  const std::size_t nd = hex.size();
  for (std::size_t k = 0; k < nd; ++k) {
    char c = static_cast<char>(std::tolower(static_cast<unsigned char>(hex[nd - 1 - k])));
    unsigned v;
    if (c >= '0' && c <= '9')
      v = unsigned(c - '0');
    else if (c >= 'a' && c <= 'f')
      v = unsigned(c - 'a' + 10);
    else
      throw ParseError("bad hex digit in bit-vector");
    for (unsigned i = 0; i < 4; ++i) {
      if (!(v >> i & 1)) continue;
      if (4 * k + i >= size) throw ParseError("hex bit-vector sets a bit past its size");
      b.set(4 * k + i);
    }
  }
  return b;
}

nlohmann::json to_json(const SetSystem& s) {
  nlohmann::json j;
  j["ground"] = s.ground;
  j["sets"] = nlohmann::json::array();
  for (const auto& u : s.sets) j["sets"].push_back(bits_to_hex(u));
  j["labels"] = s.labels;
  return j;
}

SetSystem set_system_from_json(const nlohmann::json& j) {
  SetSystem s;
  try {
    s.ground = j.at("ground").get<std::size_t>();
    for (const auto& h : j.at("sets")) s.sets.push_back(bits_from_hex(h.get<std::string>(), s.ground));
    if (j.contains("labels")) s.labels = j["labels"].get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("set system json: ") + e.what());
  }
  if (!s.labels.empty() && s.labels.size() != s.sets.size()) throw ParseError("set system json: label count mismatch");
  return s;
}

}  // namespace stabreg
