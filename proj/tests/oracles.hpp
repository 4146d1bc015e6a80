#pragma once

// Independent reference computations. Each works from raw truth tables and
// mass vectors, never through the library's recursions.

#include "qclab/boolfn.hpp"
#include "qclab/compose.hpp"
#include "qclab/dtree.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace oracle {

using qclab::Input;
using qclab::Rational;

inline int bit(Input x, int j, int bits) { return static_cast<int>((x >> (bits - 1 - j)) & 1U); }

/// Plain mass vector view of a distribution.
template <class S>
std::vector<S> masses(const qclab::InputDistribution<S>& mu) {
  std::vector<S> out;
  for (Input x = 0; x < mu.size(); ++x) out.push_back(mu[x]);
  return out;
}

/// Free-form tree: every shape, including equal children and unlabeled
/// leaves are excluded.
struct Tree {
  int var = -1;
  int label = 0;
  std::shared_ptr<Tree> c0, c1;
};
using TreeP = std::shared_ptr<Tree>;

/// Every tree of at most `depth` queries with labeled leaves and no variable
/// repeated along a path.
inline std::vector<TreeP> all_trees(int bits, int depth, unsigned used = 0) {
  std::vector<TreeP> out;
  for (int l = 0; l < 2; ++l) out.push_back(std::make_shared<Tree>(Tree{-1, l, nullptr, nullptr}));
  if (depth == 0) return out;
  for (int j = 0; j < bits; ++j) {
    if (used & (1U << j)) continue;
    const auto sub = all_trees(bits, depth - 1, used | (1U << j));
    for (const auto& a : sub)
      for (const auto& b : sub) out.push_back(std::make_shared<Tree>(Tree{j, 0, a, b}));
  }
  return out;
}

inline int run(const Tree& t, Input x, int bits) {
  const Tree* v = &t;
  while (v->var >= 0) v = bit(x, v->var, bits) ? v->c1.get() : v->c0.get();
  return v->label;
}

/// Error under mu of the best tree with at most `depth` queries.
template <class S>
S brute_min_error(const qclab::PartialFn& g, const std::vector<S>& mu, int depth) {
  std::optional<S> best;
  for (const auto& t : all_trees(g.bits(), depth)) {
    S err(0);
    for (Input x = 0; x < mu.size(); ++x) {
      if (!g.is_valid(x)) continue;
      if (run(*t, x, g.bits()) != static_cast<int>(g(x))) err += mu[x];
    }
    if (!best || err < *best) best = err;
  }
  return *best;
}

/// Pr[x_j = 0 | x in {inputs with fixed[k] = val[k]}] from raw masses; nullopt
/// on zero mass.
template <class S>
std::optional<S> cond_zero(const std::vector<S>& mu, int bits, const std::map<int, int>& fixed, int j) {
  S tot(0), zero(0);
  for (Input x = 0; x < mu.size(); ++x) {
    bool in = true;
    for (auto [k, b] : fixed) in = in && bit(x, k, bits) == b;
    if (!in) continue;
    tot += mu[x];
    if (bit(x, j, bits) == 0) zero += mu[x];
  }
  if (tot == S(0)) return std::nullopt;
  return zero / tot;
}

template <class S>
S side_mass(const std::vector<S>& mu, int bits, const std::map<int, int>& fixed) {
  S tot(0);
  for (Input x = 0; x < mu.size(); ++x) {
    bool in = true;
    for (auto [k, b] : fixed) in = in && bit(x, k, bits) == b;
    if (in) tot += mu[x];
  }
  return tot;
}

/// E[N] of the single-block process by path recursion: weight w of being at
/// v unconflicted, each internal node reached with w > 0 counts w.
template <class S>
S expected_n(const qclab::DecisionTree& t, const std::vector<S>& mu0, const std::vector<S>& mu1, int bits) {
  std::function<S(int, std::map<int, int>, S)> rec = [&](int v, std::map<int, int> fixed, S w) -> S {
    const auto& n = t.node(v);
    if (n.is_leaf() || w == S(0)) return S(0);
    const S p0 = *cond_zero(mu0, bits, fixed, n.var);
    const S p1 = *cond_zero(mu1, bits, fixed, n.var);
    const S lo = p0 < p1 ? p0 : p1;
    const S hi = p0 < p1 ? p1 : p0;
    auto f0 = fixed, f1 = fixed;
    f0[n.var] = 0;
    f1[n.var] = 1;
    return w + rec(n.child[0], f0, w * lo) + rec(n.child[1], f1, w * (S(1) - hi));
  };
  return rec(0, {}, S(1));
}

/// prod_i mu_{z_i}(block i of x), then accumulated along the evaluation path.
template <class S>
std::vector<S> gamma_reach(const qclab::DecisionTree& t, const std::vector<S>& mu0, const std::vector<S>& mu1, int m,
                           const std::vector<int>& z) {
  const int n = static_cast<int>(z.size());
  const int total = n * m;
  std::vector<S> reach(t.size(), S(0));
  for (Input x = 0; x < (Input{1} << total); ++x) {
    S p(1);
    for (int i = 0; i < n; ++i) {
      const Input blk = (x >> ((n - 1 - i) * m)) & ((Input{1} << m) - 1);
      p *= z[static_cast<std::size_t>(i)] ? mu1[blk] : mu0[blk];
    }
    if (p == S(0)) continue;
    int v = 0;
    reach[0] += p;
    while (!t.node(v).is_leaf()) {
      v = t.node(v).child[static_cast<std::size_t>(bit(x, t.node(v).var, total))];
      reach[static_cast<std::size_t>(v)] += p;
    }
  }
  return reach;
}

/// (x, s) in f o g^n by the literal exists-b loop.
inline bool composed_contains(const qclab::Relation& f, const qclab::PartialFn& g, int n, Input x, const std::string& s) {
  const int m = g.bits();
  for (Input b = 0; b < (Input{1} << n); ++b) {
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      const Input blk = (x >> ((n - 1 - i) * m)) & ((Input{1} << m) - 1);
      const int bi = bit(b, i, n);
      ok = !g.is_valid(blk) || static_cast<int>(g(blk)) == bi;
    }
    if (ok && f.outputs(b).count(s)) return true;
  }
  return false;
}

/// I(X;Y) in nats from a joint table.
inline double mutual_information(const std::vector<std::vector<double>>& joint) {
  auto h = [](const std::vector<double>& p) {
    double s = 0;
    for (double q : p)
      if (q > 0) s -= q * std::log(q);
    return s;
  };
  std::vector<double> px(joint.size(), 0.0), py(joint[0].size(), 0.0), flat;
  for (std::size_t i = 0; i < joint.size(); ++i)
    for (std::size_t k = 0; k < joint[i].size(); ++k) {
      px[i] += joint[i][k];
      py[k] += joint[i][k];
      flat.push_back(joint[i][k]);
    }
  return h(px) + h(py) - h(flat);
}

inline Rational binomial_tail(const Rational& e, int k) {
  Rational total(0);
  for (int i = (k + 1) / 2; i <= k; ++i) {
    Rational c(1);
    for (int r = 0; r < i; ++r) c = c * Rational(k - r) / Rational(r + 1);
    Rational term = c;
    for (int r = 0; r < i; ++r) term *= e;
    for (int r = 0; r < k - i; ++r) term *= (Rational(1) - e);
    total += term;
  }
  return total;
}

/// The block process written out directly for a single block with fresh mt19937 draws.
/// Returns N.
inline int naive_p_single(const qclab::DecisionTree& t, const std::vector<double>& mu0, const std::vector<double>& mu1,
                          int bits, int z, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::map<int, int> fixed;
  bool nq = true;
  int n = 0;
  int v = 0;
  while (!t.node(v).is_leaf()) {
    const int j = t.node(v).var;
    const double r = unit(rng);
    const auto p0 = cond_zero(mu0, bits, fixed, j);
    const auto p1 = cond_zero(mu1, bits, fixed, j);
    int b;
    if (nq) {
      const double lo = std::min(*p0, *p1), hi = std::max(*p0, *p1);
      if (r <= lo) {
        b = 0;
      } else if (r >= hi) {
        b = 1;
      } else {
        nq = false;
        const double pz = z ? *p1 : *p0;
        b = r <= pz ? 0 : 1;
      }
      ++n;
    } else {
      const double pz = z ? *p1 : *p0;
      b = r <= pz ? 0 : 1;
    }
    fixed[j] = b;
    v = t.node(v).child[static_cast<std::size_t>(b)];
  }
  return n;
}

}  // namespace oracle
