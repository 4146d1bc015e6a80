#pragma once

#include "qclab/boolfn.hpp"
#include "qclab/conflict.hpp"
#include "qclab/dtree.hpp"

#include <vector>

namespace fx {

using namespace qclab;

inline Rational q(const char* s) { return parse_rational(s); }

inline PartialFn id1() { return PartialFn::from_string(1, "01"); }
inline PartialFn or2() { return PartialFn::from_string(2, "0111"); }
inline PartialFn and2() { return PartialFn::from_string(2, "0001"); }
inline PartialFn xor2() { return PartialFn::from_string(2, "0110"); }
/// g(x) = x^(1) on two bits.
inline PartialFn first2() { return PartialFn::from_string(2, "0011"); }

template <class S = Rational>
InputDistribution<S> dist(int bits, std::vector<const char*> masses) {
  Vector<S> v(static_cast<Eigen::Index>(masses.size()));
  for (std::size_t i = 0; i < masses.size(); ++i) v[static_cast<Eigen::Index>(i)] = from_rational<S>(q(masses[i]));
  return InputDistribution<S>(bits, std::move(v));
}

template <class S = Rational>
DistributionPair<S> or2_pair() {
  return DistributionPair<S>(or2(), dist<S>(2, {"1", "0", "0", "0"}), dist<S>(2, {"0", "1/3", "1/3", "1/3"}));
}

template <class S = Rational>
DistributionPair<S> xor2_pair() {
  return DistributionPair<S>(xor2(), dist<S>(2, {"1/2", "0", "0", "1/2"}), dist<S>(2, {"0", "1/2", "1/2", "0"}));
}

template <class S = Rational>
DistributionPair<S> id1_pair() {
  return DistributionPair<S>(id1(), dist<S>(1, {"1", "0"}), dist<S>(1, {"0", "1"}));
}

inline DecisionTree leaf(int b) { return DecisionTree::leaf(b); }
inline DecisionTree query(int v, const DecisionTree& a, const DecisionTree& b) { return DecisionTree::query(v, a, b); }

/// Full depth-2 tree on (x0, x1) with labels from the table of g.
inline DecisionTree full2(const PartialFn& g) {
  auto lab = [&](Input x) { return g.is_valid(x) ? static_cast<int>(g(x)) : 0; };
  return query(0, query(1, leaf(lab(0)), leaf(lab(1))), query(1, leaf(lab(2)), leaf(lab(3))));
}

/// Full tree over `bits` variables labeled by parity.
inline DecisionTree parity_tree(int bits, int var = 0, int acc = 0) {
  if (var == bits) return leaf(acc);
  return query(var, parity_tree(bits, var + 1, acc), parity_tree(bits, var + 1, acc ^ 1));
}

/// Full tree over `bits` variables; the leaf reached by x is label(x).
template <class Fn>
DecisionTree full_tree(int bits, Fn label, int var = 0, Input acc = 0) {
  if (var == bits) return leaf(label(acc));
  return query(var, full_tree(bits, label, var + 1, acc << 1), full_tree(bits, label, var + 1, (acc << 1) | 1));
}

}  // namespace fx
