#pragma once

// Conflict complexity: the expected number of queries the coupled process
// makes before its draw separates the 0-side and 1-side distributions.

#include "qclab/boolfn.hpp"
#include "qclab/dtree.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace qclab {

/// (mu0, mu1) supported inside g^-1(0) and g^-1(1). Carries g so every
/// consumer can check trees against it.
template <class Scalar>
class DistributionPair {
 public:
  DistributionPair(PartialFn g, InputDistribution<Scalar> mu0, InputDistribution<Scalar> mu1);

  /// (mu | g^-1(0), mu | g^-1(1)).
  static DistributionPair from_mixture(const PartialFn& g, const InputDistribution<Scalar>& mu);

  const PartialFn& function() const { return g_; }
  int bits() const { return g_.bits(); }
  const InputDistribution<Scalar>& mu(int b) const { return b == 0 ? mu0_ : mu1_; }

  /// Both distributions conditioned on C; each must keep positive mass.
  DistributionPair condition(const Subcube& c) const;

  template <class Other>
  DistributionPair<Other> cast() const {
    return DistributionPair<Other>(g_, mu0_.template cast<Other>(), mu1_.template cast<Other>());
  }

 private:
  PartialFn g_;
  InputDistribution<Scalar> mu0_;
  InputDistribution<Scalar> mu1_;
};

/// |Pr_{mu0|C}[x_var = 0] - Pr_{mu1|C}[x_var = 0]|. Throws ZeroMassError when
/// either side has no mass on C.
template <class Scalar>
Scalar delta_at(const DistributionPair<Scalar>& pair, const Subcube& c, int var);

/// Pr[the single-block process sits at node v with no conflict yet], per node.
template <class Scalar>
std::vector<Scalar> unconflicted_weights(const DecisionTree& tree, const DistributionPair<Scalar>& pair);

/// E[N] for the single-block process on `tree`; the conflicting query is
/// counted. Throws PreconditionError when the tree does not compute g.
template <class Scalar>
Scalar expected_conflict_queries(const DecisionTree& tree, const DistributionPair<Scalar>& pair);

template <class Scalar>
struct ConflictResult {
  struct Entry {
    Scalar value;
    int var;
  };
  Scalar value;
  DecisionTree optimal_tree;
  /// Every subcube the recursion visited: both conditionals have mass there.
  std::map<Subcube, Entry> table;
};

/// min over trees computing g of E[N], by recursion over subcubes on which
/// both distributions keep positive mass. Ties take the lowest variable.
template <class Scalar>
ConflictResult<Scalar> chi_star(const DistributionPair<Scalar>& pair);

struct ChiSearchOptions {
  int restarts = 64;
  int max_sweeps = 50;
  /// Initial atom weights are drawn from [0, weight_scale]; ascent steps are
  /// weight_scale/2, weight_scale/4, ..., 1 and weights stay within
  /// [0, 4 * weight_scale].
  int weight_scale = 16;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct ChiSearchResult {
  DistributionPair<Rational> pair;
  /// chi_star of `pair`: a certified lower bound on chi(g).
  Rational value;
  int best_restart;
  std::vector<Rational> restart_values;
  /// Running best after each restart, in restart order.
  std::vector<Rational> history;
  std::int64_t evaluations;
};

/// Random restarts plus coordinate ascent on atom weights of the two
/// distributions, re-solving chi_star exactly at every step. Restart 0 starts
/// from the uniform pair. Output does not depend on `workers`.
ChiSearchResult chi_lower_bound_search(const PartialFn& g, const ChiSearchOptions& options = {});

}  // namespace qclab
