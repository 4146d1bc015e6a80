#pragma once

// Distributional, randomized and zero-error query complexity on truth tables.

#include "qclab/boolfn.hpp"
#include "qclab/dtree.hpp"

#include <utility>
#include <vector>

namespace qclab {

/// Pr_{x ~ mu}[tree(x) != g(x)] over valid inputs.
template <class Scalar>
Scalar error_under(const DecisionTree& tree, const PartialFn& g, const InputDistribution<Scalar>& mu);

template <class Scalar>
struct DistErrorResult {
  Scalar error;
  DecisionTree tree;  // attains `error`
};

/// Minimum error under mu of any tree making at most `depth` queries, by
/// memoized recursion over subcubes. Ties prefer stopping, then the lowest
/// variable, then label 0.
template <class Scalar>
DistErrorResult<Scalar> dist_error_dp(const PartialFn& g, const InputDistribution<Scalar>& mu, int depth);

template <class Scalar>
struct DistComplexity {
  int depth;
  Scalar error;
  DecisionTree tree;
};

/// Smallest depth whose optimal error under mu is at most eps.
template <class Scalar>
DistComplexity<Scalar> dist_complexity(const PartialFn& g, const InputDistribution<Scalar>& mu, const Scalar& eps);

/// Worst-case deterministic query complexity of g (zero error).
int zero_error_depth(const PartialFn& g);

/// A tree of minimum worst-case depth computing g on `region`. Subtrees that
/// contain no valid input become 0-leaves.
DecisionTree zero_error_tree(const PartialFn& g, const Subcube& region);

/// Probability that at least ceil(k/2) of k independent trials, each failing
/// with probability err, fail.
template <class Scalar>
Scalar majority_amplify(const Scalar& err, int repetitions);

enum class GameMethod { FullLp, DoubleOracle };

struct GameOptions {
  /// Convergence threshold on the double-oracle gap in float mode; exact mode
  /// always iterates to a zero gap.
  double tolerance = 1e-9;
  int iteration_cap = 1000;
  /// Guard on distinct error patterns fed to the full LP.
  std::size_t max_strategies = 200000;
};

/// Randomized algorithm and adversarial input distribution for the game
/// "tree of at most `depth` queries vs. valid input, payoff = error".
template <class Scalar>
struct GameSolution {
  int depth = 0;
  Scalar value;
  std::vector<std::pair<DecisionTree, Scalar>> algorithm;
  InputDistribution<Scalar> certificate;
  Scalar gap;
  int iterations = 0;
  std::size_t strategies = 0;
  bool converged = true;
};

template <class Scalar>
GameSolution<Scalar> solve_depth_game(const PartialFn& g, int depth, GameMethod method, const GameOptions& options = {});

template <class Scalar>
struct RandomizedComplexity {
  int depth;
  std::vector<GameSolution<Scalar>> per_depth;
};

/// Smallest depth whose game value is at most eps. Throws NonConvergence when
/// the double oracle exhausts its iteration cap.
template <class Scalar>
RandomizedComplexity<Scalar> randomized_complexity(const PartialFn& g, const Scalar& eps, GameMethod method,
                                                   const GameOptions& options = {});

}  // namespace qclab
