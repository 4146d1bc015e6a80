#pragma once

// The coupled routing process on block-structured trees (P), its use as a
// query algorithm on the outer input z (T), and the completion Q that runs a
// conflict-optimal tree on every block T left unresolved.
//
// A tree over blocks * m variables reads block i, bit j as variable i*m + j.

#include "qclab/boolfn.hpp"
#include "qclab/conflict.hpp"
#include "qclab/dtree.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace qclab {

template <class Scalar>
struct BlockContext {
  int blocks;
  DistributionPair<Scalar> pair;  // over one block of m bits

  int block_bits() const { return pair.bits(); }
  int total_bits() const { return blocks * pair.bits(); }
};

struct ProcessTranscript {
  std::vector<int> path;             // nodes visited, root first
  std::vector<int> nq_final;         // 1 while block i has not conflicted
  std::vector<int> conflict_counts;  // N_i: block-i queries made while NQ_i = 1
  std::vector<int> z_queries;        // blocks whose NQ flag dropped in the main run, in order
  std::vector<int> block_queries;    // X_i: every query into block i, all phases
  std::optional<int> output;         // label of the leaf reached by the main tree
  bool truncated = false;            // stopped at the z-query limit

  int y() const { return static_cast<int>(z_queries.size()); }
  int x_total() const;
};

/// A block tree with its branch probabilities precomputed per node.
class CoupledTree {
 public:
  CoupledTree(const DecisionTree& tree, const BlockContext<double>& ctx);

  struct Branch {
    int block = -1;
    int bit = -1;
    std::array<double, 2> p0{0.0, 0.0};  // Pr_{mu_b}[bit = 0 | block subcube]
    std::array<bool, 2> defined{false, false};
  };

  const DecisionTree& tree() const { return tree_; }
  const BlockContext<double>& context() const { return ctx_; }
  const Branch& branch(int node) const { return branches_[static_cast<std::size_t>(node)]; }
  const Subcube& cube(int node) const { return cubes_[static_cast<std::size_t>(node)]; }

  /// One run of the main phase. Stream (seed, run, block) supplies block i's
  /// draws. With `t_mode` the run is T: dropping NQ_i queries z_i, and if
  /// `z_query_limit` >= 0 the run stops (truncated) instead of making the
  /// (limit+1)-th z query.
  ProcessTranscript run(std::span<const int> z, std::uint64_t seed, std::uint64_t run, bool t_mode,
                        int z_query_limit = -1) const;

 private:
  DecisionTree tree_;
  BlockContext<double> ctx_;
  std::vector<Subcube> cubes_;
  std::vector<Branch> branches_;
};

template <class Scalar>
ProcessTranscript simulate_P(const DecisionTree& tree, const BlockContext<Scalar>& ctx, std::span<const int> z,
                             std::uint64_t seed, std::uint64_t run = 0);

template <class Scalar>
ProcessTranscript simulate_T(const DecisionTree& aprime, const BlockContext<Scalar>& ctx, std::span<const int> z,
                             std::uint64_t seed, std::uint64_t run = 0);

/// Q: T on `aprime`, then for each block still at NQ_i = 1 the single-block
/// process on `bopt` started from that block's current subcube (both
/// distributions conditioned on it) until it conflicts.
class QSimulator {
 public:
  QSimulator(const DecisionTree& aprime, const DecisionTree& bopt, const BlockContext<double>& ctx);
  ProcessTranscript run(std::span<const int> z, std::uint64_t seed, std::uint64_t run) const;

 private:
  CoupledTree main_;
  DecisionTree bopt_;
};

template <class Scalar>
ProcessTranscript simulate_Q(const DecisionTree& aprime, const DecisionTree& bopt, const BlockContext<Scalar>& ctx,
                             std::span<const int> z, std::uint64_t seed, std::uint64_t run = 0);

/// Pr[process P reaches v] for every node, by a forward sweep over
/// (node, set of unconflicted blocks). Exact in rational mode.
template <class Scalar>
std::vector<Scalar> p_reach_probability_exact(const DecisionTree& tree, const BlockContext<Scalar>& ctx,
                                              std::span<const int> z);

/// Pr_{x ~ gamma_z}[the tree reaches v] = prod_i mu_{z_i}(v^(i)).
template <class Scalar>
std::vector<Scalar> gamma_reach_probability(const DecisionTree& tree, const BlockContext<Scalar>& ctx,
                                            std::span<const int> z);

template <class Scalar>
struct ReachReport {
  std::vector<Scalar> process;
  std::vector<Scalar> product;
  Scalar max_discrepancy;
  bool pass;
};

template <class Scalar>
ReachReport<Scalar> verify_reach_equivalence(const DecisionTree& tree, const BlockContext<Scalar>& ctx,
                                             std::span<const int> z, double tol);

/// A random block instance: two-sided partial g on m bits, rational pair with
/// small integer weights, random tree of bounded depth over blocks*m
/// variables, random z.
struct ReachInstance {
  DecisionTree tree;
  BlockContext<Rational> ctx;
  std::vector<int> z;
};

struct ReachInstanceShape {
  int max_block_bits = 3;
  int max_blocks = 2;
  int max_depth = 4;
};

ReachInstance random_reach_instance(std::uint64_t seed, const ReachInstanceShape& shape = {});

/// Random two-sided partial function on `bits` bits.
PartialFn random_partial_fn(int bits, std::uint64_t seed, double undefined_rate = 0.25);

/// Random rational distribution on `support` with integer weights in
/// [0, max_weight], at least one positive.
InputDistribution<Rational> random_rational_distribution(int bits, std::span<const Input> support,
                                                         std::uint64_t seed, int max_weight = 6);

}  // namespace qclab
