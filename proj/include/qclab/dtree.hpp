#pragma once

// Deterministic decision trees as explicit binary trees.

#include "qclab/boolfn.hpp"

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace qclab {

/// Immutable binary decision tree. Nodes are stored in preorder with the root
/// at index 0, so two trees are structurally equal iff their node arrays are.
/// No variable repeats along a root-to-leaf path.
class DecisionTree {
 public:
  struct Node {
    int var = -1;                     // queried variable, -1 for a leaf
    std::array<int, 2> child{-1, -1};  // child[b] follows query outcome b
    std::optional<int> label;          // leaf output, if any

    bool is_leaf() const { return var < 0; }
    friend bool operator==(const Node&, const Node&) = default;
  };

  static DecisionTree leaf(std::optional<int> label = std::nullopt);
  static DecisionTree query(int var, const DecisionTree& c0, const DecisionTree& c1);

  static constexpr int root() { return 0; }
  std::size_t size() const { return nodes_.size(); }
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  std::span<const Node> nodes() const { return nodes_; }

  /// Longest root-to-leaf query count.
  int max_queries() const;
  /// Highest variable index queried anywhere, -1 for a leaf-only tree.
  int max_var() const;
  /// Number of queries made before reaching each node (0 at the root).
  std::vector<int> query_depths() const;
  std::vector<int> parents() const;
  std::vector<int> leaves() const;
  /// Subcube of inputs reaching each node.
  std::vector<Subcube> node_subcubes(int bits) const;
  /// Copy of the subtree rooted at a node.
  DecisionTree subtree(int id) const;
  /// Leaves reachable from a node's subtree are all labeled.
  bool fully_labeled() const;

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

 private:
  DecisionTree() = default;
  std::vector<Node> nodes_;
};

struct Evaluation {
  int leaf;
  std::optional<int> label;
};

Evaluation evaluate(const DecisionTree& tree, Input x, int bits);

/// Every valid input of g reaches a leaf labeled g(x). Throws when any leaf is
/// unlabeled or the tree queries beyond g's variables.
bool computes(const DecisionTree& tree, const PartialFn& g);

/// Number of canonical trees over `free_vars` variables with at most `cap`
/// queries on any path (labeled leaves 0/1, no repeated path variables, no
/// node whose two children are identical). Returned as double: it overflows
/// integers quickly.
double canonical_tree_count(int free_vars, int cap);

inline constexpr double kEnumerationLimit = 1e7;

/// Streams each canonical tree exactly once, leaf trees first, then by root
/// variable, then child-0-major. With g, only trees computing g are emitted.
/// Throws BudgetExceeded when the projected count exceeds kEnumerationLimit.
void for_each_tree(int bits, int cap, const PartialFn* g, const std::function<void(const DecisionTree&)>& visit);

std::vector<DecisionTree> enumerate_trees(int bits, int cap, const PartialFn* g = nullptr);

/// Pr_{x ~ mu}[the computation reaches node v] = mu(subcube of v).
template <class Scalar>
Scalar reach_probability(const DecisionTree& tree, const InputDistribution<Scalar>& mu, int node);

template <class Scalar>
std::vector<Scalar> reach_probabilities(const DecisionTree& tree, const InputDistribution<Scalar>& mu);

}  // namespace qclab
