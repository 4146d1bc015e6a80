#include "qclab/dtree.hpp"

#include <algorithm>
#include <map>

namespace qclab {
namespace {

bool queries_var(std::span<const DecisionTree::Node> nodes, int var) {
  return std::any_of(nodes.begin(), nodes.end(), [var](const auto& n) { return n.var == var; });
}

}  // namespace

DecisionTree DecisionTree::leaf(std::optional<int> label) {
  DecisionTree t;
  Node n;
  n.label = label;
  t.nodes_.push_back(n);
  return t;
}

DecisionTree DecisionTree::query(int var, const DecisionTree& c0, const DecisionTree& c1) {
  if (var < 0) throw PreconditionError("negative query variable");
  if (queries_var(c0.nodes_, var) || queries_var(c1.nodes_, var)) {
    throw PreconditionError("variable " + std::to_string(var) + " repeats along a path");
  }
  DecisionTree t;
  t.nodes_.reserve(1 + c0.size() + c1.size());
  const int off0 = 1;
  const int off1 = 1 + static_cast<int>(c0.size());
  Node root;
  root.var = var;
  root.child = {off0, off1};
  t.nodes_.push_back(root);
  for (const DecisionTree* sub : {&c0, &c1}) {
    const int off = sub == &c0 ? off0 : off1;
    for (Node n : sub->nodes_) {
      if (!n.is_leaf()) {
        n.child[0] += off;
        n.child[1] += off;
      }
      t.nodes_.push_back(n);
    }
  }
  return t;
}

int DecisionTree::max_queries() const {
  const auto depth = query_depths();
  int best = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].is_leaf()) best = std::max(best, depth[i]);
  return best;
}

int DecisionTree::max_var() const {
  int best = -1;
  for (const auto& n : nodes_) best = std::max(best, n.var);
  return best;
}

std::vector<int> DecisionTree::query_depths() const {
  std::vector<int> depth(nodes_.size(), 0);
  // Preorder: parents precede children.
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (n.is_leaf()) continue;
    for (int c : n.child) depth[static_cast<std::size_t>(c)] = depth[i] + 1;
  }
  return depth;
}

std::vector<int> DecisionTree::parents() const {
  std::vector<int> parent(nodes_.size(), -1);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (n.is_leaf()) continue;
    for (int c : n.child) parent[static_cast<std::size_t>(c)] = static_cast<int>(i);
  }
  return parent;
}

std::vector<int> DecisionTree::leaves() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].is_leaf()) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<Subcube> DecisionTree::node_subcubes(int bits) const {
  if (max_var() >= bits) {
    throw PreconditionError("tree queries variable " + std::to_string(max_var()) + " beyond width " +
                            std::to_string(bits));
  }
  std::vector<Subcube> cubes(nodes_.size(), Subcube(bits));
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (n.is_leaf()) continue;
    for (int b = 0; b < 2; ++b) cubes[static_cast<std::size_t>(n.child[b])] = cubes[i].with(n.var, b);
  }
  return cubes;
}

DecisionTree DecisionTree::subtree(int id) const {
  const Node& n = node(id);
  if (n.is_leaf()) return leaf(n.label);
  return query(n.var, subtree(n.child[0]), subtree(n.child[1]));
}

bool DecisionTree::fully_labeled() const {
  return std::all_of(nodes_.begin(), nodes_.end(), [](const Node& n) { return !n.is_leaf() || n.label.has_value(); });
}

Evaluation evaluate(const DecisionTree& tree, Input x, int bits) {
  int v = DecisionTree::root();
  while (!tree.node(v).is_leaf()) {
    const auto& n = tree.node(v);
    v = n.child[bit_of(x, n.var, bits)];
  }
  return {v, tree.node(v).label};
}

bool computes(const DecisionTree& tree, const PartialFn& g) {
  if (!tree.fully_labeled()) throw PreconditionError("tree has an unlabeled leaf");
  if (tree.max_var() >= g.bits()) throw PreconditionError("tree queries beyond the function's variables");
  for (Input x = 0; x < g.size(); ++x) {
    if (!g.is_valid(x)) continue;
    const auto ev = evaluate(tree, x, g.bits());
    if (*ev.label != static_cast<int>(g(x))) return false;
  }
  return true;
}

double canonical_tree_count(int free_vars, int cap) {
  if (free_vars == 0 || cap == 0) return 2.0;
  const double sub = canonical_tree_count(free_vars - 1, cap - 1);
  return 2.0 + static_cast<double>(free_vars) * (sub * sub - sub);
}

namespace {

class TreeEnumerator {
 public:
  TreeEnumerator(int bits, const PartialFn* g) : bits_(bits), g_(g) {}

  const std::vector<DecisionTree>& trees(const Subcube& c, int cap) {
    const auto key = std::make_pair(c.key(), cap);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    std::vector<DecisionTree> out;
    for (int label = 0; label < 2; ++label)
      if (leaf_allowed(c, label)) out.push_back(DecisionTree::leaf(label));
    if (cap > 0) {
      for (int var : c.free_vars()) {
        // Copies: the recursive calls may rehash memo_.
        const std::vector<DecisionTree> lo = trees(c.with(var, 0), cap - 1);
        const std::vector<DecisionTree>& hi = trees(c.with(var, 1), cap - 1);
        for (const auto& a : lo)
          for (const auto& b : hi)
            if (!(a == b)) out.push_back(DecisionTree::query(var, a, b));
      }
    }
    return memo_.emplace(key, std::move(out)).first->second;
  }

 private:
  bool leaf_allowed(const Subcube& c, int label) const {
    if (g_ == nullptr) return true;
    bool ok = true;
    const Value other = label == 0 ? Value::One : Value::Zero;
    c.for_each_point([&](Input x) { ok = ok && (*g_)(x) != other; });
    return ok;
  }

  int bits_;
  const PartialFn* g_;
  std::map<std::pair<std::uint64_t, int>, std::vector<DecisionTree>> memo_;
};

}  // namespace

void for_each_tree(int bits, int cap, const PartialFn* g, const std::function<void(const DecisionTree&)>& visit) {
  if (g != nullptr && g->bits() != bits) throw PreconditionError("function width differs from enumeration width");
  if (cap < 0) throw PreconditionError("negative depth cap");
  const double projected = canonical_tree_count(bits, std::min(cap, bits));
  if (projected > kEnumerationLimit) {
    throw BudgetExceeded("enumeration too large: projected " + std::to_string(projected) + " trees");
  }
  TreeEnumerator e(bits, g);
  for (const auto& t : e.trees(Subcube(bits), std::min(cap, bits))) visit(t);
}

std::vector<DecisionTree> enumerate_trees(int bits, int cap, const PartialFn* g) {
  std::vector<DecisionTree> out;
  for_each_tree(bits, cap, g, [&](const DecisionTree& t) { out.push_back(t); });
  return out;
}

template <class Scalar>
Scalar reach_probability(const DecisionTree& tree, const InputDistribution<Scalar>& mu, int node) {
  return mass_of(mu, tree.node_subcubes(mu.bits())[static_cast<std::size_t>(node)]);
}

template <class Scalar>
std::vector<Scalar> reach_probabilities(const DecisionTree& tree, const InputDistribution<Scalar>& mu) {
  const auto cubes = tree.node_subcubes(mu.bits());
  std::vector<Scalar> out;
  out.reserve(cubes.size());
  for (const auto& c : cubes) out.push_back(mass_of(mu, c));
  return out;
}

template Rational reach_probability(const DecisionTree&, const InputDistribution<Rational>&, int);
template double reach_probability(const DecisionTree&, const InputDistribution<double>&, int);
template std::vector<Rational> reach_probabilities(const DecisionTree&, const InputDistribution<Rational>&);
template std::vector<double> reach_probabilities(const DecisionTree&, const InputDistribution<double>&);

}  // namespace qclab
