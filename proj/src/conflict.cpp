#include "qclab/conflict.hpp"

#include "qclab/measures.hpp"
#include "qclab/parallel.hpp"
#include "qclab/rng.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <random>

namespace qclab {

template <class Scalar>
DistributionPair<Scalar>::DistributionPair(PartialFn g, InputDistribution<Scalar> mu0, InputDistribution<Scalar> mu1)
    : g_(std::move(g)), mu0_(std::move(mu0)), mu1_(std::move(mu1)) {
  if (mu0_.bits() != g_.bits() || mu1_.bits() != g_.bits()) {
    throw PreconditionError("distribution pair width differs from function width");
  }
  for (Input x = 0; x < g_.size(); ++x) {
    if (mu0_[x] > Scalar(0) && g_(x) != Value::Zero) {
      throw PreconditionError("mu0 charges input " + std::to_string(x) + " outside g^-1(0)");
    }
    if (mu1_[x] > Scalar(0) && g_(x) != Value::One) {
      throw PreconditionError("mu1 charges input " + std::to_string(x) + " outside g^-1(1)");
    }
  }
}

template <class Scalar>
DistributionPair<Scalar> DistributionPair<Scalar>::from_mixture(const PartialFn& g,
                                                                const InputDistribution<Scalar>& mu) {
  auto [mu0, mu1] = split_by_value(mu, g);
  return DistributionPair(g, std::move(mu0), std::move(mu1));
}

template <class Scalar>
DistributionPair<Scalar> DistributionPair<Scalar>::condition(const Subcube& c) const {
  return DistributionPair(g_, qclab::condition(mu0_, c), qclab::condition(mu1_, c));
}

template <class Scalar>
Scalar delta_at(const DistributionPair<Scalar>& pair, const Subcube& c, int var) {
  const Scalar p0 = marginal_bit(pair.mu(0), var, c);
  const Scalar p1 = marginal_bit(pair.mu(1), var, c);
  if (mass_of(pair.mu(0), c) == Scalar(0) || mass_of(pair.mu(1), c) == Scalar(0)) {
    throw ZeroMassError("delta undefined: one side has no mass on " + c.to_string());
  }
  return p0 < p1 ? p1 - p0 : p0 - p1;
}

template <class Scalar>
std::vector<Scalar> unconflicted_weights(const DecisionTree& tree, const DistributionPair<Scalar>& pair) {
  const auto cubes = tree.node_subcubes(pair.bits());
  std::vector<Scalar> w(tree.size(), Scalar(0));
  w[0] = Scalar(1);
  // Preorder: a node's weight is final before its children are visited.
  for (std::size_t v = 0; v < tree.size(); ++v) {
    const auto& n = tree.node(static_cast<int>(v));
    if (n.is_leaf() || w[v] == Scalar(0)) continue;
    const Scalar p0 = marginal_bit(pair.mu(0), n.var, cubes[v]);
    const Scalar p1 = marginal_bit(pair.mu(1), n.var, cubes[v]);
    const Scalar lo = std::min(p0, p1);
    const Scalar hi = std::max(p0, p1);
    w[static_cast<std::size_t>(n.child[0])] = w[v] * lo;
    w[static_cast<std::size_t>(n.child[1])] = w[v] * (Scalar(1) - hi);
  }
  return w;
}

template <class Scalar>
Scalar expected_conflict_queries(const DecisionTree& tree, const DistributionPair<Scalar>& pair) {
  if (!computes(tree, pair.function())) throw PreconditionError("tree does not compute g");
  const auto w = unconflicted_weights(tree, pair);
  Scalar total(0);
  for (std::size_t v = 0; v < tree.size(); ++v) {
    if (w[v] == Scalar(0)) continue;
    // A leaf reached without conflict would hold inputs of both g-values.
    if (tree.node(static_cast<int>(v)).is_leaf()) throw Error("unconflicted mass reached a leaf");
    total += w[v];
  }
  return total;
}

namespace {

template <class Scalar>
class ChiStarSolver {
 public:
  explicit ChiStarSolver(const DistributionPair<Scalar>& pair) : pair_(pair) {}

  using Entry = typename ConflictResult<Scalar>::Entry;

  const Entry& best(const Subcube& c) {
    if (auto it = table_.find(c); it != table_.end()) return it->second;

    const Scalar m0 = mass_of(pair_.mu(0), c);
    const Scalar m1 = mass_of(pair_.mu(1), c);
    std::optional<Entry> chosen;
    for (int var : c.free_vars()) {
      const Scalar p0 = mass_of(pair_.mu(0), c.with(var, 0)) / m0;
      const Scalar p1 = mass_of(pair_.mu(1), c.with(var, 0)) / m1;
      const Scalar lo = std::min(p0, p1);
      const Scalar stay_one = Scalar(1) - std::max(p0, p1);
      Scalar cand(1);
      if (lo > Scalar(0)) cand += lo * best(c.with(var, 0)).value;
      if (stay_one > Scalar(0)) cand += stay_one * best(c.with(var, 1)).value;
      if (!chosen || cand < chosen->value) chosen = Entry{std::move(cand), var};
    }
    // Both supports on a fully fixed subcube would need one input in both
    // g^-1(0) and g^-1(1).
    if (!chosen) throw Error("chi_star: both distributions charge subcube " + c.to_string() + " with no free variable");
    return table_.emplace(c, std::move(*chosen)).first->second;
  }

  DecisionTree extract(const Subcube& c) {
    const Entry e = best(c);
    std::array<DecisionTree, 2> children{DecisionTree::leaf(), DecisionTree::leaf()};
    for (int b = 0; b < 2; ++b) {
      const Subcube child = c.with(e.var, b);
      if (mass_of(pair_.mu(0), child) > Scalar(0) && mass_of(pair_.mu(1), child) > Scalar(0)) {
        children[static_cast<std::size_t>(b)] = extract(child);
      } else {
        // Unconflicted mass never arrives here; any completion computing g
        // leaves the value unchanged.
        children[static_cast<std::size_t>(b)] = zero_error_tree(pair_.function(), child);
      }
    }
    return DecisionTree::query(e.var, children[0], children[1]);
  }

  std::map<Subcube, Entry> take_table() { return std::move(table_); }

 private:
  const DistributionPair<Scalar>& pair_;
  std::map<Subcube, Entry> table_;
};

}  // namespace

template <class Scalar>
ConflictResult<Scalar> chi_star(const DistributionPair<Scalar>& pair) {
  ChiStarSolver<Scalar> solver(pair);
  const Subcube full(pair.bits());
  Scalar value = solver.best(full).value;
  DecisionTree tree = solver.extract(full);
  return {std::move(value), std::move(tree), solver.take_table()};
}

namespace {

struct WeightedPair {
  std::vector<Input> atoms;    // g^-1(0) followed by g^-1(1)
  std::size_t zeros;           // atoms[0, zeros) belong to mu0
  std::vector<long> weights;

  long side_total(int b) const {
    long s = 0;
    const std::size_t lo = b == 0 ? 0 : zeros;
    const std::size_t hi = b == 0 ? zeros : atoms.size();
    for (std::size_t i = lo; i < hi; ++i) s += weights[i];
    return s;
  }

  DistributionPair<Rational> to_pair(const PartialFn& g) const {
    const auto n = static_cast<Eigen::Index>(g.size());
    Vector<Rational> m0 = Vector<Rational>::Zero(n), m1 = Vector<Rational>::Zero(n);
    const long t0 = side_total(0), t1 = side_total(1);
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      if (i < zeros) {
        m0[atoms[i]] = Rational(weights[i], t0);
      } else {
        m1[atoms[i]] = Rational(weights[i], t1);
      }
    }
    return DistributionPair<Rational>(g, InputDistribution<Rational>(g.bits(), std::move(m0)),
                                      InputDistribution<Rational>(g.bits(), std::move(m1)));
  }
};

struct RestartOutcome {
  WeightedPair best;
  Rational value;
  std::int64_t evaluations = 0;
};

RestartOutcome run_restart(const PartialFn& g, const ChiSearchOptions& opt, int restart) {
  WeightedPair wp;
  wp.atoms = g.preimage(0);
  wp.zeros = wp.atoms.size();
  for (Input x : g.preimage(1)) wp.atoms.push_back(x);
  wp.weights.assign(wp.atoms.size(), 1);

  const long scale = std::max(1, opt.weight_scale);
  std::mt19937_64 rng(derive_seed(opt.seed, static_cast<std::uint64_t>(restart)));
  if (restart > 0) {
    std::uniform_int_distribution<long> draw(0, scale);
    for (auto& w : wp.weights) w = draw(rng);
    for (int b = 0; b < 2; ++b) {
      if (wp.side_total(b) == 0) {
        const std::size_t lo = b == 0 ? 0 : wp.zeros;
        const std::size_t hi = b == 0 ? wp.zeros : wp.atoms.size();
        std::uniform_int_distribution<std::size_t> pick(lo, hi - 1);
        wp.weights[pick(rng)] = 1;
      }
    }
  }

  RestartOutcome out{wp, chi_star(wp.to_pair(g)).value, 1};
  std::vector<long> steps;
  for (long s = scale / 2; s >= 1; s /= 2) steps.push_back(s);
  if (steps.empty()) steps.push_back(1);

  std::vector<std::size_t> order(wp.atoms.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    bool improved = false;
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t atom : order) {
      for (long s : steps) {
        for (long sign : {+1L, -1L}) {
          WeightedPair cand = out.best;
          const long w = cand.weights[atom] + sign * s;
          if (w < 0 || w > 4 * scale) continue;
          cand.weights[atom] = w;
          if (cand.side_total(0) == 0 || cand.side_total(1) == 0) continue;
          Rational v = chi_star(cand.to_pair(g)).value;
          ++out.evaluations;
          if (v > out.value) {
            out.best = std::move(cand);
            out.value = std::move(v);
            improved = true;
          }
        }
      }
    }
    if (!improved) break;
  }
  return out;
}

}  // namespace

ChiSearchResult chi_lower_bound_search(const PartialFn& g, const ChiSearchOptions& options) {
  if (!g.is_two_sided()) throw PreconditionError("conflict complexity needs both function values");
  const int restarts = std::max(1, options.restarts);
  std::vector<std::optional<RestartOutcome>> outcomes(static_cast<std::size_t>(restarts));
  parallel_for(outcomes.size(), options.workers,
               [&](std::size_t i) { outcomes[i] = run_restart(g, options, static_cast<int>(i)); });

  std::size_t best = 0;
  std::vector<Rational> values, history;
  std::int64_t evaluations = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    values.push_back(outcomes[i]->value);
    evaluations += outcomes[i]->evaluations;
    if (outcomes[i]->value > outcomes[best]->value) best = i;
    history.push_back(outcomes[best]->value);
  }
  return ChiSearchResult{outcomes[best]->best.to_pair(g), outcomes[best]->value, static_cast<int>(best),
                         std::move(values), std::move(history), evaluations};
}

#define QCLAB_INSTANTIATE(S)                                                                      \
  template class DistributionPair<S>;                                                             \
  template S delta_at(const DistributionPair<S>&, const Subcube&, int);                           \
  template std::vector<S> unconflicted_weights(const DecisionTree&, const DistributionPair<S>&);  \
  template S expected_conflict_queries(const DecisionTree&, const DistributionPair<S>&);          \
  template ConflictResult<S> chi_star(const DistributionPair<S>&);

QCLAB_INSTANTIATE(Rational)
QCLAB_INSTANTIATE(double)
#undef QCLAB_INSTANTIATE

}  // namespace qclab
