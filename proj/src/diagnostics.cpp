#include "qclab/diagnostics.hpp"

#include "qclab/measures.hpp"

#include <algorithm>
#include <cmath>

namespace qclab {

double binary_entropy(double p) {
  double h = 0.0;
  if (p > 0.0) h -= p * std::log(p);
  if (p < 1.0) h -= (1.0 - p) * std::log(1.0 - p);
  return h;
}

namespace {

constexpr double kMiSlack = 1e-12;

// I(g(x) : x_j) under mu | C; requires mu(C) > 0.
template <class Scalar>
double conditional_mi(const PartialFn& g, const InputDistribution<Scalar>& mu, const Subcube& c, int j) {
  const double total = to_double(mass_of(mu, c));
  double joint[2][2];
  for (int b = 0; b < 2; ++b)
    for (int a = 0; a < 2; ++a) joint[b][a] = to_double(value_mass(mu, g, c.with(j, a), b)) / total;
  const double pb[2] = {joint[0][0] + joint[0][1], joint[1][0] + joint[1][1]};
  const double pa[2] = {joint[0][0] + joint[1][0], joint[0][1] + joint[1][1]};
  double mi = 0.0;
  for (int b = 0; b < 2; ++b)
    for (int a = 0; a < 2; ++a)
      if (joint[b][a] > 0.0) mi += joint[b][a] * std::log(joint[b][a] / (pb[b] * pa[a]));
  return std::max(0.0, mi);
}

// Delta from the two value-restricted masses of mu; 1 when a side is empty.
template <class Scalar>
Scalar mixture_delta(const PartialFn& g, const InputDistribution<Scalar>& mu, const Subcube& c, int var) {
  const Scalar m0 = value_mass(mu, g, c, 0);
  const Scalar m1 = value_mass(mu, g, c, 1);
  if (m0 == Scalar(0) || m1 == Scalar(0)) return Scalar(1);
  const Subcube c0 = c.with(var, 0);
  const Scalar d = value_mass(mu, g, c0, 0) / m0 - value_mass(mu, g, c0, 1) / m1;
  return d < Scalar(0) ? -d : d;
}

template <class Scalar>
int guess_label(const PartialFn& g, const InputDistribution<Scalar>& mu, const Subcube& c) {
  return value_mass(mu, g, c, 1) > value_mass(mu, g, c, 0) ? 1 : 0;
}

template <class Scalar>
bool is_biased(const Scalar& balance) {
  return balance * Scalar(9) <= Scalar(1);
}

}  // namespace

template <class Scalar>
Scalar balance_at(const PartialFn& g, const InputDistribution<Scalar>& mu, const Subcube& c) {
  const Scalar total = mass_of(mu, c);
  if (total == Scalar(0)) return Scalar(0);
  return value_mass(mu, g, c, 0) / total * (value_mass(mu, g, c, 1) / total);
}

template <class Scalar>
Scalar vertex_delta(const DistributionPair<Scalar>& pair, const Subcube& c, int var) {
  if (mass_of(pair.mu(0), c) == Scalar(0) || mass_of(pair.mu(1), c) == Scalar(0)) return Scalar(1);
  return delta_at(pair, c, var);
}

template <class Scalar>
InfoReport<Scalar> info_bound_check(const PartialFn& g, const InputDistribution<Scalar>& mu, const Subcube& c, int j,
                                    double constant) {
  if (mu.bits() != g.bits() || c.bits() != g.bits()) throw PreconditionError("width mismatch");
  if (j < 0 || j >= g.bits() || c.is_fixed(j)) throw PreconditionError("queried variable must be free on the vertex");
  if (!supported_on_valid(mu, g)) throw PreconditionError("mu charges an input outside the domain of g");
  if (mass_of(mu, c) == Scalar(0)) throw ZeroMassError("mu has no mass on " + c.to_string());

  InfoReport<Scalar> r{};
  r.mi_nats = conditional_mi(g, mu, c, j);
  r.mi_bits = r.mi_nats / std::log(2.0);
  r.balance = balance_at(g, mu, c);
  r.one_sided = value_mass(mu, g, c, 0) == Scalar(0) || value_mass(mu, g, c, 1) == Scalar(0);
  r.delta = r.one_sided ? Scalar(0) : mixture_delta(g, mu, c, j);
  const double bd = to_double(r.balance * r.delta);
  r.constant = constant;
  r.rhs = constant * bd * bd;
  r.holds = r.mi_nats + kMiSlack >= r.rhs;
  r.literal_rhs = kLiteralConstant * bd * bd;
  r.literal_holds = r.mi_nats + kMiSlack >= r.literal_rhs;
  return r;
}

template <class Scalar>
DeltaProfile<Scalar> delta_sum_profile(const DecisionTree& tree, const PartialFn& g,
                                       const InputDistribution<Scalar>& mu, int horizon, TranscriptFilter filter,
                                       const std::optional<Scalar>& d) {
  if (horizon < 0) throw PreconditionError("horizon must be nonnegative");
  if (!computes(tree, g)) throw PreconditionError("tree does not compute g");
  const auto cubes = tree.node_subcubes(g.bits());
  const auto depth = tree.query_depths();
  const auto parent = tree.parents();

  std::vector<Scalar> num(static_cast<std::size_t>(horizon), Scalar(0));
  Scalar den(0);
  for (int leaf : tree.leaves()) {
    const Scalar w = mass_of(mu, cubes[static_cast<std::size_t>(leaf)]);
    if (w == Scalar(0)) continue;
    std::vector<int> path;
    for (int v = parent[static_cast<std::size_t>(leaf)]; v >= 0; v = parent[static_cast<std::size_t>(v)]) path.push_back(v);
    std::reverse(path.begin(), path.end());

    if (filter.kind == TranscriptFilter::Kind::NotBiasedOrStop) {
      if (depth[static_cast<std::size_t>(leaf)] <= filter.budget) continue;
      bool biased = false;
      for (int v : path)
        if (depth[static_cast<std::size_t>(v)] <= filter.budget &&
            is_biased(balance_at(g, mu, cubes[static_cast<std::size_t>(v)])))
          biased = true;
      if (biased) continue;
    }
    den += w;
    for (int t = 0; t < horizon; ++t) {
      const auto ut = static_cast<std::size_t>(t);
      if (ut < path.size()) {
        const int v = path[ut];
        num[ut] += w * mixture_delta(g, mu, cubes[static_cast<std::size_t>(v)], tree.node(v).var);
      } else {
        num[ut] += w;
      }
    }
  }

  DeltaProfile<Scalar> out{den, den * Scalar(4) >= Scalar(3), {}, {}, {}};
  if (den == Scalar(0)) return out;
  Scalar run(0);
  for (auto& x : num) {
    out.expectation.push_back(x / den);
    run += out.expectation.back();
    out.running_sum.push_back(run);
  }
  if (d && *d > Scalar(0)) {
    for (int i = 1;; ++i) {
      const auto h = ceil_to_int(Scalar(10 * i) * *d);
      if (h > horizon) break;
      DeltaCheckpoint<Scalar> cp{i, static_cast<int>(h), h > 0 ? out.running_sum[static_cast<std::size_t>(h - 1)] : Scalar(0),
                                 Scalar(13 * i) / Scalar(20), false};
      cp.holds = cp.sum >= cp.threshold;
      out.checkpoints.push_back(std::move(cp));
    }
  }
  return out;
}

template <class Scalar>
int default_truncation_budget(const Scalar& d) {
  return static_cast<int>(ceil_to_int(Scalar(10) * d * d));
}

namespace {

template <class Scalar>
DecisionTree truncate_copy(const DecisionTree& b, int v, int depth, int budget, const PartialFn& g,
                           const InputDistribution<Scalar>& mu, const std::vector<Subcube>& cubes) {
  const auto& node = b.node(v);
  if (node.is_leaf()) return DecisionTree::leaf(node.label);
  if (depth == budget) return DecisionTree::leaf(guess_label(g, mu, cubes[static_cast<std::size_t>(v)]));
  return DecisionTree::query(node.var, truncate_copy(b, node.child[0], depth + 1, budget, g, mu, cubes),
                             truncate_copy(b, node.child[1], depth + 1, budget, g, mu, cubes));
}

}  // namespace

template <class Scalar>
TruncationResult<Scalar> truncate_and_guess(const PartialFn& g, const InputDistribution<Scalar>& mu, int budget) {
  const auto pair = DistributionPair<Scalar>::from_mixture(g, mu);
  const auto chi = chi_star(pair);
  const DecisionTree& b = chi.optimal_tree;
  TruncationReport<Scalar> rep{};
  rep.d = chi.value;
  rep.budget = budget < 0 ? default_truncation_budget(rep.d) : budget;

  const auto bcubes = b.node_subcubes(g.bits());
  DecisionTree bp = truncate_copy(b, DecisionTree::root(), 0, rep.budget, g, mu, bcubes);
  rep.depth = bp.max_queries();
  rep.error = error_under(bp, g, mu);
  rep.within_bound = rep.error * Scalar(95) <= Scalar(47);

  // Event masses on B, walking only the first `budget` queries.
  const auto bdepth = b.query_depths();
  rep.stop_mass = rep.budget_mass = rep.biased_fraction = Scalar(0);
  Scalar union_mass(0);
  std::vector<bool> under_biased(b.size(), false);
  for (std::size_t v = 0; v < b.size(); ++v) {
    const auto& node = b.node(static_cast<int>(v));
    const int dv = bdepth[v];
    if (dv > rep.budget) continue;
    const Scalar w = mass_of(mu, bcubes[v]);
    const bool biased_here = !under_biased[v] && w > Scalar(0) && is_biased(balance_at(g, mu, bcubes[v]));
    if (node.is_leaf()) {
      rep.stop_mass += w;
      if (!under_biased[v] && !biased_here) union_mass += w;
    } else if (dv == rep.budget) {
      rep.budget_mass += w;
    }
    if (biased_here) {
      rep.biased_fraction += w;
      union_mass += w;
    }
    if (!node.is_leaf() && (under_biased[v] || biased_here)) {
      under_biased[static_cast<std::size_t>(node.child[0])] = true;
      under_biased[static_cast<std::size_t>(node.child[1])] = true;
    }
  }
  rep.event_probability = Scalar(1) - union_mass;

  // Per-vertex error of B' below every biased vertex, bottom-up.
  const auto cubes = bp.node_subcubes(g.bits());
  std::vector<Scalar> err(bp.size(), Scalar(0));
  for (std::size_t k = bp.size(); k-- > 0;) {
    const auto& node = bp.node(static_cast<int>(k));
    if (node.is_leaf()) {
      err[k] = value_mass(mu, g, cubes[k], 1 - node.label.value_or(0));
    } else {
      err[k] = err[static_cast<std::size_t>(node.child[0])] + err[static_cast<std::size_t>(node.child[1])];
    }
  }
  rep.case1_holds = true;
  for (std::size_t k = 0; k < bp.size(); ++k) {
    const Scalar w = mass_of(mu, cubes[k]);
    if (w == Scalar(0) || !is_biased(balance_at(g, mu, cubes[k]))) continue;
    ++rep.biased_vertices;
    if (err[k] * Scalar(3) > w + zero_tolerance<Scalar>()) rep.case1_holds = false;
  }
  return {std::move(bp), std::move(rep)};
}

template <class Scalar>
TranscriptInformation transcript_information(const DecisionTree& tree, const PartialFn& g,
                                             const InputDistribution<Scalar>& mu) {
  const auto cubes = tree.node_subcubes(g.bits());
  const auto depth = tree.query_depths();
  const double p1 = to_double(value_mass(mu, g, Subcube(g.bits()), 1));
  const double p0 = to_double(value_mass(mu, g, Subcube(g.bits()), 0));
  const double pv[2] = {p0, p1};

  TranscriptInformation out{0.0, 0.0, std::vector<double>(static_cast<std::size_t>(std::max(0, tree.max_queries())), 0.0)};
  for (std::size_t v = 0; v < tree.size(); ++v) {
    const auto& node = tree.node(static_cast<int>(v));
    const double w = to_double(mass_of(mu, cubes[v]));
    if (w <= 0.0) continue;
    if (node.is_leaf()) {
      for (int b = 0; b < 2; ++b) {
        const double joint = to_double(value_mass(mu, g, cubes[v], b));
        if (joint > 0.0) out.direct += joint * std::log(joint / (w * pv[b]));
      }
    } else {
      out.per_step[static_cast<std::size_t>(depth[v])] += w * conditional_mi(g, mu, cubes[v], node.var);
    }
  }
  for (double s : out.per_step) out.chain_sum += s;
  return out;
}

#define QCLAB_INSTANTIATE(S)                                                                                    \
  template S balance_at(const PartialFn&, const InputDistribution<S>&, const Subcube&);                         \
  template S vertex_delta(const DistributionPair<S>&, const Subcube&, int);                                     \
  template InfoReport<S> info_bound_check(const PartialFn&, const InputDistribution<S>&, const Subcube&, int,   \
                                          double);                                                              \
  template DeltaProfile<S> delta_sum_profile(const DecisionTree&, const PartialFn&, const InputDistribution<S>&, \
                                             int, TranscriptFilter, const std::optional<S>&);                   \
  template int default_truncation_budget(const S&);                                                             \
  template TruncationResult<S> truncate_and_guess(const PartialFn&, const InputDistribution<S>&, int);          \
  template TranscriptInformation transcript_information(const DecisionTree&, const PartialFn&,                  \
                                                        const InputDistribution<S>&);

QCLAB_INSTANTIATE(Rational)
QCLAB_INSTANTIATE(double)
#undef QCLAB_INSTANTIATE

}  // namespace qclab
