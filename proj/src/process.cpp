#include "qclab/process.hpp"

#include "qclab/rng.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <numeric>
#include <optional>
#include <random>

namespace qclab {

int ProcessTranscript::x_total() const { return std::accumulate(block_queries.begin(), block_queries.end(), 0); }

namespace {

template <class Scalar>
void check_context(const DecisionTree& tree, const BlockContext<Scalar>& ctx, std::span<const int> z) {
  if (ctx.blocks < 1) throw PreconditionError("block count must be positive");
  if (static_cast<int>(z.size()) != ctx.blocks) throw PreconditionError("z has the wrong length");
  for (int zi : z)
    if (zi != 0 && zi != 1) throw PreconditionError("z must be a bit string");
  if (ctx.total_bits() > kMaxBits) throw PreconditionError("block instance too wide");
  if (tree.max_var() >= ctx.total_bits()) throw PreconditionError("tree queries beyond the block variables");
}

}  // namespace

CoupledTree::CoupledTree(const DecisionTree& tree, const BlockContext<double>& ctx)
    : tree_(tree), ctx_(ctx), cubes_(tree.node_subcubes(ctx.total_bits())), branches_(tree.size()) {
  if (ctx.blocks < 1) throw PreconditionError("block count must be positive");
  const int m = ctx.block_bits();
  for (std::size_t v = 0; v < tree_.size(); ++v) {
    const auto& n = tree_.node(static_cast<int>(v));
    if (n.is_leaf()) continue;
    Branch& br = branches_[v];
    br.block = n.var / m;
    br.bit = n.var % m;
    const Subcube local = cubes_[v].project(br.block * m, m);
    for (int b = 0; b < 2; ++b) {
      if (mass_of(ctx.pair.mu(b), local) > 0.0) {
        br.p0[static_cast<std::size_t>(b)] = marginal_bit(ctx.pair.mu(b), br.bit, local);
        br.defined[static_cast<std::size_t>(b)] = true;
      }
    }
  }
}

ProcessTranscript CoupledTree::run(std::span<const int> z, std::uint64_t seed, std::uint64_t run, bool t_mode,
                                   int z_query_limit) const {
  const int n = ctx_.blocks;
  check_context(tree_, ctx_, z);
  ProcessTranscript tr;
  tr.nq_final.assign(static_cast<std::size_t>(n), 1);
  tr.conflict_counts.assign(static_cast<std::size_t>(n), 0);
  tr.block_queries.assign(static_cast<std::size_t>(n), 0);
  std::vector<CounterStream> streams;
  streams.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) streams.emplace_back(derive_seed(seed, run, static_cast<std::uint64_t>(i)));

  int v = DecisionTree::root();
  tr.path.push_back(v);
  while (!tree_.node(v).is_leaf()) {
    const auto& node = tree_.node(v);
    const Branch& br = branches_[static_cast<std::size_t>(v)];
    const auto i = static_cast<std::size_t>(br.block);
    const auto zi = static_cast<std::size_t>(z[i]);
    if (tr.nq_final[i] == 1) {
      if (!br.defined[0] || !br.defined[1]) throw Error("unconflicted block lost the mass of one side");
      const double r = streams[i].uniform();
      const double lo = std::min(br.p0[0], br.p0[1]);
      const double hi = std::max(br.p0[0], br.p0[1]);
      int next;
      // Boundary ties go to the non-conflict branches.
      if (r <= lo) {
        next = node.child[0];
      } else if (r >= hi) {
        next = node.child[1];
      } else {
        if (t_mode && z_query_limit >= 0 && tr.y() >= z_query_limit) {
          tr.truncated = true;
          return tr;
        }
        tr.nq_final[i] = 0;
        tr.z_queries.push_back(br.block);
        next = r <= br.p0[zi] ? node.child[0] : node.child[1];
      }
      ++tr.conflict_counts[i];
      v = next;
    } else {
      if (!br.defined[zi]) throw Error("conditioning on a zero-mass block subcube");
      v = streams[i].uniform() < br.p0[zi] ? node.child[0] : node.child[1];
    }
    ++tr.block_queries[i];
    tr.path.push_back(v);
  }
  tr.output = tree_.node(v).label;
  return tr;
}

template <class Scalar>
ProcessTranscript simulate_P(const DecisionTree& tree, const BlockContext<Scalar>& ctx, std::span<const int> z,
                             std::uint64_t seed, std::uint64_t run) {
  const BlockContext<double> fctx{ctx.blocks, ctx.pair.template cast<double>()};
  return CoupledTree(tree, fctx).run(z, seed, run, false);
}

template <class Scalar>
ProcessTranscript simulate_T(const DecisionTree& aprime, const BlockContext<Scalar>& ctx, std::span<const int> z,
                             std::uint64_t seed, std::uint64_t run) {
  const BlockContext<double> fctx{ctx.blocks, ctx.pair.template cast<double>()};
  return CoupledTree(aprime, fctx).run(z, seed, run, true);
}

QSimulator::QSimulator(const DecisionTree& aprime, const DecisionTree& bopt, const BlockContext<double>& ctx)
    : main_(aprime, ctx), bopt_(bopt) {
  if (!computes(bopt, ctx.pair.function())) throw PreconditionError("completion tree does not compute g");
}

ProcessTranscript QSimulator::run(std::span<const int> z, std::uint64_t seed, std::uint64_t run) const {
  ProcessTranscript tr = main_.run(z, seed, run, true);
  const auto& ctx = main_.context();
  const int n = ctx.blocks;
  const int m = ctx.block_bits();
  const Subcube& reached = main_.cube(tr.path.back());

  for (int i = 0; i < n; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    if (tr.nq_final[ii] == 0) continue;
    CounterStream stream(derive_seed(seed, run, static_cast<std::uint64_t>(n + i)));
    Subcube cube = reached.project(i * m, m);
    int u = DecisionTree::root();
    for (;;) {
      const auto& node = bopt_.node(u);
      if (node.is_leaf()) throw Error("completion tree reached a leaf without conflict");
      const double p0 = marginal_bit(ctx.pair.mu(0), node.var, cube);
      const double p1 = marginal_bit(ctx.pair.mu(1), node.var, cube);
      const double r = stream.uniform();
      ++tr.block_queries[ii];
      if (r <= std::min(p0, p1)) {
        cube = cube.with(node.var, 0);
        u = node.child[0];
      } else if (r >= std::max(p0, p1)) {
        cube = cube.with(node.var, 1);
        u = node.child[1];
      } else {
        tr.nq_final[ii] = 0;
        break;
      }
    }
  }
  return tr;
}

template <class Scalar>
ProcessTranscript simulate_Q(const DecisionTree& aprime, const DecisionTree& bopt, const BlockContext<Scalar>& ctx,
                             std::span<const int> z, std::uint64_t seed, std::uint64_t run) {
  const BlockContext<double> fctx{ctx.blocks, ctx.pair.template cast<double>()};
  return QSimulator(aprime, bopt, fctx).run(z, seed, run);
}

template <class Scalar>
std::vector<Scalar> p_reach_probability_exact(const DecisionTree& tree, const BlockContext<Scalar>& ctx,
                                              std::span<const int> z) {
  check_context(tree, ctx, z);
  const int n = ctx.blocks;
  const int m = ctx.block_bits();
  if (n > 20 || static_cast<double>(tree.size()) * static_cast<double>(1ULL << n) > 1e7) {
    throw BudgetExceeded("exact process sweep: state space too large");
  }
  const auto cubes = tree.node_subcubes(ctx.total_bits());
  // states[v]: unconflicted-block mask -> probability of being at v in it.
  std::vector<std::map<std::uint32_t, Scalar>> states(tree.size());
  states[0][(1U << n) - 1U] = Scalar(1);
  std::vector<Scalar> reach(tree.size(), Scalar(0));

  for (std::size_t v = 0; v < tree.size(); ++v) {
    for (const auto& [mask, w] : states[v]) reach[v] += w;
    const auto& node = tree.node(static_cast<int>(v));
    if (node.is_leaf()) continue;
    const int block = node.var / m;
    const int bit = node.var % m;
    const Subcube local = cubes[v].project(block * m, m);
    std::array<std::optional<Scalar>, 2> p;
    for (int b = 0; b < 2; ++b)
      if (mass_of(ctx.pair.mu(b), local) > Scalar(0)) p[static_cast<std::size_t>(b)] = marginal_bit(ctx.pair.mu(b), bit, local);
    const int zi = z[static_cast<std::size_t>(block)];
    const auto c0 = static_cast<std::size_t>(node.child[0]);
    const auto c1 = static_cast<std::size_t>(node.child[1]);
    const std::uint32_t flag = 1U << block;

    for (const auto& [mask, w] : states[v]) {
      if (w == Scalar(0)) continue;
      if (mask & flag) {
        if (!p[0] || !p[1]) throw Error("unconflicted block lost the mass of one side");
        const Scalar lo = std::min(*p[0], *p[1]);
        const Scalar hi = std::max(*p[0], *p[1]);
        states[c0][mask] += w * lo;
        states[c1][mask] += w * (Scalar(1) - hi);
        if (hi > lo) {
          // r uniform on (lo, hi) goes to child 0 iff r <= p_{z_i}, i.e. iff
          // p_{z_i} is the larger of the two.
          const std::size_t target = *p[static_cast<std::size_t>(zi)] == hi ? c0 : c1;
          states[target][mask & ~flag] += w * (hi - lo);
        }
      } else {
        if (!p[static_cast<std::size_t>(zi)]) throw Error("conditioning on a zero-mass block subcube");
        const Scalar& pz = *p[static_cast<std::size_t>(zi)];
        states[c0][mask] += w * pz;
        states[c1][mask] += w * (Scalar(1) - pz);
      }
    }
    states[v].clear();
  }
  return reach;
}

template <class Scalar>
std::vector<Scalar> gamma_reach_probability(const DecisionTree& tree, const BlockContext<Scalar>& ctx,
                                            std::span<const int> z) {
  check_context(tree, ctx, z);
  const int m = ctx.block_bits();
  const auto cubes = tree.node_subcubes(ctx.total_bits());
  std::vector<Scalar> out;
  out.reserve(cubes.size());
  for (const auto& c : cubes) {
    Scalar prod(1);
    for (int i = 0; i < ctx.blocks; ++i) prod *= mass_of(ctx.pair.mu(z[static_cast<std::size_t>(i)]), c.project(i * m, m));
    out.push_back(std::move(prod));
  }
  return out;
}

template <class Scalar>
ReachReport<Scalar> verify_reach_equivalence(const DecisionTree& tree, const BlockContext<Scalar>& ctx,
                                             std::span<const int> z, double tol) {
  ReachReport<Scalar> rep{p_reach_probability_exact(tree, ctx, z), gamma_reach_probability(tree, ctx, z), Scalar(0),
                          true};
  for (std::size_t v = 0; v < rep.process.size(); ++v) {
    Scalar d = rep.process[v] - rep.product[v];
    if (d < Scalar(0)) d = -d;
    if (d > rep.max_discrepancy) rep.max_discrepancy = d;
  }
  rep.pass = to_double(rep.max_discrepancy) <= tol;
  return rep;
}

PartialFn random_partial_fn(int bits, std::uint64_t seed, double undefined_rate) {
  if (bits < 1) throw PreconditionError("a two-sided function needs at least one bit");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t size = std::size_t{1} << bits;
  for (;;) {
    std::vector<Value> values(size);
    for (auto& v : values) {
      const double u = unit(rng);
      v = u < undefined_rate ? Value::Undefined : (unit(rng) < 0.5 ? Value::Zero : Value::One);
    }
    PartialFn g(bits, std::move(values));
    if (g.is_two_sided()) return g;
  }
}

InputDistribution<Rational> random_rational_distribution(int bits, std::span<const Input> support, std::uint64_t seed,
                                                         int max_weight) {
  if (support.empty()) throw PreconditionError("empty support");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> draw(0, std::max(1, max_weight));
  std::vector<long> w(support.size());
  long total = 0;
  for (auto& x : w) total += (x = draw(rng));
  if (total == 0) {
    w[std::uniform_int_distribution<std::size_t>(0, w.size() - 1)(rng)] = 1;
    total = 1;
  }
  Vector<Rational> mass = Vector<Rational>::Zero(static_cast<Eigen::Index>(std::size_t{1} << bits));
  for (std::size_t i = 0; i < support.size(); ++i) mass[support[i]] = Rational(w[i], total);
  return InputDistribution<Rational>(bits, std::move(mass));
}

namespace {

DecisionTree random_tree(std::mt19937_64& rng, std::vector<int>& free, int depth_left, int focus_block, int m) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (depth_left == 0 || free.empty() || unit(rng) < 0.15) {
    return DecisionTree::leaf(static_cast<int>(rng() & 1U));
  }
  std::vector<int> pool;
  if (focus_block >= 0) {
    for (int v : free)
      if (v / m == focus_block) pool.push_back(v);
  }
  if (pool.empty()) pool = free;
  const int var = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
  std::vector<int> rest;
  for (int v : free)
    if (v != var) rest.push_back(v);
  DecisionTree c0 = random_tree(rng, rest, depth_left - 1, focus_block, m);
  DecisionTree c1 = random_tree(rng, rest, depth_left - 1, focus_block, m);
  return DecisionTree::query(var, c0, c1);
}

}  // namespace

ReachInstance random_reach_instance(std::uint64_t seed, const ReachInstanceShape& shape) {
  std::mt19937_64 rng(seed);
  const int m = std::uniform_int_distribution<int>(1, shape.max_block_bits)(rng);
  const int n = std::uniform_int_distribution<int>(1, shape.max_blocks)(rng);
  PartialFn g = random_partial_fn(m, rng());
  auto mu0 = random_rational_distribution(m, g.preimage(0), rng());
  auto mu1 = random_rational_distribution(m, g.preimage(1), rng());
  std::vector<int> free(static_cast<std::size_t>(n * m));
  std::iota(free.begin(), free.end(), 0);
  // One instance in four hammers a single block.
  const int focus = std::uniform_int_distribution<int>(0, 3)(rng) == 0 ? 0 : -1;
  DecisionTree tree = random_tree(rng, free, shape.max_depth, focus, m);
  std::vector<int> z(static_cast<std::size_t>(n));
  for (auto& zi : z) zi = static_cast<int>(rng() & 1U);
  return ReachInstance{std::move(tree), BlockContext<Rational>{n, DistributionPair<Rational>(g, std::move(mu0), std::move(mu1))},
                       std::move(z)};
}

#define QCLAB_INSTANTIATE(S)                                                                                         \
  template ProcessTranscript simulate_P(const DecisionTree&, const BlockContext<S>&, std::span<const int>,           \
                                        std::uint64_t, std::uint64_t);                                               \
  template ProcessTranscript simulate_T(const DecisionTree&, const BlockContext<S>&, std::span<const int>,           \
                                        std::uint64_t, std::uint64_t);                                               \
  template ProcessTranscript simulate_Q(const DecisionTree&, const DecisionTree&, const BlockContext<S>&,            \
                                        std::span<const int>, std::uint64_t, std::uint64_t);                         \
  template std::vector<S> p_reach_probability_exact(const DecisionTree&, const BlockContext<S>&,                     \
                                                    std::span<const int>);                                           \
  template std::vector<S> gamma_reach_probability(const DecisionTree&, const BlockContext<S>&, std::span<const int>); \
  template ReachReport<S> verify_reach_equivalence(const DecisionTree&, const BlockContext<S>&, std::span<const int>, \
                                                   double);

QCLAB_INSTANTIATE(Rational)
QCLAB_INSTANTIATE(double)
#undef QCLAB_INSTANTIATE

}  // namespace qclab
