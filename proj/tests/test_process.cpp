#include "fixtures.hpp"
#include "oracles.hpp"
#include "qclab/compose.hpp"
#include "qclab/process.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace fx;

namespace {

template <class S>
BlockContext<S> ctx(int n, const DistributionPair<S>& p) {
  return BlockContext<S>{n, p};
}

struct Stats {
  double mean;
  double se;
};

Stats stats(const std::vector<double>& xs) {
  double s = 0;
  for (double x : xs) s += x;
  const double m = s / static_cast<double>(xs.size());
  double ss = 0;
  for (double x : xs) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()))};
}

}  // namespace

TEST_SUITE("process") {
  TEST_CASE("P on the XOR pair conflicts at the second query") {
    const auto c = ctx(1, xor2_pair());
    const std::vector<int> z{1};
    for (std::uint64_t s = 0; s < 200; ++s) {
      const auto tr = simulate_P(full2(xor2()), c, z, s);
      CHECK(tr.conflict_counts[0] == 2);
      CHECK(tr.nq_final[0] == 0);
      CHECK(tr.output == 1);
    }
  }

  TEST_CASE("P on identity conflicts at once") {
    const auto c = ctx(1, id1_pair());
    for (int zi : {0, 1}) {
      const std::vector<int> z{zi};
      const auto tr = simulate_P(query(0, leaf(0), leaf(1)), c, z, 3);
      CHECK(tr.conflict_counts[0] == 1);
      CHECK(tr.output == zi);
    }
  }

  TEST_CASE("P on the OR pair stops at one query with probability 2/3") {
    const auto c = ctx(1, or2_pair<double>());
    const auto t = full2(or2());
    const std::vector<int> z{0};
    const int runs = 100000;
    int ones = 0;
    for (int r = 0; r < runs; ++r) ones += simulate_P(t, c, z, 9, static_cast<std::uint64_t>(r)).conflict_counts[0] == 1;
    const double p = static_cast<double>(ones) / runs;
    CHECK(std::abs(p - 2.0 / 3.0) <= 3.0 * std::sqrt((2.0 / 9.0) / runs));
  }

  TEST_CASE("mean N matches E[N] and the naive transliteration") {
    const auto g = PartialFn::from_string(3, "0111*110");
    const DistributionPair<Rational> p(g, random_rational_distribution(3, g.preimage(0), 1),
                                       random_rational_distribution(3, g.preimage(1), 2));
    const auto t = chi_star(p).optimal_tree;
    const double exact = to_double(expected_conflict_queries(t, p));
    const auto c = ctx(1, p);
    const auto m0 = oracle::masses(p.cast<double>().mu(0)), m1 = oracle::masses(p.cast<double>().mu(1));
    std::mt19937_64 rng(4);
    std::vector<double> ours, naive;
    for (int r = 0; r < 40000; ++r) {
      const std::vector<int> z{r % 2};
      ours.push_back(simulate_P(t, c, z, 17, static_cast<std::uint64_t>(r)).conflict_counts[0]);
      naive.push_back(oracle::naive_p_single(t, m0, m1, 3, r % 2, rng));
    }
    const auto a = stats(ours), b = stats(naive);
    CHECK(std::abs(a.mean - exact) <= 3.0 * a.se);
    CHECK(std::abs(b.mean - exact) <= 3.0 * b.se);
  }

  TEST_CASE("transcripts are reproducible and satisfy the bookkeeping invariants") {
    for (std::uint64_t s = 0; s < 30; ++s) {
      const auto inst = random_reach_instance(s);
      const auto a = simulate_T(inst.tree, inst.ctx, inst.z, 99, s);
      const auto b = simulate_T(inst.tree, inst.ctx, inst.z, 99, s);
      CHECK(a.path == b.path);
      CHECK(a.z_queries == b.z_queries);
      int dropped = 0;
      for (int i = 0; i < inst.ctx.blocks; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        if (a.nq_final[ui] == 0) {
          ++dropped;
          CHECK(a.conflict_counts[ui] >= 1);
        }
        CHECK(a.block_queries[ui] >= a.conflict_counts[ui]);
      }
      CHECK(dropped == a.y());
      CHECK(static_cast<int>(a.path.size()) == a.x_total() + 1);
    }
  }

  TEST_CASE("exact P reach equals gamma reach") {
    const auto c = ctx(1, xor2_pair());
    const std::vector<int> z{0};
    const auto r = p_reach_probability_exact(full2(xor2()), c, z);
    CHECK(r[0] == 1);
    CHECK(r[2] == q("1/2"));

    for (std::uint64_t s = 0; s < 60; ++s) {
      const auto inst = random_reach_instance(1000 + s);
      const auto proc = p_reach_probability_exact(inst.tree, inst.ctx, inst.z);
      const auto m0 = oracle::masses(inst.ctx.pair.mu(0)), m1 = oracle::masses(inst.ctx.pair.mu(1));
      CHECK(proc == oracle::gamma_reach(inst.tree, m0, m1, inst.ctx.block_bits(), inst.z));
      CHECK(verify_reach_equivalence(inst.tree, inst.ctx, inst.z, 0.0).pass);
    }
  }

  TEST_CASE("exact reach on a tree hammering one block") {
    const auto g = PartialFn::from_string(3, "01101001");
    const DistributionPair<Rational> p(g, random_rational_distribution(3, g.preimage(0), 5),
                                       random_rational_distribution(3, g.preimage(1), 6));
    // Three queries into block 0, then one into block 1.
    const auto inner = query(3, leaf(0), leaf(1));
    const auto t = query(0, query(1, query(2, inner, leaf(1)), inner), query(2, inner, query(1, leaf(0), inner)));
    for (int z0 : {0, 1})
      for (int z1 : {0, 1}) {
        const std::vector<int> z{z0, z1};
        const auto rep = verify_reach_equivalence(t, BlockContext<Rational>{2, p}, z, 0.0);
        CHECK(rep.max_discrepancy == 0);
      }
  }

  TEST_CASE("routing marginal law") {
    for (std::uint64_t s = 0; s < 20; ++s) {
      const auto inst = random_reach_instance(500 + s);
      const auto reach = p_reach_probability_exact(inst.tree, inst.ctx, inst.z);
      const auto cubes = inst.tree.node_subcubes(inst.ctx.total_bits());
      const int m = inst.ctx.block_bits();
      for (std::size_t v = 0; v < inst.tree.size(); ++v) {
        const auto& n = inst.tree.node(static_cast<int>(v));
        if (n.is_leaf() || reach[v] == 0) continue;
        const int i = n.var / m;
        const auto local = cubes[v].project(i * m, m);
        const auto expected = marginal_bit(inst.ctx.pair.mu(inst.z[static_cast<std::size_t>(i)]), n.var % m, local);
        CHECK(reach[static_cast<std::size_t>(n.child[0])] == reach[v] * expected);
      }
    }
  }

  TEST_CASE("state-space guard") {
    const auto p = id1_pair();
    DecisionTree t = leaf(0);
    for (int v = 20; v >= 0; --v) t = query(v, t, leaf(1));
    const std::vector<int> z(21, 0);
    CHECK_THROWS_AS(p_reach_probability_exact(t, BlockContext<Rational>{21, p}, z), BudgetExceeded);
  }

  TEST_CASE("T and Q on the XOR composition") {
    const auto c = ctx(2, xor2_pair());
    const auto a = parity_tree(4);
    const auto bopt = full2(xor2());
    for (int z0 : {0, 1})
      for (int z1 : {0, 1}) {
        const std::vector<int> z{z0, z1};
        for (std::uint64_t r = 0; r < 50; ++r) {
          const auto t = simulate_T(a, c, z, 8, r);
          CHECK(t.output == (z0 ^ z1));
          CHECK(t.y() == 2);
          const auto qq = simulate_Q(a, bopt, c, z, 8, r);
          CHECK(qq.x_total() == 4);
        }
      }
  }

  TEST_CASE("T with identity blocks reads A' on z") {
    const auto c = ctx(3, id1_pair());
    const auto a = query(1, query(0, leaf(0), leaf(1)), leaf(1));
    for (Input zz = 0; zz < 8; ++zz) {
      const auto z = unpack_bits(zz, 3);
      const auto t = simulate_T(a, c, z, 1, 0);
      CHECK(t.output == evaluate(a, zz, 3).label);
      CHECK(t.y() == static_cast<int>(t.path.size()) - 1);
      const auto qq = simulate_Q(a, query(0, leaf(0), leaf(1)), c, z, 1, 0);
      CHECK(qq.x_total() == 3);
    }
  }

  TEST_CASE("Q on one identity block makes one query") {
    const auto c = ctx(1, id1_pair());
    const std::vector<int> z{1};
    CHECK(simulate_Q(leaf(0), query(0, leaf(0), leaf(1)), c, z, 2, 0).x_total() == 1);
  }

  TEST_CASE("Q total queries are at least n chi star on average") {
    const auto c = ctx(2, or2_pair<double>());
    const auto bopt = chi_star(or2_pair()).optimal_tree;
    const auto a = full_tree(4, [](Input x) { return x == 0 ? 0 : 1; });
    std::vector<double> xs;
    for (int r = 0; r < 100000; ++r) {
      const std::vector<int> z{r % 2, (r / 2) % 2};
      xs.push_back(simulate_Q(a, bopt, c, z, 21, static_cast<std::uint64_t>(r)).x_total());
    }
    const auto st = stats(xs);
    CHECK(st.mean >= 2.0 * 4.0 / 3.0 - 3.0 * st.se);
  }
}
