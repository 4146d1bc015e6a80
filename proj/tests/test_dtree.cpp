#include "fixtures.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace fx;

TEST_SUITE("dtree") {
  TEST_CASE("evaluation") {
    const auto t = query(0, leaf(0), leaf(1));
    CHECK(evaluate(t, 0b10, 2).label == 1);
    CHECK(evaluate(full2(xor2()), 0b11, 2).label == 0);
    CHECK(evaluate(leaf(1), 0b01, 2).label == 1);
  }

  TEST_CASE("computes") {
    CHECK_FALSE(computes(query(0, leaf(0), leaf(1)), or2()));
    CHECK(computes(full2(or2()), or2()));
    CHECK(computes(leaf(0), PartialFn::from_string(2, "0*00")));
    CHECK_THROWS_AS(computes(query(0, DecisionTree::leaf(), leaf(1)), id1()), PreconditionError);
  }

  TEST_CASE("repeated path variables are rejected") {
    CHECK_THROWS_AS(query(0, query(0, leaf(0), leaf(1)), leaf(1)), PreconditionError);
  }

  TEST_CASE("structure accessors") {
    const auto t = full2(xor2());
    CHECK(t.size() == 7);
    CHECK(t.max_queries() == 2);
    CHECK(t.query_depths() == std::vector<int>{0, 1, 2, 2, 1, 2, 2});
    CHECK(t.leaves().size() == 4);
    CHECK(t.node_subcubes(2)[3].to_string() == "01");
    CHECK(t.subtree(4) == query(1, leaf(1), leaf(0)));
  }

  TEST_CASE("enumeration counts") {
    const auto id = id1();
    CHECK(enumerate_trees(1, 1, &id).size() == 1);
    const auto x = xor2();
    CHECK(enumerate_trees(2, 2, &x).size() == 2);
    CHECK(enumerate_trees(2, 1, &x).empty());
    CHECK(enumerate_trees(1, 1).size() == 4);
    CHECK(static_cast<double>(enumerate_trees(2, 2).size()) == canonical_tree_count(2, 2));
    CHECK_THROWS_AS(enumerate_trees(6, 6), BudgetExceeded);
  }

  TEST_CASE("filtered enumeration equals post-filtered enumeration") {
    for (const char* table : {"0111", "0001", "0110", "0011", "01*0", "*10*"}) {
      const auto g = PartialFn::from_string(2, table);
      std::vector<DecisionTree> post;
      for (const auto& t : enumerate_trees(2, 2))
        if (computes(t, g)) post.push_back(t);
      CHECK(enumerate_trees(2, 2, &g) == post);
    }
  }

  TEST_CASE("canonical trees are distinct and have distinct children") {
    const auto trees = enumerate_trees(3, 2);
    for (std::size_t i = 0; i < trees.size(); ++i) {
      for (std::size_t k = i + 1; k < trees.size(); ++k) CHECK_FALSE(trees[i] == trees[k]);
      for (std::size_t v = 0; v < trees[i].size(); ++v) {
        const auto& n = trees[i].node(static_cast<int>(v));
        if (!n.is_leaf()) CHECK_FALSE(trees[i].subtree(n.child[0]) == trees[i].subtree(n.child[1]));
      }
    }
  }

  TEST_CASE("reach probabilities") {
    const auto t = full2(xor2());
    const auto u = InputDistribution<Rational>::uniform(2);
    CHECK(reach_probability(t, u, 0) == 1);
    CHECK(reach_probability(t, u, 2) == q("1/4"));
    const auto mu0 = dist(2, {"1/2", "0", "0", "1/2"});
    CHECK(reach_probability(t, mu0, 2) == q("1/2"));

    const auto mu = dist(3, {"1/8", "1/16", "3/16", "0", "1/4", "1/8", "1/8", "1/8"});
    for (const auto& tree : enumerate_trees(3, 2)) {
      const auto r = reach_probabilities(tree, mu);
      Rational leaves(0);
      for (int l : tree.leaves()) leaves += r[static_cast<std::size_t>(l)];
      CHECK(leaves == 1);
      for (std::size_t v = 0; v < tree.size(); ++v) {
        const auto& n = tree.node(static_cast<int>(v));
        if (!n.is_leaf()) CHECK(r[v] == r[static_cast<std::size_t>(n.child[0])] + r[static_cast<std::size_t>(n.child[1])]);
      }
    }
  }
}
